#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "levycal/config.hpp"
#include "levycal/errors.hpp"
#include "levycal/io.hpp"

using namespace levycal;

namespace {

struct Opts {
    std::string config;
    std::string out;
    std::string quotes;
    std::string trace;
    bool oracle = false;
    int rep = 0;
    int reps = -1;
    long long seed = -1;
    double alpha = -1.0;
    int workers = -1;
    double sigma0 = -1.0;
};

RunConfig load(const Opts& o) { return o.config.empty() ? RunConfig{} : load_run_config(o.config); }

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Config, "cannot write " + path);
    f << text;
}

void apply_overrides(RunConfig& rc, const Opts& o) {
    if (o.reps >= 0) {
        if (o.reps < 1) throw Error(ErrorCode::Config, "--reps must be >= 1");
        rc.sim.reps = o.reps;
    }
    if (o.seed >= 0) rc.sim.seed = std::uint64_t(o.seed);
    if (o.alpha >= 0.0) {
        if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw Error(ErrorCode::Config, "--alpha must lie in (0, 1)");
        rc.inference.alpha = o.alpha;
    }
    if (const char* env = std::getenv("LEVYCAL_WORKERS"); env && o.workers < 0) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || w < 1) throw Error(ErrorCode::Config, "LEVYCAL_WORKERS must be a positive integer");
        rc.sim.workers = int(w);
    }
    if (o.workers >= 0) {
        if (o.workers < 1) throw Error(ErrorCode::Config, "--workers must be >= 1");
        rc.sim.workers = o.workers;
    }
}

// Quotes from --quotes / io.quotes, otherwise one simulated replication.
std::vector<ObservationSample> load_samples(const RunConfig& rc, const Opts& o, double& T) {
    const std::string path = !o.quotes.empty() ? o.quotes : rc.io.quotes;
    if (path.empty()) {
        const SimConfig sc = rc.sim_config();
        T = sc.T;
        return quotes_to_samples(gen_dataset(sc, o.rep));
    }
    QuoteFile f = read_quotes_csv_file(path);
    if (!f.has_market) {
        if (!rc.market) throw Error(ErrorCode::Config, "market: S, r and T needed (config section or #S=..,r=..,T=.. line)");
        f.slice.S = rc.market->S;
        f.slice.r = rc.market->r;
        f.slice.T = rc.market->T;
    }
    T = f.slice.T;
    return quotes_to_samples(f.slice);
}

int cmd_price(const Opts& o) {
    const RunConfig rc = load(o);
    if (!rc.model) throw Error(ErrorCode::Config, "model: section required");
    if (!rc.market) throw Error(ErrorCode::Config, "market: section with S, r, T required");
    const MarketParams& m = *rc.market;
    std::vector<double> strikes = rc.io.strikes;
    if (strikes.empty())
        for (int k = 0; k < 21; ++k) strikes.push_back(m.S * std::exp(-1.0 + 0.1 * k + m.r * m.T));
    std::vector<double> xs;
    for (double K : strikes) xs.push_back(std::log(K / m.S) - m.r * m.T);
    const std::vector<double> O = option_curve(LevyTriplet::merton(*rc.model), m.T, xs, rc.pricing);
    std::ostringstream os;
    os << "strike,price" << (o.oracle ? ",price_series" : "") << "\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double c = m.S * (O[i] + std::max(0.0, 1.0 - std::exp(xs[i])));
        os << fmt17(strikes[i]) << ',' << fmt17(c);
        if (o.oracle) os << ',' << fmt17(merton_call_series(*rc.model, m.S, m.r, m.T, strikes[i]));
        os << "\n";
    }
    emit(o.out.empty() ? rc.io.output : o.out, os.str());
    return 0;
}

int cmd_simulate(const Opts& o) {
    RunConfig rc = load(o);
    apply_overrides(rc, o);
    const SimConfig sc = rc.sim_config();
    sc.validate();
    std::ostringstream os;
    write_quotes_csv(os, gen_dataset(sc, o.rep));
    emit(o.out.empty() ? rc.io.output : o.out, os.str());
    return 0;
}

int cmd_calibrate(const Opts& o) {
    RunConfig rc = load(o);
    apply_overrides(rc, o);
    double T = 0.0;
    const std::vector<ObservationSample> samples = load_samples(rc, o, T);
    const NoiseModel nm = noise_model_from_samples(samples);
    std::optional<LevyTriplet> truth;
    if (rc.model) truth = LevyTriplet::merton(*rc.model);
    if (rc.calib.policy == CutoffPolicy::Oracle && !truth)
        throw Error(ErrorCode::Config, "calibration.policy: oracle needs a model section; use auto or fixed");
    const std::vector<double> grid = rc.inference.mu_grid();
    CalibrationReport rep;
    rep.result = calibrate(samples, T, rc.calib, grid, nm.epsilon, truth ? &*truth : nullptr);
    rep.epsilon = nm.epsilon;
    rep.n = int(samples.size());
    const InferenceContext ctx = make_context(samples, T, rep.result, rc.calib);
    rep.regime = infer_regime(ctx);
    std::vector<Target> tg{{TargetKind::Sigma2, 0.0}, {TargetKind::Gamma, 0.0}, {TargetKind::Lambda, 0.0}};
    for (double x : grid) tg.push_back({TargetKind::Mu, x});
    rep.intervals = conf_intervals(ctx, tg, rc.inference.alpha, rep.regime, rc.inference.mode, rc.inference.finite);
    rep.ellipse = joint_ellipse_gamma_lambda(ctx, rc.inference.alpha, rep.regime, rc.inference.mode, rc.inference.finite);
    if (rep.result.trim_count > 0)
        rep.warnings.push_back("trimmed logarithm active at " + std::to_string(rep.result.trim_count) + " nodes");
    if (rep.result.bias.divergent) rep.warnings.push_back("bias bounds use truncated weight norms");

    const std::string prefix = !o.out.empty() ? o.out : !rc.io.output.empty() ? rc.io.output : "levycal_calibration";
    emit(prefix + ".json", calibration_json(rep));
    std::vector<double> mu, lo, hi;
    for (std::size_t k = 3; k < rep.intervals.size(); ++k) {
        mu.push_back(rep.intervals[k].estimate);
        lo.push_back(rep.intervals[k].lo);
        hi.push_back(rep.intervals[k].hi);
    }
    std::ostringstream os;
    write_mu_csv(os, grid, mu, lo, hi);
    emit(prefix + "_mu.csv", os.str());
    return 0;
}

int cmd_coverage(const Opts& o) {
    RunConfig rc = load(o);
    apply_overrides(rc, o);
    const CoverageReport r = run_coverage(rc.sim_config());
    std::cerr << "coverage: " << r.reps << " reps in " << r.runtime_s << " s\n";
    emit(o.out.empty() ? rc.io.output : o.out, coverage_json(r));
    const std::string trace = !o.trace.empty() ? o.trace : rc.io.trace;
    if (!trace.empty()) {
        std::ostringstream os;
        write_trace_csv(os, r);
        emit(trace, os.str());
    }
    return 0;
}

VolData vol_data(RunConfig& rc, const Opts& o) {
    apply_overrides(rc, o);
    double T = 0.0;
    const std::vector<ObservationSample> samples = load_samples(rc, o, T);
    return make_vol_data(samples, T, rc.calib, rc.vol.test);
}

int cmd_voltest(const Opts& o) {
    RunConfig rc = load(o);
    const VolData d = vol_data(rc, o);
    const VolStats st = vol_stat(o.sigma0, d);
    const VolTestResult t = vol_test(o.sigma0, rc.inference.alpha, st, rc.calib.bounds.sigma_max);
    emit(o.out.empty() ? rc.io.output : o.out, voltest_json(t, st));
    return 0;
}

int cmd_volset(const Opts& o) {
    RunConfig rc = load(o);
    const VolData d = vol_data(rc, o);
    const VolConfSet set = vol_conf_set(rc.inference.alpha, sigma_grid(rc.calib.bounds.sigma_max, rc.vol.grid_step), d);
    emit(o.out.empty() ? rc.io.output : o.out, volset_json(set, d));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"levycal: spectral calibration of exponential Levy models"};
    app.require_subcommand(1);
    Opts o;

    auto add_config = [&](CLI::App* c) { c->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile); };
    auto add_out = [&](CLI::App* c, const std::string& what) { c->add_option("-o,--out", o.out, what); };
    auto add_data = [&](CLI::App* c) {
        c->add_option("-q,--quotes", o.quotes, "quote CSV (strike,kind,price,noise_sd)");
        c->add_option("--rep", o.rep, "replication index simulated when no quotes are given")->check(CLI::NonNegativeNumber);
        c->add_option("--seed", o.seed, "simulation seed")->check(CLI::NonNegativeNumber);
    };

    auto* price = app.add_subcommand("price", "Merton call prices by Fourier inversion");
    add_config(price);
    add_out(price, "output CSV (default stdout)");
    price->add_flag("--oracle", o.oracle, "add the closed-form series column");

    auto* sim = app.add_subcommand("simulate", "write one simulated quote file");
    add_config(sim);
    add_out(sim, "output CSV (default stdout)");
    sim->add_option("--rep", o.rep, "replication index")->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", o.seed, "simulation seed")->check(CLI::NonNegativeNumber);

    auto* cal = app.add_subcommand("calibrate", "estimate the triplet with confidence intervals");
    add_config(cal);
    add_data(cal);
    add_out(cal, "output prefix: PREFIX.json and PREFIX_mu.csv");
    cal->add_option("--alpha", o.alpha, "interval level is 1 - alpha");

    auto* cov = app.add_subcommand("coverage", "Monte Carlo coverage study");
    add_config(cov);
    add_out(cov, "report JSON (default stdout)");
    cov->add_option("--reps", o.reps, "replications");
    cov->add_option("--seed", o.seed, "master seed")->check(CLI::NonNegativeNumber);
    cov->add_option("--alpha", o.alpha, "interval level is 1 - alpha");
    cov->add_option("--workers", o.workers, "worker threads (default $LEVYCAL_WORKERS or config)");
    cov->add_option("--trace", o.trace, "per-replication CSV");

    auto* vt = app.add_subcommand("voltest", "test H0: sigma = sigma0");
    add_config(vt);
    add_data(vt);
    add_out(vt, "result JSON (default stdout)");
    vt->add_option("--sigma0", o.sigma0, "hypothesised volatility in [0, sigma_max]")->required();
    vt->add_option("--alpha", o.alpha, "test level");

    auto* vs = app.add_subcommand("volset", "confidence set for sigma by test inversion");
    add_config(vs);
    add_data(vs);
    add_out(vs, "result JSON (default stdout)");
    vs->add_option("--alpha", o.alpha, "set level is 1 - alpha");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (*price) return cmd_price(o);
        if (*sim) return cmd_simulate(o);
        if (*cal) return cmd_calibrate(o);
        if (*cov) return cmd_coverage(o);
        if (*vt) return cmd_voltest(o);
        if (*vs) return cmd_volset(o);
    } catch (const Error& e) {
        std::cerr << "levycal: " << e.what() << "\n";
        return is_input_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "levycal: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
