#include "levycal/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "levycal/errors.hpp"

namespace levycal {

using nlohmann::json;

std::vector<double> InferenceSettings::mu_grid() const {
    std::vector<double> g;
    if (mu_n == 1) return {mu_min};
    for (int k = 0; k < mu_n; ++k) {
        double x = mu_min + (mu_max - mu_min) * k / (mu_n - 1);
        if (std::abs(x) < 1e-12) x = 0.0;
        g.push_back(x);
    }
    return g;
}

SimConfig RunConfig::sim_config() const {
    SimConfig c = sim;
    if (model) c.merton = *model;
    if (market) {
        c.S = market->S;
        c.r = market->r;
        c.T = market->T;
    }
    c.calib = calib;
    c.alpha = inference.alpha;
    c.variance_mode = inference.mode;
    c.finite = inference.finite;
    c.mu_grid = inference.mu_grid();
    c.pricing = pricing;
    return c;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorCode::Config, path + ": " + msg);
}

// Checked access to one JSON object section.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.count(k)) fail(path_ + "." + k, "unknown key");
    }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
    std::string where(const std::string& k) const { return path_ + "." + k; }

    void require(const std::string& k) const {
        if (!has(k)) fail(where(k), "required key missing");
    }

    void num(const std::string& k, double& dst) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number()) fail(where(k), "expected a number");
        dst = v.get<double>();
    }
    void integer(const std::string& k, int& dst) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) fail(where(k), "expected an integer");
        dst = v.get<int>();
    }
    void u64(const std::string& k, std::uint64_t& dst) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(where(k), "expected a non-negative integer");
        dst = v.get<std::uint64_t>();
    }
    void boolean(const std::string& k, bool& dst) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_boolean()) fail(where(k), "expected true or false");
        dst = v.get<bool>();
    }
    void str(const std::string& k, std::string& dst) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_string()) fail(where(k), "expected a string");
        dst = v.get<std::string>();
    }
    void nums(const std::string& k, std::vector<double>& dst) const {
        if (!has(k)) return;
        const json& v = j_.at(k);
        if (!v.is_array()) fail(where(k), "expected an array of numbers");
        dst.clear();
        for (const auto& e : v) {
            if (!e.is_number()) fail(where(k), "expected an array of numbers");
            dst.push_back(e.get<double>());
        }
    }
    template <class E>
    void choice(const std::string& k, E& dst, const std::vector<std::pair<std::string, E>>& opts) const {
        if (!has(k)) return;
        std::string s;
        str(k, s);
        std::string names;
        for (const auto& [name, val] : opts) {
            if (name == s) {
                dst = val;
                return;
            }
            names += (names.empty() ? "" : ", ") + name;
        }
        fail(where(k), "expected one of " + names);
    }
    const json& at(const std::string& k) const { return j_.at(k); }

private:
    const json& j_;
    std::string path_;
};

void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, std::string("config: invalid JSON: ") + e.what());
    }
    const Section top(root, "config",
                      {"model", "market", "calibration", "inference", "simulation", "volatility", "pricing", "io"});
    RunConfig rc;

    if (top.has("model")) {
        const Section m(top.at("model"), "model", {"sigma", "lambda", "eta", "v"});
        MertonParams p;
        for (const char* k : {"sigma", "lambda", "eta", "v"}) m.require(k);
        m.num("sigma", p.sigma);
        m.num("lambda", p.lambda);
        m.num("eta", p.eta);
        m.num("v", p.v);
        try {
            p.validate();
        } catch (const Error& e) {
            fail("model", e.what());
        }
        rc.model = p;
    }

    if (top.has("market")) {
        const Section m(top.at("market"), "market", {"S", "r", "T"});
        MarketParams p;
        for (const char* k : {"S", "r", "T"}) m.require(k);
        m.num("S", p.S);
        m.num("r", p.r);
        m.num("T", p.T);
        check(p.S > 0.0, "market.S", "must be > 0");
        check(p.T > 0.0, "market.T", "must be > 0");
        rc.market = p;
    }

    if (top.has("calibration")) {
        const Section c(top.at("calibration"), "calibration",
                        {"s", "R", "sigma_max", "policy", "U", "alpha", "U_max", "U_pilot", "oracle_U_min",
                         "oracle_U_max", "oracle_U_step", "oracle_weights", "N_quad", "track_factor", "pad", "interp",
                         "known_sigma2", "phase_jump_limit"});
        CalibrationConfig& k = rc.calib;
        c.integer("s", k.bounds.s);
        c.num("R", k.bounds.R);
        c.num("sigma_max", k.bounds.sigma_max);
        c.choice<CutoffPolicy>("policy", k.policy,
                               {{"oracle", CutoffPolicy::Oracle}, {"auto", CutoffPolicy::Auto}, {"fixed", CutoffPolicy::Fixed}});
        c.num("U", k.U);
        c.num("alpha", k.alpha);
        c.num("U_max", k.U_max);
        c.num("U_pilot", k.U_pilot);
        c.num("oracle_U_min", k.oracle_U_min);
        c.num("oracle_U_max", k.oracle_U_max);
        c.num("oracle_U_step", k.oracle_U_step);
        std::vector<double> ow;
        c.nums("oracle_weights", ow);
        if (c.has("oracle_weights")) {
            check(ow.size() == 3, "calibration.oracle_weights", "expected three numbers");
            k.oracle_weights = {ow[0], ow[1], ow[2]};
        }
        c.integer("N_quad", k.N_quad);
        c.integer("track_factor", k.track_factor);
        c.num("pad", k.pad);
        c.choice<InterpMode>("interp", k.interp, {{"kink", InterpMode::Kink}, {"linear", InterpMode::Linear}});
        if (c.has("known_sigma2")) {
            double v = 0.0;
            c.num("known_sigma2", v);
            k.known_sigma2 = v;
        }
        c.num("phase_jump_limit", k.phase_jump_limit);
    }
    try {
        rc.calib.validate();
    } catch (const Error& e) {
        fail("calibration", e.what());
    }

    if (top.has("inference")) {
        const Section c(top.at("inference"), "inference",
                        {"alpha", "variance_mode", "intensity", "N_cov", "check_convergence", "convergence_tol",
                         "mu_min", "mu_max", "mu_n"});
        InferenceSettings& k = rc.inference;
        c.num("alpha", k.alpha);
        c.choice<VarianceMode>("variance_mode", k.mode,
                               {{"finite", VarianceMode::FiniteSample}, {"asymptotic", VarianceMode::Asymptotic}});
        c.choice<IntensityKind>("intensity", k.finite.intensity,
                                {{"design", IntensityKind::Design}, {"white_noise", IntensityKind::WhiteNoise}});
        c.integer("N_cov", k.finite.N_cov);
        c.boolean("check_convergence", k.finite.check_convergence);
        c.num("convergence_tol", k.finite.convergence_tol);
        c.num("mu_min", k.mu_min);
        c.num("mu_max", k.mu_max);
        c.integer("mu_n", k.mu_n);
    }
    check(rc.inference.alpha > 0.0 && rc.inference.alpha < 1.0, "inference.alpha", "must lie in (0, 1)");
    check(rc.inference.finite.N_cov >= 4, "inference.N_cov", "must be >= 4");
    check(rc.inference.finite.convergence_tol > 0.0, "inference.convergence_tol", "must be > 0");
    check(rc.inference.mu_n >= 1, "inference.mu_n", "must be >= 1");
    check(rc.inference.mu_max >= rc.inference.mu_min, "inference.mu_max", "must be >= mu_min");

    if (top.has("simulation")) {
        const Section c(top.at("simulation"), "simulation",
                        {"n", "moneyness_sd", "rel_noise", "reps", "seed", "fixed_design", "track_mu", "workers"});
        SimConfig& k = rc.sim;
        c.integer("n", k.n);
        c.num("moneyness_sd", k.moneyness_sd);
        c.num("rel_noise", k.rel_noise);
        c.integer("reps", k.reps);
        c.u64("seed", k.seed);
        c.boolean("fixed_design", k.fixed_design);
        c.boolean("track_mu", k.track_mu);
        c.integer("workers", k.workers);
    }
    check(rc.sim.n >= 3, "simulation.n", "must be >= 3");
    check(rc.sim.reps >= 1, "simulation.reps", "must be >= 1");
    check(rc.sim.rel_noise > 0.0, "simulation.rel_noise", "must be > 0");
    check(rc.sim.moneyness_sd > 0.0, "simulation.moneyness_sd", "must be > 0");
    check(rc.sim.workers >= 1, "simulation.workers", "must be >= 1");

    if (top.has("volatility")) {
        const Section c(top.at("volatility"), "volatility",
                        {"alpha_cut", "alpha_bar", "sigma_bar_factor", "U_max", "beta0", "grid_step"});
        c.num("alpha_cut", rc.vol.test.alpha_cut);
        c.num("alpha_bar", rc.vol.test.alpha_bar);
        c.num("sigma_bar_factor", rc.vol.test.sigma_bar_factor);
        c.num("U_max", rc.vol.test.U_max);
        c.num("beta0", rc.vol.test.beta0);
        c.num("grid_step", rc.vol.grid_step);
    }
    try {
        rc.vol.test.validate(rc.calib.bounds.s);
    } catch (const Error& e) {
        fail("volatility", e.what());
    }
    check(rc.vol.grid_step > 0.0 && rc.vol.grid_step <= 0.005 * rc.calib.bounds.sigma_max * (1 + 1e-12),
          "volatility.grid_step", "must lie in (0, 0.005 sigma_max]");

    if (top.has("pricing")) {
        const Section c(top.at("pricing"), "pricing",
                        {"U_price", "N_price", "sigma_ref", "u_tol", "check_convergence", "convergence_tol"});
        c.num("U_price", rc.pricing.U_price);
        c.integer("N_price", rc.pricing.N_price);
        c.num("sigma_ref", rc.pricing.sigma_ref);
        c.num("u_tol", rc.pricing.u_tol);
        c.boolean("check_convergence", rc.pricing.check_convergence);
        c.num("convergence_tol", rc.pricing.convergence_tol);
    }
    check(rc.pricing.U_price > 0.0, "pricing.U_price", "must be > 0");
    check(rc.pricing.N_price >= 16, "pricing.N_price", "must be >= 16");
    check(rc.pricing.sigma_ref > 0.0, "pricing.sigma_ref", "must be > 0");
    check(rc.pricing.u_tol > 0.0, "pricing.u_tol", "must be > 0");
    check(rc.pricing.convergence_tol > 0.0, "pricing.convergence_tol", "must be > 0");

    if (top.has("io")) {
        const Section c(top.at("io"), "io", {"quotes", "output", "trace", "strikes"});
        c.str("quotes", rc.io.quotes);
        c.str("output", rc.io.output);
        c.str("trace", rc.io.trace);
        c.nums("strikes", rc.io.strikes);
        for (double k : rc.io.strikes) check(k > 0.0, "io.strikes", "strikes must be > 0");
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace levycal
