#include "levycal/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "levycal/errors.hpp"

namespace levycal {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ rep_);
    h = splitmix64(h ^ stream_);
    return splitmix64(h ^ counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
    return (double(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t k) const {
    const double u1 = uniform(2 * k), u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SimConfig::validate() const {
    merton.validate();
    if (n < 3) throw Error(ErrorCode::Config, "simulation: n must be >= 3");
    if (reps < 1) throw Error(ErrorCode::Config, "simulation: reps must be >= 1");
    if (!(rel_noise > 0.0)) throw Error(ErrorCode::Config, "simulation: relative noise must be > 0");
    if (!(S > 0.0) || !(T > 0.0)) throw Error(ErrorCode::Config, "simulation: S and T must be > 0");
    if (!(moneyness_sd > 0.0)) throw Error(ErrorCode::Config, "simulation: moneyness_sd must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Config, "simulation: alpha must lie in (0, 1)");
    if (workers < 1) throw Error(ErrorCode::Config, "simulation: workers must be >= 1");
    calib.validate();
}

std::vector<double> SimConfig::mu_points() const {
    if (!mu_grid.empty()) return mu_grid;
    std::vector<double> g(101);
    for (int k = 0; k <= 100; ++k) g[k] = -1.0 + 0.02 * k;
    g[50] = 0.0;
    return g;
}

LevyTriplet sim_truth(const SimConfig& cfg) { return LevyTriplet::merton(cfg.merton); }

namespace {

enum Stream : std::uint64_t { kDesign = 0, kNoise = 1 };

std::vector<double> draw_design(const SimConfig& cfg, int rep) {
    const CounterRng rng(cfg.seed, std::uint64_t(cfg.fixed_design ? 0 : rep), kDesign);
    std::vector<double> xs;
    std::uint64_t k = 0;
    while (int(xs.size()) < cfg.n) {
        const double x = cfg.moneyness_sd * rng.normal(k++);
        bool dup = false;
        for (double y : xs)
            if (std::abs(x - y) < 1e-9) {
                dup = true;
                break;
            }
        if (!dup) xs.push_back(x);
    }
    return xs;
}

}  // namespace

MarketSlice gen_dataset(const SimConfig& cfg, int rep) {
    const std::vector<double> xs = draw_design(cfg, rep);
    const std::vector<double> O = option_curve(sim_truth(cfg), cfg.T, xs, cfg.pricing);
    const CounterRng noise(cfg.seed, std::uint64_t(rep), kNoise);
    MarketSlice sl;
    sl.S = cfg.S;
    sl.r = cfg.r;
    sl.T = cfg.T;
    for (int j = 0; j < cfg.n; ++j) {
        const double sd = cfg.rel_noise * std::abs(O[j]);
        const double Oj = O[j] + sd * noise.normal(std::uint64_t(j));
        OptionQuote q;
        q.strike = cfg.S * std::exp(xs[j] + cfg.r * cfg.T);
        q.price = cfg.S * (Oj + std::max(0.0, 1.0 - std::exp(xs[j])));
        q.kind = OptionKind::Call;
        q.noise_sd = cfg.S * sd;
        sl.quotes.push_back(q);
    }
    return sl;
}

RepRecord run_replication(const SimConfig& cfg, int rep) {
    RepRecord rec;
    rec.rep = rep;
    const LevyTriplet truth = sim_truth(cfg);
    const std::vector<double> mux = cfg.track_mu ? cfg.mu_points() : std::vector<double>{};
    try {
        const std::vector<ObservationSample> samples = quotes_to_samples(gen_dataset(cfg, rep));
        const NoiseModel nm = noise_model_from_samples(samples);
        const CalibrationResult res = calibrate(samples, cfg.T, cfg.calib, mux, nm.epsilon, &truth);
        const InferenceContext ctx = make_context(samples, cfg.T, res, cfg.calib);
        const Regime regime = infer_regime(ctx);
        std::vector<Target> tg{{TargetKind::Sigma2, 0.0}, {TargetKind::Gamma, 0.0}, {TargetKind::Lambda, 0.0}};
        for (double x : mux) tg.push_back({TargetKind::Mu, x});
        const auto cis = conf_intervals(ctx, tg, cfg.alpha, regime, cfg.variance_mode, cfg.finite);
        const double tv[3] = {truth.sigma2, truth.gamma, truth.lambda};
        rec.U = res.U;
        rec.trim_count = res.trim_count;
        for (int i = 0; i < 3; ++i) {
            rec.est[i] = cis[i].estimate;
            rec.sd[i] = cis[i].sd;
            rec.hit[i] = cis[i].lo <= tv[i] && tv[i] <= cis[i].hi;
        }
        for (std::size_t k = 0; k < mux.size(); ++k) {
            const auto& ci = cis[3 + k];
            const double m = mu_density(mux[k], truth);
            rec.mu_hat.push_back(ci.estimate);
            rec.mu_sd.push_back(ci.sd);
            rec.mu_hit.push_back(ci.lo <= m && m <= ci.hi);
        }
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::PhaseJumpTooLarge:
        case ErrorCode::CovarianceNotConverged:
        case ErrorCode::NegativeVariance:
            rec.failed = true;
            rec.failure = e.what();
            break;
        default: throw;
        }
    }
    return rec;
}

CoverageReport run_coverage(const SimConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RepRecord> recs(cfg.reps);
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.reps) return;
            try {
                recs[i] = run_replication(cfg, i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next = cfg.reps;
                return;
            }
        }
    };
    const int nw = std::min(cfg.workers, cfg.reps);
    if (nw <= 1) {
        work();
    } else {
        std::vector<std::thread> th;
        for (int w = 0; w < nw; ++w) th.emplace_back(work);
        for (auto& t : th) t.join();
    }
    if (err) std::rethrow_exception(err);

    CoverageReport r;
    r.reps = cfg.reps;
    r.alpha = cfg.alpha;
    r.mode = cfg.variance_mode;
    const LevyTriplet truth = sim_truth(cfg);
    r.truth = {truth.sigma2, truth.gamma, truth.lambda};
    if (cfg.track_mu) {
        r.mu_x = cfg.mu_points();
        for (double x : r.mu_x) r.mu_true.push_back(mu_density(x, truth));
    }
    const std::size_t nm = r.mu_x.size();
    std::vector<int> mu_hits(nm, 0);
    std::vector<double> mu_bias(nm, 0.0);
    std::array<double, 3> wsum{}, esum{};
    const double q = normal_quantile(1.0 - 0.5 * cfg.alpha);
    for (const auto& rec : recs) {
        if (rec.failed) {
            ++r.failures;
            continue;
        }
        for (int i = 0; i < 3; ++i) {
            r.hits[i] += rec.hit[i];
            wsum[i] += 2.0 * q * rec.sd[i];
            esum[i] += rec.est[i];
        }
        ++r.U_histogram[rec.U];
        for (std::size_t k = 0; k < nm; ++k) {
            mu_hits[k] += rec.mu_hit[k];
            mu_bias[k] += rec.mu_hat[k] - r.mu_true[k];
        }
    }
    if (double(r.failures) >= 0.02 * cfg.reps)
        throw Error(ErrorCode::ReplicationFailures,
                    std::to_string(r.failures) + " of " + std::to_string(cfg.reps) + " replications failed");
    const double ok = double(cfg.reps - r.failures);
    for (int i = 0; i < 3; ++i) {
        r.coverage[i] = r.hits[i] / ok;
        r.mean_width[i] = wsum[i] / ok;
        r.mean_estimate[i] = esum[i] / ok;
    }
    for (std::size_t k = 0; k < nm; ++k) {
        r.mu_coverage.push_back(mu_hits[k] / ok);
        r.mu_mean_bias.push_back(mu_bias[k] / ok);
    }
    r.records = std::move(recs);
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::array<double, 3> coverage_at(const CoverageReport& rep, double alpha) {
    const double q = normal_quantile(1.0 - 0.5 * alpha);
    std::array<double, 3> c{};
    int ok = 0;
    for (const auto& rec : rep.records) {
        if (rec.failed) continue;
        ++ok;
        for (int i = 0; i < 3; ++i) c[i] += std::abs(rec.est[i] - rep.truth[i]) <= q * rec.sd[i];
    }
    for (auto& v : c) v = ok ? v / ok : 0.0;
    return c;
}

double qq_correlation(std::vector<double> z) {
    const std::size_t n = z.size();
    if (n < 3) return 0.0;
    std::sort(z.begin(), z.end());
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = normal_quantile((i + 1 - 0.375) / (n + 0.25));
    double mz = 0, ms = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mz += z[i];
        ms += s[i];
    }
    mz /= n;
    ms /= n;
    double szz = 0, sss = 0, szs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        szz += (z[i] - mz) * (z[i] - mz);
        sss += (s[i] - ms) * (s[i] - ms);
        szs += (z[i] - mz) * (s[i] - ms);
    }
    return szs / std::sqrt(szz * sss);
}

StandardizedSample standardized_errors(const CoverageReport& rep, TargetKind target) {
    if (target == TargetKind::Mu) throw Error(ErrorCode::Config, "standardized_errors: use sigma2, gamma or lambda");
    const int i = target == TargetKind::Sigma2 ? 0 : target == TargetKind::Gamma ? 1 : 2;
    StandardizedSample out;
    out.target = target;
    for (const auto& rec : rep.records) {
        if (rec.failed) continue;
        if (!(rec.sd[i] > 0.0) || !std::isfinite(rec.sd[i]))
            throw Error(ErrorCode::NegativeVariance, "standardized_errors: non-finite predicted sd");
        out.z.push_back((rec.est[i] - rep.truth[i]) / rec.sd[i]);
    }
    const double n = double(out.z.size());
    if (n < 2) return out;
    for (double v : out.z) out.mean += v;
    out.mean /= n;
    for (double v : out.z) out.sd += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(out.sd / (n - 1));
    out.qq_corr = qq_correlation(out.z);
    return out;
}

StandardizedSample standardized_errors(const SimConfig& cfg, TargetKind target) {
    if (cfg.reps < 100) throw Error(ErrorCode::Config, "standardized_errors: needs reps >= 100");
    SimConfig c = cfg;
    c.track_mu = false;
    return standardized_errors(run_coverage(c), target);
}

}  // namespace levycal
