#include "levycal/spectral_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "levycal/errors.hpp"
#include "levycal/quadrature.hpp"

namespace levycal {

// ---------------------------------------------------------------- weights

double WeightFamily::w_sigma(double u) const {
    const double au = std::abs(u);
    if (au > 1.0) return 0.0;
    return std::pow(au, s) * (a + b * u * u);
}

double WeightFamily::w_gamma(double u) const {
    const double au = std::abs(u);
    if (au > 1.0) return 0.0;
    const double v = c * std::pow(au, s + 1);
    return u < 0.0 ? -v : v;
}

double WeightFamily::w_lambda(double u) const {
    const double au = std::abs(u);
    if (au > 1.0) return 0.0;
    return std::pow(au, s) * (p + q * u * u);
}

double WeightFamily::w_mu(double u) const { return std::abs(u) <= 1.0 ? 1.0 : 0.0; }

double WeightFamily::w0(double u) const { return w_mu(u) + 0.5 * mu_m2 * w_sigma(u) - mu_m0 * w_lambda(u); }

WeightFamily build_weights(int s) {
    if (s < 1) throw Error(ErrorCode::Config, "build_weights: s must be >= 1");
    WeightFamily w;
    w.s = s;
    const double s1 = s + 1.0, s3 = s + 3.0, s5 = s + 5.0;
    // a/(s+3) + b/(s+5) = -1,  a/(s+1) + b/(s+3) = 0
    const double d1 = (1.0 / s3) * (1.0 / s3) - (1.0 / s5) * (1.0 / s1);
    // p/(s+1) + q/(s+3) = 1/2,  p/(s+3) + q/(s+5) = 0
    const double d2 = (1.0 / s1) * (1.0 / s5) - (1.0 / s3) * (1.0 / s3);
    if (d1 == 0.0 || d2 == 0.0) throw Error(ErrorCode::SingularMomentSystem, "weight moment system is singular");
    w.a = (-1.0 * (1.0 / s3) - 0.0) / d1;
    w.b = (0.0 - (1.0 / s1) * (-1.0)) / d1;
    w.p = (0.5 * (1.0 / s5) - 0.0) / d2;
    w.q = (0.0 - (1.0 / s3) * 0.5) / d2;
    w.c = 0.5 * s3;
    w.mu_m0 = 2.0;
    w.mu_m2 = 2.0 / 3.0;
    return w;
}

// ---------------------------------------------------------------- curve

namespace {

double intrinsic(double x) { return x < 0.0 ? 1.0 - std::exp(x) : 0.0; }

}  // namespace

InterpolatedCurve interpolate(const std::vector<ObservationSample>& samples, double pad, InterpMode mode) {
    if (samples.size() < 3) throw Error(ErrorCode::TooFewSamples, "interpolate: need at least 3 samples");
    if (!(pad >= 0.0)) throw Error(ErrorCode::Config, "interpolate: pad must be >= 0");
    std::vector<ObservationSample> s = samples;
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
        if (!(s[k + 1].x > s[k].x)) throw Error(ErrorCode::DuplicateMoneyness, "interpolate: duplicate x");
    InterpolatedCurve c;
    c.mode = mode;
    if (pad > 0.0) {
        c.knots.push_back(s.front().x - pad);
        c.values.push_back(0.0);
    }
    for (const auto& o : s) {
        c.knots.push_back(o.x);
        c.values.push_back(o.O);
    }
    if (pad > 0.0) {
        c.knots.push_back(s.back().x + pad);
        c.values.push_back(0.0);
    }
    if (mode == InterpMode::Kink) {
        for (std::size_t k = 0; k + 1 < c.knots.size(); ++k)
            if (c.knots[k] < 0.0 && c.knots[k + 1] > 0.0) c.kink_segment = int(k);
    }
    return c;
}

double InterpolatedCurve::value(double x) const {
    if (knots.empty() || x <= knots.front() || x >= knots.back()) {
        if (!knots.empty() && (x == knots.front() || x == knots.back())) return x == knots.front() ? values.front() : values.back();
        return 0.0;
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t k = std::size_t(it - knots.begin()) - 1;
    const double a = knots[k], b = knots[k + 1];
    const double th = (x - a) / (b - a);
    if (int(k) == kink_segment) {
        const double ca = values[k] + intrinsic(a), cb = values[k + 1] + intrinsic(b);
        return ca + th * (cb - ca) - intrinsic(x);
    }
    return values[k] + th * (values[k + 1] - values[k]);
}

cplx fourier_interp(const InterpolatedCurve& curve, double u) {
    cplx f = pl_ft(curve.knots, curve.values, u);
    if (curve.kink_segment >= 0) {
        const double a = curve.knots[curve.kink_segment], b = curve.knots[curve.kink_segment + 1];
        // linear interpolation of 1 - e^x over [a, b] minus (1 - e^x)^+ on [a, 0]
        const cplx lin = segment_ft(a, b, intrinsic(a), 0.0, u);
        const cplx one = segment_ft(a, 0.0, 1.0, 1.0, u);
        const cplx ez = -cexpm1(cplx(1.0, u) * a) / cplx(1.0, u);
        f += lin - (one - ez);
    }
    return f;
}

// ---------------------------------------------------------------- psi hat

double kappa_floor(double u, double T, double sigma_max, double R) {
    return std::min(0.5, 0.5 * std::exp(T * (-0.5 * sigma_max * sigma_max * u * u - 3.0 * R)));
}

ZFn curve_z(const InterpolatedCurve& curve) {
    return [&curve](double u) {
        const cplx iu(0.0, u);
        return 1.0 + iu * (1.0 + iu) * fourier_interp(curve, u);
    };
}

PsiHat psi_hat_from_z(const ZFn& z, double T, double U, const PsiHatConfig& cfg) {
    if (!(U > 0.0)) throw Error(ErrorCode::Config, "psi_hat: U must be > 0");
    if (cfg.N_quad < 1 || cfg.track_factor < 1) throw Error(ErrorCode::Config, "psi_hat: bad grid sizes");
    const QuadRule q = gauss_legendre(cfg.N_quad, 0.0, 1.0);
    PsiHat ph;
    ph.U = U;
    ph.T = T;
    ph.t = q.x;
    ph.wt = q.w;
    const int n = cfg.N_quad;
    ph.psi.assign(n, cplx(0.0, 0.0));
    ph.z.assign(n, cplx(1.0, 0.0));
    ph.trimmed.assign(n, false);

    // merged evaluation grid: uniform tracking nodes plus quadrature nodes
    const int m = cfg.track_factor * n;
    std::vector<std::pair<double, int>> grid;
    grid.reserve(m + n);
    for (int k = 1; k <= m; ++k) grid.emplace_back(U * double(k) / m, -1);
    for (int i = 0; i < n; ++i) grid.emplace_back(U * q.x[i], i);
    std::sort(grid.begin(), grid.end());

    cplx prev(1.0, 0.0);
    double phase = 0.0;
    for (const auto& [u, idx] : grid) {
        const cplx zu = z(u);
        double inc = 0.0;
        if (zu != cplx(0.0, 0.0) && prev != cplx(0.0, 0.0)) inc = std::arg(zu * std::conj(prev));
        if (std::abs(inc) >= cfg.phase_jump_limit) {
            std::ostringstream os;
            os << "phase increment " << inc << " at u=" << u << "; increase N_quad";
            throw Error(ErrorCode::PhaseJumpTooLarge, os.str());
        }
        ph.max_phase_jump = std::max(ph.max_phase_jump, std::abs(inc));
        phase += inc;
        if (zu != cplx(0.0, 0.0)) prev = zu;
        const double kap = kappa_floor(u, T, cfg.sigma_max, cfg.R);
        const double mod = std::abs(zu);
        const bool trim = mod < kap;
        if (trim) ++ph.trim_count;
        if (idx >= 0) {
            ph.z[idx] = zu;
            ph.trimmed[idx] = trim;
            ph.psi[idx] = cplx(std::log(trim ? kap : mod), phase) / T;
        }
    }
    return ph;
}

PsiHat psi_hat(const InterpolatedCurve& curve, double T, double U, const PsiHatConfig& cfg) {
    return psi_hat_from_z(curve_z(curve), T, U, cfg);
}

// ---------------------------------------------------------------- estimators

void CalibrationConfig::validate() const {
    bounds.validate();
    if (N_quad < 64) throw Error(ErrorCode::Config, "calibration: N_quad must be >= 64");
    if (track_factor < 1) throw Error(ErrorCode::Config, "calibration: track_factor must be >= 1");
    if (!(pad >= 0.0)) throw Error(ErrorCode::Config, "calibration: pad must be >= 0");
    if (policy == CutoffPolicy::Fixed && !(U > 0.0)) throw Error(ErrorCode::Config, "calibration: U must be > 0");
    if (policy == CutoffPolicy::Auto) {
        if (!(alpha > 1.0 && alpha < 0.5 * (bounds.s + 1)))
            throw Error(ErrorCode::Config, "calibration: alpha must lie in (1, (s+1)/2)");
        if (!(U_max > 0.0) || !(U_pilot > 0.0)) throw Error(ErrorCode::Config, "calibration: U_max and U_pilot must be > 0");
    }
    if (policy == CutoffPolicy::Oracle) {
        if (!(oracle_U_min > 0.0) || !(oracle_U_max >= oracle_U_min) || !(oracle_U_step > 0.0))
            throw Error(ErrorCode::Config, "calibration: bad oracle U range");
    }
    if (known_sigma2 && !(*known_sigma2 >= 0.0)) throw Error(ErrorCode::Config, "calibration: known_sigma2 must be >= 0");
    if (!(phase_jump_limit > 0.0)) throw Error(ErrorCode::Config, "calibration: phase_jump_limit must be > 0");
}

PsiHatConfig CalibrationConfig::psi_config() const {
    PsiHatConfig c;
    c.N_quad = N_quad;
    c.track_factor = track_factor;
    c.sigma_max = bounds.sigma_max;
    c.R = bounds.R;
    c.phase_jump_limit = phase_jump_limit;
    return c;
}

TripletEstimate clamp_estimate(TripletEstimate e, const SmoothnessClassBounds& b) {
    e.sigma2_c = std::clamp(e.sigma2, 0.0, b.sigma_max * b.sigma_max);
    e.gamma_c = std::clamp(e.gamma, -b.R, b.R);
    e.lambda_c = std::clamp(e.lambda, 0.0, b.R);
    return e;
}

TripletEstimate estimate_triplet(const PsiHat& ph, const WeightFamily& w, const CalibrationConfig& cfg) {
    const double U = ph.U;
    double ss = 0.0, sg = 0.0, sl = 0.0;
    for (std::size_t i = 0; i < ph.t.size(); ++i) {
        const double t = ph.t[i], wt = ph.wt[i];
        ss += wt * ph.psi[i].real() * w.w_sigma(t);
        sg += wt * ph.psi[i].imag() * w.w_gamma(t);
        sl += wt * ph.psi[i].real() * w.w_lambda(t);
    }
    TripletEstimate e;
    e.sigma2 = cfg.known_sigma2 ? *cfg.known_sigma2 : 2.0 * ss / (U * U);
    e.gamma = -e.sigma2 + 2.0 * sg / U;
    e.lambda = 0.5 * e.sigma2 + e.gamma - 2.0 * sl;
    return clamp_estimate(e, cfg.bounds);
}

std::vector<double> estimate_mu(const PsiHat& ph, const WeightFamily& w, const TripletEstimate& est,
                                const std::vector<double>& xs) {
    const double U = ph.U;
    const std::size_t n = ph.t.size();
    std::vector<cplx> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx um(U * ph.t[i], -1.0);  // u - i
        const cplx rem = ph.psi[i] + 0.5 * est.sigma2 * um * um - cplx(0.0, est.gamma) * um + est.lambda;
        g[i] = ph.wt[i] * w.w_mu(ph.t[i]) * rem;
    }
    std::vector<double> out(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ph_ = -U * ph.t[i] * xs[j];
            s += g[i].real() * std::cos(ph_) - g[i].imag() * std::sin(ph_);
        }
        out[j] = U * s / std::numbers::pi;
    }
    return out;
}

// ---------------------------------------------------------------- cut-off

double cutoff_auto(double eps, double sigma2, double T, int s, double alpha) {
    if (!(sigma2 > 0.0)) throw Error(ErrorCode::ZeroVolatilityNoRule, "cutoff_auto: sigma2 must be > 0; supply U directly");
    if (!(alpha > 1.0 && alpha < 0.5 * (s + 1))) throw Error(ErrorCode::Config, "cutoff_auto: alpha must lie in (1, (s+1)/2)");
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::EpsilonTooLarge, "cutoff_auto: eps must lie in (0, 1)");
    if (!(T > 0.0)) throw Error(ErrorCode::Config, "cutoff_auto: T must be > 0");
    const double li = std::log(1.0 / eps);
    const double arg = (1.0 / eps) / std::pow(li, alpha);
    if (!(arg > 1.0)) throw Error(ErrorCode::EpsilonTooLarge, "cutoff_auto: log argument <= 1");
    return std::sqrt(2.0 / (T * sigma2) * std::log(arg));
}

OracleResult oracle_cutoff(const LevyTriplet& truth, const InterpolatedCurve& curve, double T,
                           const WeightFamily& w, const CalibrationConfig& cfg) {
    OracleResult r;
    const double tv[3] = {truth.sigma2, truth.gamma, truth.lambda};
    const PsiHatConfig pc = cfg.psi_config();
    const ZFn z = curve_z(curve);
    double best = std::numeric_limits<double>::infinity();
    const int steps = int(std::floor((cfg.oracle_U_max - cfg.oracle_U_min) / cfg.oracle_U_step + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        const double U = cfg.oracle_U_min + k * cfg.oracle_U_step;
        const PsiHat ph = psi_hat_from_z(z, T, U, pc);
        const TripletEstimate e = estimate_triplet(ph, w, cfg);
        const double ev[3] = {e.sigma2, e.gamma, e.lambda};
        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double d = tv[i] != 0.0 ? (ev[i] - tv[i]) / tv[i] : ev[i];
            err += cfg.oracle_weights[i] * d * d;
        }
        r.Us.push_back(U);
        r.errors.push_back(err);
        if (err < best) {
            best = err;
            r.U = U;
        }
    }
    return r;
}

// ---------------------------------------------------------------- bias bounds

namespace {

struct WeightNorms {
    double sigma = 0.0, gamma = 0.0, lambda = 0.0, mu = 0.0;
};

// int |F h|(xi) dxi over |xi| <= xi_max for h supported on [lo, hi]
double truncated_l1(const std::function<double(double)>& h, double lo, double hi, int nodes) {
    const QuadRule q = gauss_legendre(nodes, lo, hi);
    const double xi_max = 200.0, dxi = 0.05;
    const int m = int(xi_max / dxi);
    std::vector<double> hv(nodes);
    for (int i = 0; i < nodes; ++i) hv[i] = q.w[i] * h(q.x[i]);
    double total = 0.0;
    for (int k = -m; k <= m; ++k) {
        const double xi = k * dxi;
        double re = 0.0, im = 0.0;
        for (int i = 0; i < nodes; ++i) {
            re += hv[i] * std::cos(xi * q.x[i]);
            im += hv[i] * std::sin(xi * q.x[i]);
        }
        const double f = std::hypot(re, im);
        total += (k == -m || k == m) ? 0.5 * f * dxi : f * dxi;
    }
    return total;
}

WeightNorms weight_norms(const WeightFamily& w) {
    static std::mutex mtx;
    static std::map<int, WeightNorms> cache;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(w.s);
        if (it != cache.end()) return it->second;
    }
    const int s = w.s;
    auto div = [s](double u, double v) {
        const double us = std::pow(u, s);
        return us == 0.0 ? 0.0 : v / us;
    };
    WeightNorms n;
    n.sigma = truncated_l1([&](double u) { return div(u, w.w_sigma(u)); }, -1.0, 1.0, 256);
    n.gamma = truncated_l1([&](double u) { return div(u, w.w_gamma(u)); }, -1.0, 1.0, 256);
    n.lambda = truncated_l1([&](double u) { return div(u, w.w_lambda(u)); }, -1.0, 1.0, 256);
    // (1 - w_mu)/u^s lives on |u| > 1; both tails summed via symmetry of |F|
    const double tail = truncated_l1([&](double u) { return std::pow(u, -s); }, 1.0, 40.0, 2048);
    n.mu = 2.0 * tail;
    std::lock_guard<std::mutex> lock(mtx);
    cache[s] = n;
    return n;
}

}  // namespace

BiasBounds bias_bounds(const WeightFamily& w, double U, double mu_s_sup) {
    const WeightNorms n = weight_norms(w);
    BiasBounds b;
    const int s = w.s;
    b.sigma2 = std::pow(U, -(s + 3)) * mu_s_sup * n.sigma;
    b.gamma = std::pow(U, -(s + 2)) * mu_s_sup * n.gamma;
    b.lambda = std::pow(U, -(s + 1)) * mu_s_sup * n.lambda;
    b.mu = mu_s_sup / (2.0 * std::numbers::pi * std::pow(U, s)) * n.mu;
    b.divergent = true;
    return b;
}

// ---------------------------------------------------------------- pipeline

CalibrationResult calibrate(const std::vector<ObservationSample>& samples, double T, const CalibrationConfig& cfg,
                            const std::vector<double>& mu_grid, std::optional<double> epsilon,
                            const LevyTriplet* truth) {
    cfg.validate();
    if (!(T > 0.0)) throw Error(ErrorCode::Config, "calibrate: T must be > 0");
    const WeightFamily w = build_weights(cfg.bounds.s);
    const InterpolatedCurve curve = interpolate(samples, cfg.pad, cfg.interp);
    const PsiHatConfig pc = cfg.psi_config();
    CalibrationResult res;
    double U = cfg.U;
    if (cfg.policy == CutoffPolicy::Oracle) {
        if (!truth) throw Error(ErrorCode::Config, "calibrate: oracle cut-off needs the true triplet");
        res.oracle = oracle_cutoff(*truth, curve, T, w, cfg);
        U = res.oracle->U;
    } else if (cfg.policy == CutoffPolicy::Auto) {
        if (!epsilon) throw Error(ErrorCode::Config, "calibrate: auto cut-off needs the noise scale epsilon");
        double s2;
        if (cfg.known_sigma2) {
            s2 = *cfg.known_sigma2;
        } else {
            const PsiHat pilot = psi_hat(curve, T, cfg.U_pilot, pc);
            s2 = estimate_triplet(pilot, w, cfg).sigma2_c;
        }
        U = s2 > 0.0 ? std::min(cutoff_auto(*epsilon, s2, T, cfg.bounds.s, cfg.alpha), cfg.U_max) : cfg.U_max;
    }
    res.U = U;
    res.psi = psi_hat(curve, T, U, pc);
    res.est = estimate_triplet(res.psi, w, cfg);
    res.mu_x = mu_grid;
    res.mu_hat = estimate_mu(res.psi, w, res.est, mu_grid);
    res.trim_count = res.psi.trim_count;
    res.max_phase_jump = res.psi.max_phase_jump;
    res.bias = bias_bounds(w, U, cfg.bounds.R);
    return res;
}

}  // namespace levycal
