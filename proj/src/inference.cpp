#include "levycal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "levycal/errors.hpp"
#include "levycal/quadrature.hpp"

namespace levycal {

// ---------------------------------------------------------------- quantiles

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw Error(ErrorCode::Config, "normal_quantile: p must lie in [0, 1]");
    }
    // Acklam's rational approximation followed by one Halley step
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(x) - p;
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double chi2_2_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Config, "chi2_2_quantile: alpha must lie in (0, 1)");
    return -2.0 * std::log(alpha);
}

// ---------------------------------------------------------------- noise

double NoiseModel::delta_at(double xv) const {
    if (x.empty()) return 0.0;
    if (xv <= x.front()) return delta.front();
    if (xv >= x.back()) return delta.back();
    const auto it = std::upper_bound(x.begin(), x.end(), xv);
    const std::size_t k = std::size_t(it - x.begin()) - 1;
    const double th = (xv - x[k]) / (x[k + 1] - x[k]);
    return delta[k] + th * (delta[k + 1] - delta[k]);
}

bool NoiseModel::inside(double xv) const { return !x.empty() && xv >= x.front() && xv <= x.back(); }

namespace {

std::vector<ObservationSample> sorted_samples(const std::vector<ObservationSample>& samples) {
    std::vector<ObservationSample> s = samples;
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    return s;
}

}  // namespace

NoiseModel noise_model_from_samples(const std::vector<ObservationSample>& samples, int n) {
    if (samples.size() < 3) throw Error(ErrorCode::TooFewSamples, "noise model: need at least 3 samples");
    const auto s = sorted_samples(samples);
    NoiseModel m;
    for (const auto& o : s) {
        m.x.push_back(o.x);
        m.delta.push_back(o.delta);
    }
    const int nn = n > 0 ? n : int(s.size());
    m.epsilon = (m.x.back() - m.x.front()) / std::sqrt(double(nn));
    double l2 = 0.0;
    for (std::size_t k = 0; k + 1 < m.x.size(); ++k)
        l2 += 0.5 * (m.x[k + 1] - m.x[k]) * (m.delta[k] * m.delta[k] + m.delta[k + 1] * m.delta[k + 1]);
    m.delta_l2 = std::sqrt(l2);
    return m;
}

cplx Intensity::transform(double t) const { return pl_ft(knots, rho, t); }

Intensity white_noise_intensity(const NoiseModel& noise) {
    Intensity r;
    r.knots = noise.x;
    r.rho.resize(noise.delta.size());
    const double e2 = noise.epsilon * noise.epsilon;
    for (std::size_t k = 0; k < noise.delta.size(); ++k) r.rho[k] = e2 * noise.delta[k] * noise.delta[k];
    return r;
}

Intensity design_intensity(const std::vector<ObservationSample>& samples, double pad) {
    if (samples.size() < 3) throw Error(ErrorCode::TooFewSamples, "design intensity: need at least 3 samples");
    const auto s = sorted_samples(samples);
    const std::size_t n = s.size();
    Intensity r;
    r.knots.resize(n);
    r.rho.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = j == 0 ? s[0].x - pad : s[j - 1].x;
        const double hi = j + 1 == n ? s[n - 1].x + pad : s[j + 1].x;
        r.knots[j] = s[j].x;
        r.rho[j] = s[j].delta * s[j].delta * 0.5 * (hi - lo);
    }
    return r;
}

const char* target_name(TargetKind k) {
    switch (k) {
    case TargetKind::Sigma2: return "sigma2";
    case TargetKind::Gamma: return "gamma";
    case TargetKind::Lambda: return "lambda";
    case TargetKind::Mu: return "mu";
    }
    return "?";
}

// ---------------------------------------------------------------- covariance engine

namespace {

cplx trimmed_z(cplx z, double u, double T, double sigma_max, double R) {
    const double kap = kappa_floor(u, T, sigma_max, R);
    const double m = std::abs(z);
    if (m >= kap) return z;
    if (m == 0.0) return cplx(kap, 0.0);
    return z * (kap / m);
}

}  // namespace

CovarianceEngine::CovarianceEngine(double U, double T, const ZFn& z, const Intensity& rho, int N_cov,
                                   double sigma_max, double R)
    : U_(U), n_(N_cov) {
    if (N_cov < 4) throw Error(ErrorCode::Config, "covariance: N_cov must be >= 4");
    const QuadRule q = gauss_legendre(N_cov, 0.0, 1.0);
    u_ = q.x;
    w_ = q.w;
    fac_.resize(n_);
    for (int k = 0; k < n_; ++k) {
        const double t = U * u_[k];
        const cplx it(0.0, t);
        fac_[k] = it * (1.0 + it) / (T * trimmed_z(z(t), t, T, sigma_max, R));
    }
    d_minus_.assign(std::size_t(n_) * n_, cplx(0.0, 0.0));
    d_plus_.assign(std::size_t(n_) * n_, cplx(0.0, 0.0));
    for (int k = 0; k < n_; ++k) {
        for (int l = k; l < n_; ++l) {
            const cplx dm = rho.transform(U * (u_[k] - u_[l]));
            const cplx dp = rho.transform(U * (u_[k] + u_[l]));
            d_minus_[std::size_t(k) * n_ + l] = dm;
            d_minus_[std::size_t(l) * n_ + k] = std::conj(dm);
            d_plus_[std::size_t(k) * n_ + l] = dp;
            d_plus_[std::size_t(l) * n_ + k] = dp;
        }
    }
}

std::vector<cplx> CovarianceEngine::kernel(const LinearFunctional& a) const {
    std::vector<cplx> k(n_);
    for (int i = 0; i < n_; ++i) k[i] = w_[i] * a.w(u_[i]) * fac_[i] * std::polar(1.0, -U_ * u_[i] * a.x);
    return k;
}

MomentPair CovarianceEngine::moments(const LinearFunctional& a, const LinearFunctional& b) const {
    const std::vector<cplx> ka = kernel(a), kb = kernel(b);
    MomentPair m{cplx(0.0, 0.0), cplx(0.0, 0.0)};
    for (int k = 0; k < n_; ++k) {
        if (ka[k] == cplx(0.0, 0.0)) continue;
        cplx sc(0.0, 0.0), sp(0.0, 0.0);
        const cplx* dm = &d_minus_[std::size_t(k) * n_];
        const cplx* dp = &d_plus_[std::size_t(k) * n_];
        for (int l = 0; l < n_; ++l) {
            sc += std::conj(kb[l]) * dm[l];
            sp += kb[l] * dp[l];
        }
        m.conj += ka[k] * sc;
        m.plain += ka[k] * sp;
    }
    return m;
}

ReImCov CovarianceEngine::reim(const LinearFunctional& a, const LinearFunctional& b) const {
    const MomentPair m = moments(a, b);
    ReImCov c;
    c.re_re = 0.5 * (m.conj.real() + m.plain.real());
    c.im_im = 0.5 * (m.conj.real() - m.plain.real());
    c.re_im = 0.5 * (m.plain.imag() - m.conj.imag());
    c.im_re = 0.5 * (m.plain.imag() + m.conj.imag());
    return c;
}

// ---------------------------------------------------------------- estimator bookkeeping

namespace {

// basis functionals: 0 = w_sigma, 1 = w_gamma, 2 = w_lambda, 3 = w_mu at x
LinearFunctional basis_functional(int kind, double x, const WeightFamily& w) {
    switch (kind) {
    case 0: return {[w](double u) { return w.w_sigma(u); }, 0.0};
    case 1: return {[w](double u) { return w.w_gamma(u); }, 0.0};
    case 2: return {[w](double u) { return w.w_lambda(u); }, 0.0};
    default: return {[w](double u) { return w.w_mu(u); }, x};
    }
}

struct BasisTerm {
    int kind;
    double x;
    bool imag;
    double coef;
};

void add_scaled(std::vector<BasisTerm>& dst, const std::vector<BasisTerm>& src, double f) {
    for (auto t : src) {
        t.coef *= f;
        dst.push_back(t);
    }
}

// deterministic kernels of the plug-in terms of mu_hat(x)
void mu_plugin_coefs(const WeightFamily& w, double U, double x, double& ks, double& kg, double& kl) {
    const QuadRule& q = gauss_legendre(256);
    ks = kg = kl = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        const double t = 0.5 * (q.x[i] + 1.0), wt = 0.5 * q.w[i];
        const cplx um(U * t, -1.0);
        const cplx e = std::polar(1.0, -U * t * x) * (wt * w.w_mu(t));
        ks += (0.5 * um * um * e).real();
        kg += (cplx(0.0, -1.0) * um * e).real();
        kl += e.real();
    }
    const double f = U / std::numbers::pi;
    ks *= f;
    kg *= f;
    kl *= f;
}

std::vector<BasisTerm> basis_terms(const Target& t, const WeightFamily& w, double U, bool known_sigma) {
    std::vector<BasisTerm> s2, g, l;
    if (!known_sigma) s2.push_back({0, 0.0, false, 2.0 / (U * U)});
    add_scaled(g, s2, -1.0);
    g.push_back({1, 0.0, true, 2.0 / U});
    add_scaled(l, s2, 0.5);
    add_scaled(l, g, 1.0);
    l.push_back({2, 0.0, false, -2.0});
    switch (t.kind) {
    case TargetKind::Sigma2: return s2;
    case TargetKind::Gamma: return g;
    case TargetKind::Lambda: return l;
    case TargetKind::Mu: {
        std::vector<BasisTerm> m;
        m.push_back({3, t.x, false, U / std::numbers::pi});
        double ks, kg, kl;
        mu_plugin_coefs(w, U, t.x, ks, kg, kl);
        add_scaled(m, s2, ks);
        add_scaled(m, g, kg);
        add_scaled(m, l, kl);
        return m;
    }
    }
    return {};
}

struct PartKey {
    int kind;
    double x;
    bool operator<(const PartKey& o) const { return kind != o.kind ? kind < o.kind : x < o.x; }
};

class TermCov {
public:
    TermCov(const CovarianceEngine& eng, const WeightFamily& w) : eng_(eng), w_(w) {}

    double operator()(const BasisTerm& a, const BasisTerm& b) {
        PartKey ka{a.kind, a.x}, kb{b.kind, b.x};
        bool swapped = false;
        if (kb < ka) {
            std::swap(ka, kb);
            swapped = true;
        }
        auto key = std::make_pair(ka, kb);
        auto it = memo_.find(key);
        if (it == memo_.end())
            it = memo_.emplace(key, eng_.reim(basis_functional(ka.kind, ka.x, w_), basis_functional(kb.kind, kb.x, w_))).first;
        const ReImCov& c = it->second;
        const bool ia = swapped ? b.imag : a.imag;
        const bool ib = swapped ? a.imag : b.imag;
        if (!ia && !ib) return c.re_re;
        if (ia && ib) return c.im_im;
        if (!ia && ib) return c.re_im;
        return c.im_re;
    }

private:
    const CovarianceEngine& eng_;
    const WeightFamily& w_;
    std::map<std::pair<PartKey, PartKey>, ReImCov> memo_;
};

double combo_cov(TermCov& tc, const std::vector<BasisTerm>& a, const std::vector<BasisTerm>& b, double* absmass) {
    double s = 0.0, m = 0.0;
    for (const auto& ta : a)
        for (const auto& tb : b) {
            const double v = ta.coef * tb.coef * tc(ta, tb);
            s += v;
            m += std::abs(v);
        }
    if (absmass) *absmass = m;
    return s;
}

}  // namespace

std::vector<Term> estimator_terms(const Target& t, const WeightFamily& w, double U, bool known_sigma) {
    std::vector<Term> out;
    for (const auto& b : basis_terms(t, w, U, known_sigma)) out.push_back({basis_functional(b.kind, b.x, w), b.imag, b.coef});
    return out;
}

double terms_covariance(const CovarianceEngine& eng, const std::vector<Term>& a, const std::vector<Term>& b) {
    double s = 0.0;
    for (const auto& ta : a)
        for (const auto& tb : b) {
            const ReImCov c = eng.reim(ta.f, tb.f);
            double v;
            if (!ta.imag && !tb.imag) v = c.re_re;
            else if (ta.imag && tb.imag) v = c.im_im;
            else if (!ta.imag) v = c.re_im;
            else v = c.im_re;
            s += ta.coef * tb.coef * v;
        }
    return s;
}

std::vector<std::vector<double>> linearized_cov_matrix(const std::vector<Target>& targets, const WeightFamily& w,
                                                       double U, double T, const ZFn& z, const Intensity& rho,
                                                       int N_cov, double sigma_max, double R, bool known_sigma) {
    const CovarianceEngine eng(U, T, z, rho, N_cov, sigma_max, R);
    TermCov tc(eng, w);
    std::vector<std::vector<BasisTerm>> terms;
    for (const auto& t : targets) terms.push_back(basis_terms(t, w, U, known_sigma));
    const std::size_t m = targets.size();
    std::vector<std::vector<double>> C(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) C[i][j] = C[j][i] = combo_cov(tc, terms[i], terms[j], nullptr);
    return C;
}

namespace {

std::vector<double> variances(const std::vector<Target>& targets, const WeightFamily& w, double U, double T,
                              const ZFn& z, const Intensity& rho, int N, double sigma_max, double R, bool known_sigma,
                              std::vector<double>& mass) {
    const CovarianceEngine eng(U, T, z, rho, N, sigma_max, R);
    TermCov tc(eng, w);
    std::vector<double> v(targets.size());
    mass.assign(targets.size(), 0.0);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto terms = basis_terms(targets[i], w, U, known_sigma);
        v[i] = combo_cov(tc, terms, terms, &mass[i]);
    }
    return v;
}

}  // namespace

std::vector<double> feasible_sd(const std::vector<Target>& targets, const WeightFamily& w, double U, double T,
                                const ZFn& z, const Intensity& rho, const FiniteSampleConfig& fc, double sigma_max,
                                double R, bool known_sigma) {
    std::vector<double> mass;
    int N = fc.N_cov;
    std::vector<double> var = variances(targets, w, U, T, z, rho, N, sigma_max, R, known_sigma, mass);
    auto negative = [&](const std::vector<double>& v, const std::vector<double>& ms) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] < -1e-10 * ms[i]) return true;
        return false;
    };
    if (negative(var, mass)) {
        N *= 2;
        var = variances(targets, w, U, T, z, rho, N, sigma_max, R, known_sigma, mass);
        if (negative(var, mass)) throw Error(ErrorCode::NegativeVariance, "linearised variance is negative");
    }
    std::vector<double> sd(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) sd[i] = std::sqrt(std::max(var[i], 0.0));
    if (fc.check_convergence) {
        std::vector<double> m2;
        const std::vector<double> v2 = variances(targets, w, U, T, z, rho, 2 * N, sigma_max, R, known_sigma, m2);
        for (std::size_t i = 0; i < var.size(); ++i) {
            const double s2 = std::sqrt(std::max(v2[i], 0.0));
            const double ref = std::max(s2, 1e-300);
            if (std::abs(s2 - sd[i]) > fc.convergence_tol * ref) {
                std::ostringstream os;
                os << "sd of " << target_name(targets[i].kind) << " changed from " << sd[i] << " to " << s2
                   << " when doubling N_cov";
                throw Error(ErrorCode::CovarianceNotConverged, os.str());
            }
        }
    }
    return sd;
}

std::vector<double> discrete_linear_sd(const std::vector<Target>& targets, const WeightFamily& w, double U, double T,
                                       const ZFn& z, const InterpolatedCurve& curve,
                                       const std::vector<ObservationSample>& samples, int N_quad, bool known_sigma,
                                       double sigma_max, double R) {
    const auto s = sorted_samples(samples);
    const std::size_t n = s.size();
    const QuadRule q = gauss_legendre(N_quad, 0.0, 1.0);
    const int N = N_quad;
    // data knot j sits at curve knot j + off
    const std::size_t off = curve.knots.size() == n ? 0 : 1;
    std::vector<cplx> fac(N);
    for (int i = 0; i < N; ++i) {
        const double t = U * q.x[i];
        const cplx it(0.0, t);
        fac[i] = q.w[i] * it * (1.0 + it) / (T * trimmed_z(z(t), t, T, sigma_max, R));
    }
    std::vector<std::vector<BasisTerm>> terms;
    for (const auto& t : targets) terms.push_back(basis_terms(t, w, U, known_sigma));
    std::vector<double> var(targets.size(), 0.0);
    std::map<PartKey, std::vector<cplx>> kern;
    for (const auto& ts : terms)
        for (const auto& b : ts) {
            PartKey k{b.kind, b.x};
            if (kern.count(k)) continue;
            const LinearFunctional f = basis_functional(b.kind, b.x, w);
            std::vector<cplx> kv(N);
            for (int i = 0; i < N; ++i) kv[i] = fac[i] * f.w(q.x[i]) * std::polar(1.0, -U * q.x[i] * b.x);
            kern.emplace(k, std::move(kv));
        }
    std::vector<cplx> h(N);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = j + off;
        for (int i = 0; i < N; ++i) {
            const double t = U * q.x[i];
            cplx v(0.0, 0.0);
            if (k > 0) v += segment_ft(curve.knots[k - 1], curve.knots[k], 0.0, 1.0, t);
            if (k + 1 < curve.knots.size()) v += segment_ft(curve.knots[k], curve.knots[k + 1], 1.0, 0.0, t);
            h[i] = v * s[j].delta;
        }
        std::map<PartKey, cplx> A;
        for (const auto& [key, kv] : kern) {
            cplx a(0.0, 0.0);
            for (int i = 0; i < N; ++i) a += kv[i] * h[i];
            A.emplace(key, a);
        }
        for (std::size_t ti = 0; ti < terms.size(); ++ti) {
            double d = 0.0;
            for (const auto& b : terms[ti]) {
                const cplx a = A.at(PartKey{b.kind, b.x});
                d += b.coef * (b.imag ? a.imag() : a.real());
            }
            var[ti] += d * d;
        }
    }
    std::vector<double> sd(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) sd[i] = std::sqrt(var[i]);
    return sd;
}

// ---------------------------------------------------------------- context

ZFn InferenceContext::z() const { return curve_z(curve); }

double InferenceContext::mu_hat(double x) const { return estimate_mu(psi, weights, est, {x})[0]; }

InferenceContext make_context(const std::vector<ObservationSample>& samples, double T, const CalibrationResult& res,
                              const CalibrationConfig& cfg) {
    InferenceContext c;
    c.samples = sorted_samples(samples);
    c.curve = interpolate(c.samples, cfg.pad, cfg.interp);
    c.T = T;
    c.U = res.U;
    c.weights = build_weights(cfg.bounds.s);
    c.est = res.est;
    c.psi = res.psi;
    c.noise = noise_model_from_samples(c.samples);
    c.cfg = cfg;
    return c;
}

// ---------------------------------------------------------------- asymptotic scales

namespace {

double u4_norm(const std::function<double(double)>& f) {
    const QuadRule q = gauss_legendre(64, 0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        const double u = q.x[i], v = f(u);
        s += q.w[i] * u * u * u * u * v * v;
    }
    return std::sqrt(s);
}

}  // namespace

double asym_sd(Regime regime, const Target& target, const TripletEstimate& est, const NoiseModel& noise,
               const WeightFamily& w, double U, double T, double sigma2) {
    const double g = est.gamma_c, l = est.lambda_c, eps = noise.epsilon;
    const double twopi = 2.0 * std::numbers::pi;
    if (regime == Regime::ZeroVol) {
        auto shat = [&](double x) { return 2.0 * std::sqrt(std::numbers::pi) * noise.delta_at(x + T * g) * std::exp(T * (l - g)) / T; };
        switch (target.kind) {
        case TargetKind::Sigma2:
            return shat(0.0) * u4_norm([&](double u) { return w.w_sigma(u); }) * eps / std::sqrt(U);
        case TargetKind::Gamma:
            return shat(0.0) * u4_norm([&](double u) { return w.w_gamma(u); }) * eps * std::sqrt(U);
        case TargetKind::Lambda:
            return shat(0.0) * u4_norm([&](double u) { return w.w_lambda(u); }) * eps * std::pow(U, 1.5);
        case TargetKind::Mu:
            if (target.x == 0.0)
                return shat(0.0) * u4_norm([&](double u) { return w.w0(u); }) / twopi * eps * std::pow(U, 2.5);
            return shat(target.x) * u4_norm([&](double u) { return w.w_mu(u); }) / twopi * eps * std::pow(U, 2.5);
        }
        return 0.0;
    }
    if (!(sigma2 > 0.0)) throw Error(ErrorCode::ZeroVolatilityNoRule, "asym_sd: positive-volatility regime needs sigma2 > 0");
    const double base = std::numbers::sqrt2 * noise.delta_l2 / (std::exp(T * (0.5 * sigma2 + g - l)) * T * T * sigma2);
    const double growth = eps * std::exp(0.5 * T * sigma2 * U * U);
    double endpoint = 0.0, rate = 1.0;
    switch (target.kind) {
    case TargetKind::Sigma2: endpoint = w.w_sigma(1.0); rate = 1.0 / (U * U); break;
    case TargetKind::Gamma: endpoint = w.w_gamma(1.0); rate = 1.0 / U; break;
    case TargetKind::Lambda: endpoint = w.w_lambda(1.0); rate = 1.0; break;
    case TargetKind::Mu:
        endpoint = (target.x == 0.0 ? w.w0(1.0) : w.w_mu(1.0)) / twopi;
        rate = U;
        break;
    }
    if (endpoint == 0.0) throw Error(ErrorCode::ZeroEndpointWeight, "asym_sd: weight vanishes at 1");
    return base * std::abs(endpoint) * growth * rate;
}

Regime infer_regime(const InferenceContext& ctx) {
    const double s2 = ctx.cfg.known_sigma2 ? *ctx.cfg.known_sigma2 : ctx.est.sigma2_c;
    return s2 > 0.0 ? Regime::PositiveVol : Regime::ZeroVol;
}

std::vector<double> target_sds(const InferenceContext& ctx, const std::vector<Target>& targets, Regime regime,
                               VarianceMode mode, const FiniteSampleConfig& fc) {
    if (mode == VarianceMode::Asymptotic) {
        const double s2 = ctx.cfg.known_sigma2 ? *ctx.cfg.known_sigma2 : ctx.est.sigma2_c;
        std::vector<double> out;
        for (const auto& t : targets) out.push_back(asym_sd(regime, t, ctx.est, ctx.noise, ctx.weights, ctx.U, ctx.T, s2));
        return out;
    }
    const Intensity rho = fc.intensity == IntensityKind::Design ? design_intensity(ctx.samples, ctx.cfg.pad)
                                                                 : white_noise_intensity(ctx.noise);
    return feasible_sd(targets, ctx.weights, ctx.U, ctx.T, ctx.z(), rho, fc, ctx.cfg.bounds.sigma_max,
                       ctx.cfg.bounds.R, ctx.known_sigma());
}

std::vector<ConfidenceInterval> conf_intervals(const InferenceContext& ctx, const std::vector<Target>& targets,
                                               double alpha, Regime regime, VarianceMode mode,
                                               const FiniteSampleConfig& fc) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Config, "conf_intervals: alpha must lie in (0, 1)");
    const double q = normal_quantile(1.0 - 0.5 * alpha);
    const std::vector<double> sd = target_sds(ctx, targets, regime, mode, fc);
    std::vector<ConfidenceInterval> out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ConfidenceInterval ci;
        ci.target = targets[i];
        switch (targets[i].kind) {
        case TargetKind::Sigma2: ci.estimate = ctx.est.sigma2; break;
        case TargetKind::Gamma: ci.estimate = ctx.est.gamma; break;
        case TargetKind::Lambda: ci.estimate = ctx.est.lambda; break;
        case TargetKind::Mu: ci.estimate = ctx.mu_hat(targets[i].x); break;
        }
        ci.sd = sd[i];
        ci.lo = ci.estimate - q * sd[i];
        ci.hi = ci.estimate + q * sd[i];
        ci.level = 1.0 - alpha;
        ci.mode = mode;
        ci.U = ctx.U;
        out.push_back(ci);
    }
    return out;
}

// ---------------------------------------------------------------- joint sets

bool ConfidenceEllipse::contains(double g, double l) const {
    const double d0 = g - center[0], d1 = l - center[1];
    const double det = L[0][0] * L[1][1] - L[0][1] * L[1][0];
    if (det == 0.0) return d0 == 0.0 && d1 == 0.0;
    const double y0 = (L[1][1] * d0 - L[0][1] * d1) / det;
    const double y1 = (-L[1][0] * d0 + L[0][0] * d1) / det;
    return y0 * y0 + y1 * y1 <= k_alpha;
}

ConfidenceEllipse joint_ellipse_gamma_lambda(const InferenceContext& ctx, double alpha, Regime regime,
                                             VarianceMode mode, const FiniteSampleConfig& fc) {
    ConfidenceEllipse e;
    e.center = {ctx.est.gamma, ctx.est.lambda};
    e.k_alpha = chi2_2_quantile(alpha);
    const std::vector<Target> tg{{TargetKind::Gamma, 0.0}, {TargetKind::Lambda, 0.0}};
    if (mode == VarianceMode::Asymptotic) {
        const auto sd = target_sds(ctx, tg, regime, mode, fc);
        e.L = {{{sd[0], 0.0}, {0.0, sd[1]}}};
        return e;
    }
    const Intensity rho = fc.intensity == IntensityKind::Design ? design_intensity(ctx.samples, ctx.cfg.pad)
                                                                 : white_noise_intensity(ctx.noise);
    const auto C = linearized_cov_matrix(tg, ctx.weights, ctx.U, ctx.T, ctx.z(), rho, fc.N_cov,
                                         ctx.cfg.bounds.sigma_max, ctx.cfg.bounds.R, ctx.known_sigma());
    const double l00 = std::sqrt(std::max(C[0][0], 0.0));
    const double l10 = l00 > 0.0 ? C[1][0] / l00 : 0.0;
    const double l11 = std::sqrt(std::max(C[1][1] - l10 * l10, 0.0));
    e.L = {{{l00, 0.0}, {l10, l11}}};
    return e;
}

bool MuPairSet::contains(double m1, double m2) const {
    const double d0 = m1 - center[0], d1 = m2 - center[1];
    const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    const double y0 = (M[1][1] * d0 - M[0][1] * d1) / det;
    const double y1 = (-M[1][0] * d0 + M[0][0] * d1) / det;
    return y0 * y0 + y1 * y1 <= radius * radius;
}

MuPairSet joint_set_mu_pair(const InferenceContext& ctx, double x1, double x2, double alpha, double c_floor) {
    if (x1 == x2 || x1 == 0.0 || x2 == 0.0) throw Error(ErrorCode::Config, "mu pair: need distinct nonzero x1, x2");
    const double U = ctx.U;
    const double det = std::sin(U * (x2 - x1));
    if (std::abs(det) < c_floor) {
        std::ostringstream os;
        os << "|sin(U(x2-x1))| = " << std::abs(det) << " < " << c_floor << "; perturb U";
        throw Error(ErrorCode::DeterminantTooSmall, os.str());
    }
    const double s2 = ctx.cfg.known_sigma2 ? *ctx.cfg.known_sigma2 : ctx.est.sigma2_c;
    if (!(s2 > 0.0)) throw Error(ErrorCode::ZeroVolatilityNoRule, "mu pair set requires positive volatility");
    MuPairSet m;
    m.x = {x1, x2};
    m.center = {ctx.mu_hat(x1), ctx.mu_hat(x2)};
    m.M = {{{std::cos(U * x1), std::sin(U * x1)}, {std::cos(U * x2), std::sin(U * x2)}}};
    // s_mu eps U e^{T s2 U^2/2}
    const double sd = asym_sd(Regime::PositiveVol, Target{TargetKind::Mu, x1}, ctx.est, ctx.noise, ctx.weights, U, ctx.T, s2);
    m.radius = sd * std::sqrt(chi2_2_quantile(alpha));
    return m;
}

}  // namespace levycal
