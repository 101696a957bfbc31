#include "levycal/levy_models.hpp"

#include <cmath>
#include <numbers>

#include "levycal/errors.hpp"
#include "levycal/quadrature.hpp"

namespace levycal {

void MertonParams::validate() const {
    if (!(v > 0.0)) throw Error(ErrorCode::Config, "merton: v must be > 0");
    if (!(lambda >= 0.0)) throw Error(ErrorCode::Config, "merton: lambda must be >= 0");
    if (!(sigma >= 0.0)) throw Error(ErrorCode::Config, "merton: sigma must be >= 0");
    if (!std::isfinite(eta)) throw Error(ErrorCode::Config, "merton: eta must be finite");
}

void SmoothnessClassBounds::validate() const {
    if (s < 1) throw Error(ErrorCode::Config, "bounds: s must be >= 1");
    if (!(R > 0.0)) throw Error(ErrorCode::Config, "bounds: R must be > 0");
    if (!(sigma_max >= 0.0)) throw Error(ErrorCode::Config, "bounds: sigma_max must be >= 0");
}

double merton_gamma(const MertonParams& p) {
    return p.lambda * (1.0 - std::exp(p.eta + 0.5 * p.v * p.v)) - 0.5 * p.sigma * p.sigma;
}

cplx fmu(double u, const MertonParams& p) {
    if (p.lambda == 0.0) return {0.0, 0.0};
    const cplx a(1.0, u);
    return p.lambda * std::exp(a * p.eta + 0.5 * a * a * p.v * p.v);
}

namespace {

// mu = e^x nu on the tabulation knots; linear interpolation of mu itself
double tab_mass(const TabulatedJumps& t, bool weighted) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.x.size(); ++k) {
        double f0 = t.nu[k], f1 = t.nu[k + 1];
        if (weighted) {
            f0 *= std::exp(t.x[k]);
            f1 *= std::exp(t.x[k + 1]);
        }
        s += 0.5 * (t.x[k + 1] - t.x[k]) * (f0 + f1);
    }
    return s;
}

std::vector<double> tab_mu_values(const TabulatedJumps& t) {
    std::vector<double> m(t.x.size());
    for (std::size_t k = 0; k < t.x.size(); ++k) m[k] = std::exp(t.x[k]) * t.nu[k];
    return m;
}

}  // namespace

LevyTriplet LevyTriplet::black_scholes(double sigma) {
    LevyTriplet t;
    t.sigma2 = sigma * sigma;
    t.gamma = -0.5 * t.sigma2;
    t.lambda = 0.0;
    t.jump = NoJumps{};
    return t;
}

LevyTriplet LevyTriplet::merton(const MertonParams& p) {
    p.validate();
    LevyTriplet t;
    t.sigma2 = p.sigma * p.sigma;
    t.gamma = merton_gamma(p);
    t.lambda = p.lambda;
    t.jump = MertonJumps{p.eta, p.v};
    return t;
}

LevyTriplet LevyTriplet::tabulated(double sigma2, std::vector<double> x, std::vector<double> nu) {
    if (x.size() != nu.size() || x.size() < 2) throw Error(ErrorCode::Config, "tabulated jumps: need >= 2 matching points");
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        if (!(x[k + 1] > x[k])) throw Error(ErrorCode::Config, "tabulated jumps: x must be increasing");
    for (double v : nu)
        if (!(v >= 0.0)) throw Error(ErrorCode::Config, "tabulated jumps: nu must be >= 0");
    if (!(sigma2 >= 0.0)) throw Error(ErrorCode::Config, "tabulated jumps: sigma2 must be >= 0");
    LevyTriplet t;
    TabulatedJumps tab{std::move(x), std::move(nu)};
    t.sigma2 = sigma2;
    t.lambda = tab_mass(tab, false);
    // martingale condition with int mu taken from the same piecewise-linear mu used by fmu
    const double int_mu = tab_mass(tab, true);
    t.gamma = t.lambda - int_mu - 0.5 * sigma2;
    t.jump = std::move(tab);
    return t;
}

cplx fmu(double u, const LevyTriplet& t) {
    if (std::holds_alternative<NoJumps>(t.jump)) return {0.0, 0.0};
    if (const auto* m = std::get_if<MertonJumps>(&t.jump)) {
        MertonParams p{0.0, t.lambda, m->eta, m->v};
        return fmu(u, p);
    }
    const auto& tab = std::get<TabulatedJumps>(t.jump);
    return pl_ft(tab.x, tab_mu_values(tab), u);
}

double mu_density(double x, const MertonParams& p) {
    const double z = (x - p.eta) / p.v;
    return std::exp(x) * p.lambda * std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * p.v);
}

double mu_density(double x, const LevyTriplet& t) {
    if (std::holds_alternative<NoJumps>(t.jump)) return 0.0;
    if (const auto* m = std::get_if<MertonJumps>(&t.jump)) return mu_density(x, MertonParams{0.0, t.lambda, m->eta, m->v});
    const auto& tab = std::get<TabulatedJumps>(t.jump);
    if (x <= tab.x.front() || x >= tab.x.back()) return 0.0;
    std::size_t k = 0;
    while (tab.x[k + 1] < x) ++k;
    const double a = std::exp(tab.x[k]) * tab.nu[k], b = std::exp(tab.x[k + 1]) * tab.nu[k + 1];
    const double th = (x - tab.x[k]) / (tab.x[k + 1] - tab.x[k]);
    return a + th * (b - a);
}

cplx psi_true(double u, const LevyTriplet& t) {
    const double s2 = t.sigma2;
    return cplx(-0.5 * s2 * u * u + (0.5 * s2 + t.gamma - t.lambda), (s2 + t.gamma) * u) + fmu(u, t);
}

cplx phi_shifted(double u, const LevyTriplet& t, double T) { return std::exp(T * psi_true(u, t)); }

double martingale_residual(const LevyTriplet& t) {
    return 0.5 * t.sigma2 + t.gamma - t.lambda + fmu(0.0, t).real();
}

}  // namespace levycal
