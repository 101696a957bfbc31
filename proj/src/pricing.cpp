#include "levycal/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levycal/errors.hpp"
#include "levycal/quadrature.hpp"

namespace levycal {

cplx fo_from_psi(double u, const PsiFn& psi, double T, double u_tol) {
    const cplx iu(0.0, u);
    if (std::abs(u) >= u_tol) return cexpm1(T * psi(u)) / (iu * (1.0 + iu));
    if (u == 0.0) {
        const double h = u_tol;
        const cplx dpsi = (psi(h) - psi(-h)) / (2.0 * h);
        return T * dpsi / cplx(0.0, 1.0);
    }
    const cplx a = T * psi(u);
    return (a + 0.5 * a * a) / (iu * (1.0 + iu));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bs_call(double S, double K, double r, double T, double sigma) {
    const double sd = sigma * std::sqrt(T);
    const double fwd = S * std::exp(r * T);
    if (sd <= 0.0) return std::exp(-r * T) * std::max(fwd - K, 0.0);
    const double d1 = (std::log(fwd / K) + 0.5 * sd * sd) / sd;
    return std::exp(-r * T) * (fwd * normal_cdf(d1) - K * normal_cdf(d1 - sd));
}

double bs_option_function(double x, double sigma, double T) {
    const double sd = sigma * std::sqrt(T);
    if (sd <= 0.0) return 0.0;
    const double d1 = (-x + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    // put for x < 0, call for x >= 0: both equal C/S - (1-e^x)^+
    if (x < 0.0) return std::exp(x) * normal_cdf(-d2) - normal_cdf(-d1);
    return normal_cdf(d1) - std::exp(x) * normal_cdf(d2);
}

namespace {

std::vector<double> option_curve_n(const PsiFn& psi, double T, const std::vector<double>& xs,
                                   const PricingConfig& cfg, int n) {
    const QuadRule q = gauss_legendre(n, 0.0, cfg.U_price);
    const double sref2 = cfg.sigma_ref * cfg.sigma_ref;
    std::vector<cplx> g(n);
    for (int k = 0; k < n; ++k) {
        const double u = q.x[k];
        const cplx iu(0.0, u);
        const cplx psi_ref(-0.5 * sref2 * u * u, 0.5 * sref2 * u);
        const cplx d = psi(u) - psi_ref;
        // phi - phi_ref = phi_ref * expm1(T (psi - psi_ref))
        g[k] = q.w[k] * std::exp(T * psi_ref) * cexpm1(T * d) / (iu * (1.0 + iu));
    }
    std::vector<double> out(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double x = xs[j];
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double ph = -q.x[k] * x;
            s += g[k].real() * std::cos(ph) - g[k].imag() * std::sin(ph);
        }
        out[j] = s / std::numbers::pi + bs_option_function(x, cfg.sigma_ref, T);
    }
    return out;
}

}  // namespace

std::vector<double> option_curve(const PsiFn& psi, double T, const std::vector<double>& xs,
                                 const PricingConfig& cfg) {
    for (double x : xs)
        if (!std::isfinite(x)) throw Error(ErrorCode::Config, "option_curve: non-finite x");
    if (cfg.N_price < 8 || !(cfg.U_price > 0.0)) throw Error(ErrorCode::Config, "option_curve: bad quadrature settings");
    std::vector<double> out = option_curve_n(psi, T, xs, cfg, cfg.N_price);
    if (cfg.check_convergence) {
        const std::vector<double> fine = option_curve_n(psi, T, xs, cfg, 2 * cfg.N_price);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (std::abs(fine[j] - out[j]) > cfg.convergence_tol) {
                std::ostringstream os;
                os << "doubling N_price changed O(" << xs[j] << ") by " << std::abs(fine[j] - out[j]);
                throw Error(ErrorCode::QuadratureNotConverged, os.str());
            }
        }
    }
    return out;
}

std::vector<double> option_curve(const LevyTriplet& t, double T, const std::vector<double>& xs,
                                 const PricingConfig& cfg) {
    return option_curve([&t](double u) { return psi_true(u, t); }, T, xs, cfg);
}

double merton_call_series(const MertonParams& p, double S, double r, double T, double K) {
    p.validate();
    if (!(K > 0.0)) throw Error(ErrorCode::NonPositiveStrike, "merton_call_series: K must be > 0");
    const double g = merton_gamma(p);
    const double fwd = S * std::exp(r * T);
    const double disc = std::exp(-r * T);
    const double lt = p.lambda * T;
    double sum = 0.0;
    double logp = -lt;  // log P(k jumps)
    for (int k = 0; k < 1000; ++k) {
        if (k > 0) logp += std::log(lt) - std::log(double(k));
        const double m = g * T + k * p.eta;
        const double s2 = p.sigma * p.sigma * T + k * p.v * p.v;
        double ck;
        if (s2 <= 0.0) {
            ck = std::max(fwd * std::exp(m) - K, 0.0);
        } else {
            const double s = std::sqrt(s2);
            const double d2 = (std::log(fwd / K) + m) / s;
            ck = fwd * std::exp(m + 0.5 * s2) * normal_cdf(d2 + s) - K * normal_cdf(d2);
        }
        const double term = (lt > 0.0 || k == 0) ? std::exp(logp) * ck : 0.0;
        sum += term;
        if (lt == 0.0) return disc * sum;
        if (k > lt && term < 1e-12 * sum) return disc * sum;
        if (k > lt && sum == 0.0 && std::exp(logp) < 1e-300) return 0.0;
    }
    throw Error(ErrorCode::SeriesNotConverged, "merton_call_series: 1000 terms reached");
}

std::vector<ObservationSample> quotes_to_samples(const MarketSlice& slice) {
    if (slice.quotes.empty()) throw Error(ErrorCode::TooFewSamples, "quotes_to_samples: no quotes");
    if (!(slice.S > 0.0) || !(slice.T > 0.0)) throw Error(ErrorCode::Config, "quotes_to_samples: S and T must be > 0");
    std::vector<ObservationSample> out;
    out.reserve(slice.quotes.size());
    for (const auto& q : slice.quotes) {
        if (!(q.strike > 0.0)) throw Error(ErrorCode::NonPositiveStrike, "strike must be > 0");
        ObservationSample o;
        o.x = std::log(q.strike / slice.S) - slice.r * slice.T;
        const double ex = std::exp(o.x);
        if (q.kind == OptionKind::Call)
            o.O = q.price / slice.S - std::max(1.0 - ex, 0.0);
        else
            o.O = q.price / slice.S - std::max(ex - 1.0, 0.0);
        o.delta = q.noise_sd / slice.S;
        out.push_back(o);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    for (std::size_t k = 0; k + 1 < out.size(); ++k)
        if (out[k + 1].x == out[k].x) throw Error(ErrorCode::DuplicateMoneyness, "two quotes share the same moneyness");
    return out;
}

}  // namespace levycal
