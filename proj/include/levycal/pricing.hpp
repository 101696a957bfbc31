#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "levycal/levy_models.hpp"

namespace levycal {

using PsiFn = std::function<cplx(double)>;

enum class OptionKind { Call, Put };

struct OptionQuote {
    double strike = 0.0;
    double price = 0.0;
    OptionKind kind = OptionKind::Call;
    double noise_sd = 0.0;
};

struct MarketSlice {
    double S = 1.0;
    double r = 0.0;
    double T = 0.25;
    std::vector<OptionQuote> quotes;
};

struct ObservationSample {
    double x = 0.0;
    double O = 0.0;
    double delta = 0.0;
};

struct PricingConfig {
    double U_price = 200.0;
    int N_price = 2000;
    // volatility of the Black-Scholes control variate
    double sigma_ref = 0.2;
    double u_tol = 1e-4;
    bool check_convergence = true;
    double convergence_tol = 1e-7;
};

// FO(u) = (exp(T psi(u)) - 1) / (iu(1+iu)), with a Taylor branch for |u| < u_tol.
cplx fo_from_psi(double u, const PsiFn& psi, double T, double u_tol = 1e-4);

double normal_cdf(double x);

// Black-Scholes call price.
double bs_call(double S, double K, double r, double T, double sigma);
// Option function of Black-Scholes at log-forward moneyness x.
double bs_option_function(double x, double sigma, double T);

// O(x) = (1/2pi) int FO(u) e^{-iux} du on the x grid.
std::vector<double> option_curve(const PsiFn& psi, double T, const std::vector<double>& xs,
                                 const PricingConfig& cfg = {});
std::vector<double> option_curve(const LevyTriplet& t, double T, const std::vector<double>& xs,
                                 const PricingConfig& cfg = {});

double merton_call_series(const MertonParams& p, double S, double r, double T, double K);

std::vector<ObservationSample> quotes_to_samples(const MarketSlice& slice);

}  // namespace levycal
