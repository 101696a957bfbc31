#pragma once

#include <complex>
#include <variant>
#include <vector>

namespace levycal {

using cplx = std::complex<double>;

struct MertonParams {
    double sigma = 0.1;
    double lambda = 5.0;
    double eta = -0.1;
    double v = 0.2;

    void validate() const;
};

struct SmoothnessClassBounds {
    int s = 2;
    double R = 10.0;
    double sigma_max = 0.3;

    void validate() const;
};

struct NoJumps {};
struct MertonJumps {
    double eta = 0.0;
    double v = 1.0;
};
// Jump density nu tabulated on a grid, linear in between, zero outside.
struct TabulatedJumps {
    std::vector<double> x;
    std::vector<double> nu;
};
using JumpSpec = std::variant<NoJumps, MertonJumps, TabulatedJumps>;

struct LevyTriplet {
    double sigma2 = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    JumpSpec jump = NoJumps{};

    // gamma is derived from the martingale condition in every constructor below.
    static LevyTriplet black_scholes(double sigma);
    static LevyTriplet merton(const MertonParams& p);
    static LevyTriplet tabulated(double sigma2, std::vector<double> x, std::vector<double> nu);
};

double merton_gamma(const MertonParams& p);

// F mu(u) = int e^{iux} e^x nu(x) dx
cplx fmu(double u, const MertonParams& p);
cplx fmu(double u, const LevyTriplet& t);

// Exponentially weighted jump density mu(x) = e^x nu(x).
double mu_density(double x, const LevyTriplet& t);
double mu_density(double x, const MertonParams& p);

// psi(u) = -s2 u^2/2 + i(s2+g)u + (s2/2+g-l) + F mu(u);  phi_T(u-i) = exp(T psi(u)).
cplx psi_true(double u, const LevyTriplet& t);
cplx phi_shifted(double u, const LevyTriplet& t, double T);

// sigma^2/2 + gamma - lambda + int mu
double martingale_residual(const LevyTriplet& t);

}  // namespace levycal
