#pragma once

#include <complex>
#include <vector>

namespace levycal {

using cplx = std::complex<double>;

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre rule on [-1, 1]. Rules are cached; the reference stays valid.
const QuadRule& gauss_legendre(int n);

// Same rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

// exp(z) - 1 without cancellation for small |z|.
cplx cexpm1(cplx z);

// Exact integral of the linear function through (a, fa), (b, fb) times e^{iux} over [a, b].
cplx segment_ft(double a, double b, double fa, double fb, double u);

// Exact Fourier transform  int f(x) e^{iux} dx  of the piecewise linear function
// through (knots[k], vals[k]), zero outside [knots.front(), knots.back()].
cplx pl_ft(const std::vector<double>& knots, const std::vector<double>& vals, double u);

}  // namespace levycal
