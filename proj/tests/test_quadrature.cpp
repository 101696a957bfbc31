#include <doctest.h>

#include <cmath>

#include "levycal/quadrature.hpp"

using namespace levycal;

TEST_SUITE("quadrature") {

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {2, 5, 16, 64}) {
        const QuadRule& q = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += q.w[i] * std::pow(q.x[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("mapped rule integrates exp on [0, 3]") {
    const QuadRule q = gauss_legendre(32, 0.0, 3.0);
    double s = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * std::exp(q.x[i]);
    CHECK(s == doctest::Approx(std::exp(3.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("hat function transform is 2(1 - cos u)/u^2") {
    const std::vector<double> knots{-1.0, 0.0, 1.0}, vals{0.0, 1.0, 0.0};
    for (double u : {1e-8, 1e-3, 0.3, 0.49, 0.51, 1.0, 7.5, 40.0}) {
        const cplx f = pl_ft(knots, vals, u);
        const double h = std::sin(0.5 * u) / (0.5 * u);
        const double exact = h * h;
        CHECK(f.real() == doctest::Approx(exact).epsilon(1e-12));
        CHECK(std::abs(f.imag()) < 1e-13);
    }
}

TEST_CASE("segment transform is continuous across the series branch") {
    // theta = u (b - a) crosses the switch at 0.5
    for (double u : {0.4999999, 0.5000001}) {
        const cplx f = segment_ft(0.2, 1.2, 0.3, -0.7, u);
        // brute force with many Gauss nodes
        const QuadRule q = gauss_legendre(40, 0.2, 1.2);
        cplx s = 0.0;
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const double fx = 0.3 + (q.x[i] - 0.2) * (-1.0);
            s += q.w[i] * fx * std::exp(cplx(0.0, u * q.x[i]));
        }
        CHECK(std::abs(f - s) < 1e-14);
    }
}

TEST_CASE("cexpm1 keeps relative accuracy near zero") {
    const cplx z(1e-10, -2e-10);
    const cplx e = cexpm1(z);
    CHECK(std::abs(e - (z + 0.5 * z * z)) / std::abs(z) < 1e-15);
    const cplx big(0.7, 2.0);
    CHECK(std::abs(cexpm1(big) - (std::exp(big) - 1.0)) < 1e-14);
}

}
