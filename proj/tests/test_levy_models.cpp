#include <doctest.h>

#include <cmath>

#include "levycal/errors.hpp"
#include "levycal/levy_models.hpp"
#include "levycal/quadrature.hpp"

using namespace levycal;

TEST_SUITE("levy_models") {

TEST_CASE("martingale drift of the reference Merton model") {
    const MertonParams p{0.1, 5.0, -0.1, 0.2};
    // gamma = lambda (1 - e^{eta + v^2/2}) - sigma^2/2 by hand
    const double g = 5.0 * (1.0 - std::exp(-0.1 + 0.02)) - 0.005;
    CHECK(merton_gamma(p) == doctest::Approx(g).epsilon(1e-14));
    CHECK(std::abs(merton_gamma(p) - 0.379) < 5e-4);
    CHECK(std::abs(martingale_residual(LevyTriplet::merton(p))) < 1e-13);
}

TEST_CASE("mu density integrates to F mu(0)") {
    const MertonParams p{0.1, 5.0, -0.1, 0.2};
    const QuadRule q = gauss_legendre(200, -3.0, 3.0);
    double s = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * mu_density(q.x[i], p);
    CHECK(s == doctest::Approx(fmu(0.0, p).real()).epsilon(1e-12));
    CHECK(std::abs(fmu(0.0, p).imag()) < 1e-15);
}

TEST_CASE("Merton transform against direct quadrature") {
    const MertonParams p{0.1, 3.0, 0.05, 0.15};
    const QuadRule q = gauss_legendre(300, -2.5, 2.5);
    for (double u : {0.0, 1.0, 6.0, 15.0}) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * mu_density(q.x[i], p) * std::exp(cplx(0.0, u * q.x[i]));
        CHECK(std::abs(s - fmu(u, p)) < 1e-11);
    }
}

TEST_CASE("tabulated jumps agree with the Merton triplet") {
    const MertonParams p{0.1, 5.0, -0.1, 0.2};
    std::vector<double> xs, nu;
    for (int k = 0; k <= 4000; ++k) {
        const double x = -2.0 + k * 0.001;
        xs.push_back(x);
        nu.push_back(mu_density(x, p) * std::exp(-x));
    }
    const LevyTriplet t = LevyTriplet::tabulated(0.01, xs, nu);
    const LevyTriplet m = LevyTriplet::merton(p);
    CHECK(t.lambda == doctest::Approx(m.lambda).epsilon(1e-6));
    CHECK(t.gamma == doctest::Approx(m.gamma).epsilon(1e-5));
    for (double u : {0.5, 3.0, 10.0}) CHECK(std::abs(psi_true(u, t) - psi_true(u, m)) < 1e-4);
}

TEST_CASE("Black-Scholes exponent is the Gaussian one") {
    const LevyTriplet t = LevyTriplet::black_scholes(0.2);
    CHECK(t.gamma == doctest::Approx(-0.02));
    for (double u : {0.3, 2.0}) {
        // phi_T(u - i) for X_T ~ N(-s2 T/2, s2 T)
        const cplx w(u, -1.0);
        const cplx ref = std::exp(cplx(0.0, 1.0) * w * (-0.02 * 0.5) - 0.5 * 0.04 * 0.5 * w * w);
        CHECK(std::abs(phi_shifted(u, t, 0.5) - ref) < 1e-14);
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(MertonParams({-0.1, 5.0, 0.0, 0.2}).validate(), Error);
    CHECK_THROWS_AS(MertonParams({0.1, -1.0, 0.0, 0.2}).validate(), Error);
    CHECK_THROWS_AS(SmoothnessClassBounds({0, 10.0, 0.3}).validate(), Error);
}

}
