#include <doctest.h>

#include <cmath>
#include <cstring>

#include "levycal/errors.hpp"
#include "levycal/sim_harness.hpp"

using namespace levycal;

namespace {

SimConfig fast_config(int reps) {
    SimConfig c;
    c.reps = reps;
    c.seed = 42;
    c.calib.policy = CutoffPolicy::Fixed;
    c.calib.U = 15.0;
    c.finite.check_convergence = false;
    c.mu_grid = {-0.5, 0.0, 0.5};
    return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("sim_harness") {

TEST_CASE("counter generator is stateless and uniform") {
    const CounterRng a(1, 2, 3), b(1, 2, 3), c(1, 3, 3);
    CHECK(a.bits(17) == b.bits(17));
    CHECK(a.bits(17) != c.bits(17));
    double m = 0.0, v = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        const double u = a.uniform(k);
        CHECK_MESSAGE((u > 0.0 && u < 1.0), "uniform out of range");
        m += u;
        v += (u - 0.5) * (u - 0.5);
    }
    CHECK(m / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(v / n == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("same seed and replication give a bit-identical dataset") {
    SimConfig c;
    const MarketSlice x = gen_dataset(c, 5), y = gen_dataset(c, 5), z = gen_dataset(c, 6);
    REQUIRE(x.quotes.size() == 100);
    for (std::size_t i = 0; i < x.quotes.size(); ++i) {
        CHECK(same_bits(x.quotes[i].strike, y.quotes[i].strike));
        CHECK(same_bits(x.quotes[i].price, y.quotes[i].price));
    }
    CHECK(x.quotes[0].strike != z.quotes[0].strike);
}

TEST_CASE("moneyness draws have variance 1/2") {
    SimConfig c;
    c.n = 10000;
    c.pricing.check_convergence = false;
    const auto s = quotes_to_samples(gen_dataset(c, 0));
    double m = 0.0, v = 0.0;
    for (const auto& o : s) m += o.x;
    m /= s.size();
    for (const auto& o : s) v += (o.x - m) * (o.x - m);
    v /= (s.size() - 1);
    CHECK(v >= 0.45);
    CHECK(v <= 0.55);
}

TEST_CASE("quotes carry the relative noise level") {
    SimConfig c;
    c.rel_noise = 0.02;
    const MarketSlice sl = gen_dataset(c, 3);
    const auto s = quotes_to_samples(sl);
    std::vector<double> xs;
    for (const auto& o : s) xs.push_back(o.x);
    const auto O = option_curve(sim_truth(c), c.T, xs);
    double z2 = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(s[j].delta == doctest::Approx(0.02 * std::abs(O[j])).epsilon(1e-6));
        const double z = (s[j].O - O[j]) / s[j].delta;
        z2 += z * z;
    }
    CHECK(z2 / s.size() == doctest::Approx(1.0).epsilon(0.4));
}

TEST_CASE("fixed design reuses the strikes") {
    SimConfig c;
    c.fixed_design = true;
    const MarketSlice a = gen_dataset(c, 1), b = gen_dataset(c, 2);
    CHECK(a.quotes[7].strike == b.quotes[7].strike);
    CHECK(a.quotes[7].price != b.quotes[7].price);
}

TEST_CASE("one replication gives one record") {
    const CoverageReport r = run_coverage(fast_config(1));
    CHECK(r.reps == 1);
    CHECK(r.records.size() == 1);
    CHECK(r.records[0].mu_hat.size() == 3);
    for (double c : r.coverage) CHECK((c == 0.0 || c == 1.0));
}

TEST_CASE("coverage is monotone in the level") {
    const CoverageReport r = run_coverage(fast_config(12));
    const auto c90 = coverage_at(r, 0.10), c95 = coverage_at(r, 0.05), c99 = coverage_at(r, 0.01);
    for (int i = 0; i < 3; ++i) {
        CHECK(c95[i] == doctest::Approx(r.coverage[i]));
        CHECK(c99[i] >= c95[i]);
        CHECK(c95[i] >= c90[i]);
    }
    int hits = 0;
    for (const auto& rec : r.records) hits += rec.hit[1];
    CHECK(hits == r.hits[1]);
}

TEST_CASE("standardized errors and the QQ correlation") {
    std::vector<double> z;
    for (int k = 1; k <= 200; ++k) z.push_back(normal_quantile((k - 0.375) / 200.25));
    CHECK(qq_correlation(z) == doctest::Approx(1.0));
    CHECK_THROWS_AS(standardized_errors(fast_config(10), TargetKind::Gamma), Error);
}

TEST_CASE("invalid simulation settings") {
    SimConfig c;
    c.n = 2;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.rel_noise = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.reps = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

}
