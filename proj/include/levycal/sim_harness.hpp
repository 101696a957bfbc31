#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "levycal/inference.hpp"

namespace levycal {

// Stateless generator: every draw is a hash of (seed, rep, stream, counter).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream) : seed_(seed), rep_(rep), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const;
    // uniform on (0, 1)
    double uniform(std::uint64_t counter) const;
    // standard normal from the counter pair (2k, 2k+1)
    double normal(std::uint64_t k) const;

private:
    std::uint64_t seed_, rep_, stream_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct SimConfig {
    MertonParams merton{};
    double S = 1.0;
    double r = 0.06;
    double T = 0.25;
    int n = 100;
    double moneyness_sd = 0.70710678118654752;  // variance 1/2
    double rel_noise = 0.01;
    int reps = 1000;
    std::uint64_t seed = 20240101;
    double alpha = 0.05;
    VarianceMode variance_mode = VarianceMode::FiniteSample;
    FiniteSampleConfig finite{};
    CalibrationConfig calib{};
    PricingConfig pricing{};
    std::vector<double> mu_grid;  // empty: 101 points on [-1, 1]
    bool track_mu = true;
    // reuse the moneyness design of replication 0 and redraw only the noise
    bool fixed_design = false;
    int workers = 1;

    void validate() const;
    std::vector<double> mu_points() const;
};

LevyTriplet sim_truth(const SimConfig& cfg);

// Merton call quotes for one replication.
MarketSlice gen_dataset(const SimConfig& cfg, int rep);

struct RepRecord {
    int rep = 0;
    bool failed = false;
    std::string failure;
    double U = 0.0;
    std::array<double, 3> est{};  // sigma2, gamma, lambda (raw)
    std::array<double, 3> sd{};
    std::array<bool, 3> hit{};
    int trim_count = 0;
    std::vector<double> mu_hat;
    std::vector<double> mu_sd;
    std::vector<bool> mu_hit;
};

struct CoverageReport {
    int reps = 0;
    int failures = 0;
    double alpha = 0.05;
    VarianceMode mode = VarianceMode::FiniteSample;
    std::array<double, 3> truth{};
    std::array<int, 3> hits{};
    std::array<double, 3> coverage{};
    std::array<double, 3> mean_width{};
    std::array<double, 3> mean_estimate{};
    std::map<double, int> U_histogram;
    std::vector<double> mu_x;
    std::vector<double> mu_true;
    std::vector<double> mu_coverage;
    std::vector<double> mu_mean_bias;
    double runtime_s = 0.0;
    std::vector<RepRecord> records;
};

RepRecord run_replication(const SimConfig& cfg, int rep);

// Replications run on cfg.workers threads; aggregation is in replication order.
CoverageReport run_coverage(const SimConfig& cfg);

// Coverage of the (sigma2, gamma, lambda) intervals rebuilt at another level from the same records.
std::array<double, 3> coverage_at(const CoverageReport& rep, double alpha);

struct StandardizedSample {
    TargetKind target = TargetKind::Gamma;
    std::vector<double> z;
    double mean = 0.0;
    double sd = 0.0;
    double qq_corr = 0.0;
};

StandardizedSample standardized_errors(const CoverageReport& rep, TargetKind target);
StandardizedSample standardized_errors(const SimConfig& cfg, TargetKind target);

// Pearson correlation of the sorted sample with Blom normal scores.
double qq_correlation(std::vector<double> z);

}  // namespace levycal
