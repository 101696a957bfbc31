#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levycal/sim_harness.hpp"
#include "levycal/vol_tests.hpp"

namespace levycal {

struct MarketParams {
    double S = 1.0;
    double r = 0.06;
    double T = 0.25;
};

struct InferenceSettings {
    double alpha = 0.05;
    VarianceMode mode = VarianceMode::FiniteSample;
    FiniteSampleConfig finite{};
    double mu_min = -1.0;
    double mu_max = 1.0;
    int mu_n = 101;

    std::vector<double> mu_grid() const;
};

struct VolSettings {
    VolTestConfig test{};
    double grid_step = 0.0015;  // sigma grid for the confidence set
};

struct IoSettings {
    std::string quotes;
    std::string output;
    std::string trace;
    std::vector<double> strikes;
};

// Parsed run configuration; sections absent from the file keep their defaults.
struct RunConfig {
    std::optional<MertonParams> model;
    std::optional<MarketParams> market;
    CalibrationConfig calib{};
    InferenceSettings inference{};
    SimConfig sim{};
    VolSettings vol{};
    PricingConfig pricing{};
    IoSettings io{};

    // SimConfig with model, market, calibration, inference and pricing sections folded in.
    SimConfig sim_config() const;
};

// Strict parse: unknown keys, wrong types and out-of-range values raise ErrorCode::Config.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

}  // namespace levycal
