#pragma once

#include <array>
#include <vector>

#include "levycal/inference.hpp"

namespace levycal {

struct VolTestConfig {
    double alpha_cut = 1.2;  // cut-off exponent for U(sigma0)
    double alpha_bar = 1.45;  // exponent for the second cut-off U_bar
    double sigma_bar_factor = 1.05;  // sigma_bar = factor * sigma_max
    double U_max = 50.0;
    // sigma0 = 0 uses U = eps^{-beta0}; 0 picks the midpoint of (2/(2s+5), 2/5)
    double beta0 = 0.0;

    void validate(int s) const;
};

enum class StatKind { S, STilde, S0 };

const char* stat_name(StatKind k);

// Data shared by every sigma0 on one dataset, including the U_bar estimate.
struct VolData {
    std::vector<ObservationSample> samples;
    InterpolatedCurve curve;
    double T = 0.25;
    NoiseModel noise;
    WeightFamily weights;
    CalibrationConfig cfg;
    VolTestConfig vcfg;
    double sigma_bar = 0.0;
    double U_bar = 0.0;
    double sigma2_tilde = 0.0;
};

VolData make_vol_data(const std::vector<ObservationSample>& samples, double T, const CalibrationConfig& cfg,
                      const VolTestConfig& vcfg = {});

struct VolStats {
    double sigma0 = 0.0;
    double U = 0.0;
    double U_bar = 0.0;
    double S = 0.0;
    double S_tilde = 0.0;
    double S0 = 0.0;
    double d_hat = 0.0;
    double sigma2_hat = 0.0;  // clamped, at U
    double sigma2_tilde = 0.0;  // clamped, at U_bar
    double divergence_ratio = 0.0;
    TripletEstimate est;
};

VolStats vol_stat(double sigma0, const VolData& data);

struct VolTestResult {
    double sigma0 = 0.0;
    StatKind kind = StatKind::STilde;
    double value = 0.0;
    double threshold = 0.0;
    bool reject = false;
    double U = 0.0;
    double U_bar = 0.0;
    double alpha = 0.05;
};

VolTestResult vol_test(double sigma0, double alpha, const VolStats& stats, double sigma_max);

struct VolConfSet {
    double alpha = 0.05;
    std::vector<double> grid;
    std::vector<bool> accepted;
    std::vector<std::array<double, 2>> intervals;
    bool is_interval = true;

    bool contains(double sigma) const;
};

std::vector<double> sigma_grid(double sigma_max, double step);

VolConfSet vol_conf_set(double alpha, const std::vector<double>& grid, const VolData& data);

}  // namespace levycal
