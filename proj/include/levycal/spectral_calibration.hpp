#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "levycal/levy_models.hpp"
#include "levycal/pricing.hpp"

namespace levycal {

// Polynomial weights on [-1, 1]:
//   w_sigma(u) = |u|^s (a + b u^2),  w_gamma(u) = c sign(u)|u|^{s+1},
//   w_lambda(u) = |u|^s (p + q u^2), w_mu(u) = 1,
//   w0 = w_mu + w_sigma int(v^2 w_mu)/2 - w_lambda int(w_mu).
struct WeightFamily {
    int s = 2;
    double a = 0.0, b = 0.0, c = 0.0, p = 0.0, q = 0.0;
    double mu_m0 = 2.0;  // int_{-1}^{1} w_mu
    double mu_m2 = 2.0 / 3.0;  // int_{-1}^{1} v^2 w_mu

    double w_sigma(double u) const;
    double w_gamma(double u) const;
    double w_lambda(double u) const;
    double w_mu(double u) const;
    double w0(double u) const;
};

WeightFamily build_weights(int s);

enum class InterpMode { Linear, Kink };

struct InterpolatedCurve {
    std::vector<double> knots;
    std::vector<double> values;
    InterpMode mode = InterpMode::Kink;
    // index k with knots[k] < 0 < knots[k+1] where call prices are interpolated, or -1
    int kink_segment = -1;

    double value(double x) const;
};

InterpolatedCurve interpolate(const std::vector<ObservationSample>& samples, double pad = 0.5,
                              InterpMode mode = InterpMode::Kink);

// Exact FT  int O_eps(x) e^{iux} dx  of the interpolated curve.
cplx fourier_interp(const InterpolatedCurve& curve, double u);

// kappa(u) = min(1/2, exp(T(-sigma_max^2 u^2/2 - 3R))/2)
double kappa_floor(double u, double T, double sigma_max, double R);

struct PsiHatConfig {
    int N_quad = 256;
    int track_factor = 4;
    double sigma_max = 0.3;
    double R = 10.0;
    double phase_jump_limit = 3.141592653589793;
};

struct PsiHat {
    double U = 0.0;
    double T = 0.0;
    std::vector<double> t;  // Gauss-Legendre nodes on [0, 1]
    std::vector<double> wt;  // matching weights
    std::vector<cplx> psi;  // psi_eps(U t)
    std::vector<cplx> z;  // untrimmed z(U t)
    std::vector<bool> trimmed;
    int trim_count = 0;  // over tracking and quadrature nodes
    double max_phase_jump = 0.0;
};

using ZFn = std::function<cplx(double)>;

// Trimmed log of z on [0, U]; z is any provider with z(0) = 1.
PsiHat psi_hat_from_z(const ZFn& z, double T, double U, const PsiHatConfig& cfg);
// z(u) = 1 + iu(1+iu) FO_eps(u) from the interpolated curve.
PsiHat psi_hat(const InterpolatedCurve& curve, double T, double U, const PsiHatConfig& cfg);
ZFn curve_z(const InterpolatedCurve& curve);

struct TripletEstimate {
    double sigma2 = 0.0, gamma = 0.0, lambda = 0.0;  // raw
    double sigma2_c = 0.0, gamma_c = 0.0, lambda_c = 0.0;  // clamped to the class boxes
};

enum class CutoffPolicy { Fixed, Auto, Oracle };

struct CalibrationConfig {
    SmoothnessClassBounds bounds{};
    CutoffPolicy policy = CutoffPolicy::Oracle;
    double U = 20.0;  // fixed policy
    double alpha = 1.2;  // auto policy
    double U_max = 50.0;  // cap for the auto policy
    double U_pilot = 10.0;  // pilot cut-off for sigma2 in the auto policy
    double oracle_U_min = 1.0;
    double oracle_U_max = 30.0;
    double oracle_U_step = 1.0;
    std::array<double, 3> oracle_weights{1.0, 1.0, 1.0};
    int N_quad = 256;
    int track_factor = 4;
    double pad = 0.5;
    InterpMode interp = InterpMode::Kink;
    std::optional<double> known_sigma2;
    double phase_jump_limit = 3.141592653589793;

    void validate() const;
    PsiHatConfig psi_config() const;
};

TripletEstimate clamp_estimate(TripletEstimate e, const SmoothnessClassBounds& b);

TripletEstimate estimate_triplet(const PsiHat& ph, const WeightFamily& w, const CalibrationConfig& cfg);

std::vector<double> estimate_mu(const PsiHat& ph, const WeightFamily& w, const TripletEstimate& est,
                                const std::vector<double>& xs);

// U = sqrt(2/(T sigma2) log(eps^{-1} / log(eps^{-1})^alpha))
double cutoff_auto(double eps, double sigma2, double T, int s, double alpha);

struct OracleResult {
    double U = 0.0;
    std::vector<double> Us;
    std::vector<double> errors;
};

OracleResult oracle_cutoff(const LevyTriplet& truth, const InterpolatedCurve& curve, double T,
                           const WeightFamily& w, const CalibrationConfig& cfg);

struct BiasBounds {
    double sigma2 = 0.0, gamma = 0.0, lambda = 0.0, mu = 0.0;
    bool divergent = true;  // the L1 norms are truncated and grow with the truncation
};

BiasBounds bias_bounds(const WeightFamily& w, double U, double mu_s_sup);

struct CalibrationResult {
    TripletEstimate est;
    double U = 0.0;
    std::vector<double> mu_x;
    std::vector<double> mu_hat;
    int trim_count = 0;
    double max_phase_jump = 0.0;
    BiasBounds bias;
    std::optional<OracleResult> oracle;
    PsiHat psi;
};

// Full pipeline on samples. epsilon is needed by the auto policy, truth by the oracle policy.
CalibrationResult calibrate(const std::vector<ObservationSample>& samples, double T, const CalibrationConfig& cfg,
                            const std::vector<double>& mu_grid, std::optional<double> epsilon = std::nullopt,
                            const LevyTriplet* truth = nullptr);

}  // namespace levycal
