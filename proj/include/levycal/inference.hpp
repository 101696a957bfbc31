#pragma once

#include <array>
#include <functional>
#include <vector>

#include "levycal/spectral_calibration.hpp"

namespace levycal {

// Phi^{-1}(p), lower tail.
double normal_quantile(double p);
// (1 - alpha)-quantile of chi^2 with two degrees of freedom.
double chi2_2_quantile(double alpha);

struct NoiseModel {
    std::vector<double> x;
    std::vector<double> delta;
    double delta_l2 = 0.0;
    double epsilon = 0.0;

    // linear interpolation, constant outside the tabulated range
    double delta_at(double x) const;
    bool inside(double x) const;
};

NoiseModel noise_model_from_samples(const std::vector<ObservationSample>& samples, int n = -1);

// Piecewise-linear noise intensity rho(y) and its transform D(t) = int rho(y) e^{ity} dy.
struct Intensity {
    std::vector<double> knots;
    std::vector<double> rho;

    cplx transform(double t) const;
};

// rho = eps^2 delta(y)^2 on the noise-model knots.
Intensity white_noise_intensity(const NoiseModel& noise);
// rho(x_j) = delta_j^2 (x_{j+1} - x_{j-1})/2: the regression design as a white-noise intensity.
Intensity design_intensity(const std::vector<ObservationSample>& samples, double pad = 0.5);

enum class Regime { ZeroVol, PositiveVol };
enum class VarianceMode { Asymptotic, FiniteSample };
enum class IntensityKind { Design, WhiteNoise };
enum class TargetKind { Sigma2, Gamma, Lambda, Mu };

struct Target {
    TargetKind kind = TargetKind::Gamma;
    double x = 0.0;
};

const char* target_name(TargetKind k);

// A = int_0^1 w(u) L(Uu) e^{-iUux} du with L the linearised error of psi_eps.
struct LinearFunctional {
    std::function<double(double)> w;
    double x = 0.0;
};

struct MomentPair {
    cplx conj;  // E[A conj(B)]
    cplx plain;  // E[A B]
};

struct ReImCov {
    double re_re = 0.0, im_im = 0.0, re_im = 0.0, im_re = 0.0;
};

class CovarianceEngine {
public:
    // z is the untrimmed plug-in z(u) = 1 + iu(1+iu)FO_eps(u); the kernel uses exp(T psi_eps).
    CovarianceEngine(double U, double T, const ZFn& z, const Intensity& rho, int N_cov, double sigma_max, double R);

    MomentPair moments(const LinearFunctional& a, const LinearFunctional& b) const;
    ReImCov reim(const LinearFunctional& a, const LinearFunctional& b) const;
    int nodes() const { return n_; }
    double U() const { return U_; }

private:
    std::vector<cplx> kernel(const LinearFunctional& a) const;

    double U_;
    int n_;
    std::vector<double> u_, w_;
    std::vector<cplx> fac_;
    std::vector<cplx> d_minus_, d_plus_;
};

// One linear piece of an estimator error: coef * (Re or Im) A.
struct Term {
    LinearFunctional f;
    bool imag = false;
    double coef = 0.0;
};

// Linear error representation of sigma2/gamma/lambda/mu(x) at cut-off U.
std::vector<Term> estimator_terms(const Target& t, const WeightFamily& w, double U, bool known_sigma = false);

double terms_covariance(const CovarianceEngine& eng, const std::vector<Term>& a, const std::vector<Term>& b);

struct FiniteSampleConfig {
    int N_cov = 64;
    IntensityKind intensity = IntensityKind::Design;
    bool check_convergence = true;
    double convergence_tol = 0.01;
};

// Covariance matrix of the linearised estimator errors.
std::vector<std::vector<double>> linearized_cov_matrix(const std::vector<Target>& targets, const WeightFamily& w,
                                                       double U, double T, const ZFn& z, const Intensity& rho,
                                                       int N_cov, double sigma_max, double R, bool known_sigma);

// Finite-sample sds with the doubling convergence check and one retry on negative variance.
std::vector<double> feasible_sd(const std::vector<Target>& targets, const WeightFamily& w, double U, double T,
                                const ZFn& z, const Intensity& rho, const FiniteSampleConfig& fc, double sigma_max,
                                double R, bool known_sigma);

// Exact propagation of independent regression noise through the linearisation (test oracle).
std::vector<double> discrete_linear_sd(const std::vector<Target>& targets, const WeightFamily& w, double U, double T,
                                       const ZFn& z, const InterpolatedCurve& curve,
                                       const std::vector<ObservationSample>& samples, int N_quad, bool known_sigma,
                                       double sigma_max = 0.3, double R = 10.0);

// Everything the interval constructions need about one calibrated dataset.
struct InferenceContext {
    std::vector<ObservationSample> samples;
    InterpolatedCurve curve;
    double T = 0.25;
    double U = 20.0;
    WeightFamily weights;
    TripletEstimate est;
    PsiHat psi;
    NoiseModel noise;
    CalibrationConfig cfg;

    ZFn z() const;
    double mu_hat(double x) const;
    bool known_sigma() const { return cfg.known_sigma2.has_value(); }
};

InferenceContext make_context(const std::vector<ObservationSample>& samples, double T, const CalibrationResult& res,
                              const CalibrationConfig& cfg);

// CI half-width scale (s_hat times the rate factor) from the asymptotic limits.
double asym_sd(Regime regime, const Target& target, const TripletEstimate& est, const NoiseModel& noise,
               const WeightFamily& w, double U, double T, double sigma2);

Regime infer_regime(const InferenceContext& ctx);

struct ConfidenceInterval {
    Target target;
    double estimate = 0.0;
    double sd = 0.0;
    double lo = 0.0, hi = 0.0;
    double level = 0.95;
    VarianceMode mode = VarianceMode::FiniteSample;
    double U = 0.0;
};

std::vector<double> target_sds(const InferenceContext& ctx, const std::vector<Target>& targets, Regime regime,
                               VarianceMode mode, const FiniteSampleConfig& fc = {});

std::vector<ConfidenceInterval> conf_intervals(const InferenceContext& ctx, const std::vector<Target>& targets,
                                               double alpha, Regime regime, VarianceMode mode,
                                               const FiniteSampleConfig& fc = {});

struct ConfidenceEllipse {
    std::array<double, 2> center{};
    // set = center + L (x, y)^T with x^2 + y^2 <= k_alpha
    std::array<std::array<double, 2>, 2> L{};
    double k_alpha = 0.0;

    bool contains(double g, double l) const;
};

ConfidenceEllipse joint_ellipse_gamma_lambda(const InferenceContext& ctx, double alpha, Regime regime,
                                             VarianceMode mode = VarianceMode::Asymptotic,
                                             const FiniteSampleConfig& fc = {});

struct MuPairSet {
    std::array<double, 2> x{};
    std::array<double, 2> center{};
    std::array<std::array<double, 2>, 2> M{};
    double radius = 0.0;

    bool contains(double m1, double m2) const;
};

MuPairSet joint_set_mu_pair(const InferenceContext& ctx, double x1, double x2, double alpha, double c_floor = 0.1);

}  // namespace levycal
