#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levycal/sim_harness.hpp"
#include "levycal/vol_tests.hpp"

namespace levycal {

// %.17g
std::string fmt17(double v);

// Quote CSV: optional "#S=..,r=..,T=.." line, header "strike,kind,price,noise_sd", kind in {call, put}.
struct QuoteFile {
    MarketSlice slice;
    bool has_market = false;
};

QuoteFile read_quotes_csv(std::istream& in);
QuoteFile read_quotes_csv_file(const std::string& path);
void write_quotes_csv(std::ostream& out, const MarketSlice& slice);

// Sample CSV "x,O,delta".
std::vector<ObservationSample> read_samples_csv(std::istream& in);
void write_samples_csv(std::ostream& out, const std::vector<ObservationSample>& s);

void write_mu_csv(std::ostream& out, const std::vector<double>& x, const std::vector<double>& mu_hat,
                  const std::vector<double>& lo, const std::vector<double>& hi);

// rep,U,sigma2_hat,gamma_hat,lambda_hat,hit_sigma2,hit_gamma,hit_lambda
void write_trace_csv(std::ostream& out, const CoverageReport& r);

struct CalibrationReport {
    CalibrationResult result;
    std::vector<ConfidenceInterval> intervals;
    std::optional<ConfidenceEllipse> ellipse;
    Regime regime = Regime::PositiveVol;
    double epsilon = 0.0;
    int n = 0;
    std::vector<std::string> warnings;
};

std::string calibration_json(const CalibrationReport& r);
std::string coverage_json(const CoverageReport& r);
std::string voltest_json(const VolTestResult& t, const VolStats& s);
std::string volset_json(const VolConfSet& set, const VolData& d);

}  // namespace levycal
