#include "levycal/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "levycal/errors.hpp"

namespace levycal {

using nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::Config, "csv line " + std::to_string(line) + ": not a number: '" + s + "'");
    }
}

}  // namespace

QuoteFile read_quotes_csv(std::istream& in) {
    QuoteFile f;
    std::string line;
    int ln = 0;
    bool header = false;
    bool seen[3] = {false, false, false};
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            for (const auto& kv : split(line.substr(1), ',')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string k = trim(kv.substr(0, eq));
                const double v = to_double(trim(kv.substr(eq + 1)), ln);
                if (k == "S") f.slice.S = v, seen[0] = true;
                else if (k == "r") f.slice.r = v, seen[1] = true;
                else if (k == "T") f.slice.T = v, seen[2] = true;
                else throw Error(ErrorCode::Config, "quotes csv: unknown market key '" + k + "'");
            }
            continue;
        }
        const auto cols = split(line, ',');
        if (!header) {
            if (cols != std::vector<std::string>{"strike", "kind", "price", "noise_sd"})
                throw Error(ErrorCode::Config, "quotes csv: header must be strike,kind,price,noise_sd");
            header = true;
            continue;
        }
        if (cols.size() != 4) throw Error(ErrorCode::Config, "quotes csv line " + std::to_string(ln) + ": expected 4 fields");
        OptionQuote q;
        q.strike = to_double(cols[0], ln);
        if (cols[1] == "call" || cols[1] == "C") q.kind = OptionKind::Call;
        else if (cols[1] == "put" || cols[1] == "P") q.kind = OptionKind::Put;
        else throw Error(ErrorCode::Config, "quotes csv line " + std::to_string(ln) + ": kind must be call or put");
        q.price = to_double(cols[2], ln);
        q.noise_sd = to_double(cols[3], ln);
        f.slice.quotes.push_back(q);
    }
    if (!header) throw Error(ErrorCode::Config, "quotes csv: missing header");
    if (seen[0] || seen[1] || seen[2]) {
        if (!(seen[0] && seen[1] && seen[2])) throw Error(ErrorCode::Config, "quotes csv: market line needs S, r and T");
        f.has_market = true;
    }
    return f;
}

QuoteFile read_quotes_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot open quotes file " + path);
    return read_quotes_csv(in);
}

void write_quotes_csv(std::ostream& out, const MarketSlice& sl) {
    out << "#S=" << fmt17(sl.S) << ",r=" << fmt17(sl.r) << ",T=" << fmt17(sl.T) << "\n";
    out << "strike,kind,price,noise_sd\n";
    for (const auto& q : sl.quotes)
        out << fmt17(q.strike) << ',' << (q.kind == OptionKind::Call ? "call" : "put") << ',' << fmt17(q.price) << ','
            << fmt17(q.noise_sd) << "\n";
}

std::vector<ObservationSample> read_samples_csv(std::istream& in) {
    std::vector<ObservationSample> out;
    std::string line;
    int ln = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto cols = split(line, ',');
        if (!header) {
            if (cols != std::vector<std::string>{"x", "O", "delta"})
                throw Error(ErrorCode::Config, "samples csv: header must be x,O,delta");
            header = true;
            continue;
        }
        if (cols.size() != 3) throw Error(ErrorCode::Config, "samples csv line " + std::to_string(ln) + ": expected 3 fields");
        out.push_back({to_double(cols[0], ln), to_double(cols[1], ln), to_double(cols[2], ln)});
    }
    return out;
}

void write_samples_csv(std::ostream& out, const std::vector<ObservationSample>& s) {
    out << "x,O,delta\n";
    for (const auto& o : s) out << fmt17(o.x) << ',' << fmt17(o.O) << ',' << fmt17(o.delta) << "\n";
}

void write_mu_csv(std::ostream& out, const std::vector<double>& x, const std::vector<double>& mu,
                  const std::vector<double>& lo, const std::vector<double>& hi) {
    out << "x,mu_hat,ci_lo,ci_hi\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out << fmt17(x[i]) << ',' << fmt17(mu[i]) << ',' << fmt17(lo[i]) << ',' << fmt17(hi[i]) << "\n";
}

void write_trace_csv(std::ostream& out, const CoverageReport& r) {
    out << "rep,U,sigma2_hat,gamma_hat,lambda_hat,hit_sigma2,hit_gamma,hit_lambda\n";
    for (const auto& rec : r.records) {
        if (rec.failed) continue;
        out << rec.rep << ',' << fmt17(rec.U) << ',' << fmt17(rec.est[0]) << ',' << fmt17(rec.est[1]) << ','
            << fmt17(rec.est[2]) << ',' << int(rec.hit[0]) << ',' << int(rec.hit[1]) << ',' << int(rec.hit[2]) << "\n";
    }
}

namespace {

const char* mode_name(VarianceMode m) { return m == VarianceMode::FiniteSample ? "finite" : "asymptotic"; }

ordered_json triplet_json(double s2, double g, double l) {
    ordered_json j;
    j["sigma2"] = s2;
    j["gamma"] = g;
    j["lambda"] = l;
    return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string calibration_json(const CalibrationReport& r) {
    const auto& res = r.result;
    ordered_json j;
    j["U"] = res.U;
    j["n"] = r.n;
    j["epsilon"] = r.epsilon;
    j["regime"] = r.regime == Regime::ZeroVol ? "zero_vol" : "positive_vol";
    j["estimate"] = triplet_json(res.est.sigma2, res.est.gamma, res.est.lambda);
    j["estimate_clamped"] = triplet_json(res.est.sigma2_c, res.est.gamma_c, res.est.lambda_c);
    ordered_json cis = ordered_json::array();
    for (const auto& ci : r.intervals) {
        if (ci.target.kind == TargetKind::Mu) continue;
        ordered_json c;
        c["target"] = target_name(ci.target.kind);
        c["estimate"] = ci.estimate;
        c["sd"] = ci.sd;
        c["lo"] = ci.lo;
        c["hi"] = ci.hi;
        c["level"] = ci.level;
        c["variance_mode"] = mode_name(ci.mode);
        cis.push_back(c);
    }
    j["intervals"] = cis;
    if (r.ellipse) {
        ordered_json e;
        e["center"] = r.ellipse->center;
        e["L"] = r.ellipse->L;
        e["k_alpha"] = r.ellipse->k_alpha;
        j["gamma_lambda_ellipse"] = e;
    }
    ordered_json b;
    b["sigma2"] = res.bias.sigma2;
    b["gamma"] = res.bias.gamma;
    b["lambda"] = res.bias.lambda;
    b["mu"] = res.bias.mu;
    b["divergent"] = res.bias.divergent;
    j["bias_bounds"] = b;
    if (res.oracle) {
        j["oracle"]["U"] = res.oracle->U;
        j["oracle"]["Us"] = res.oracle->Us;
        j["oracle"]["errors"] = res.oracle->errors;
    }
    ordered_json d;
    d["trim_count"] = res.trim_count;
    d["max_phase_jump"] = res.max_phase_jump;
    d["warnings"] = r.warnings;
    j["diagnostics"] = d;
    return dump(j);
}

std::string coverage_json(const CoverageReport& r) {
    ordered_json j;
    j["reps"] = r.reps;
    j["failures"] = r.failures;
    j["alpha"] = r.alpha;
    j["variance_mode"] = mode_name(r.mode);
    j["truth"] = triplet_json(r.truth[0], r.truth[1], r.truth[2]);
    j["hits"] = triplet_json(r.hits[0], r.hits[1], r.hits[2]);
    j["coverage"] = triplet_json(r.coverage[0], r.coverage[1], r.coverage[2]);
    j["mean_width"] = triplet_json(r.mean_width[0], r.mean_width[1], r.mean_width[2]);
    j["mean_estimate"] = triplet_json(r.mean_estimate[0], r.mean_estimate[1], r.mean_estimate[2]);
    ordered_json h = ordered_json::array();
    for (const auto& [U, c] : r.U_histogram) h.push_back({{"U", U}, {"count", c}});
    j["U_histogram"] = h;
    if (!r.mu_x.empty()) {
        j["mu"]["x"] = r.mu_x;
        j["mu"]["truth"] = r.mu_true;
        j["mu"]["coverage"] = r.mu_coverage;
        j["mu"]["mean_bias"] = r.mu_mean_bias;
    }
    ordered_json fails = ordered_json::array();
    for (const auto& rec : r.records)
        if (rec.failed) fails.push_back({{"rep", rec.rep}, {"error", rec.failure}});
    j["failed_replications"] = fails;
    return dump(j);
}

std::string voltest_json(const VolTestResult& t, const VolStats& s) {
    ordered_json j;
    j["sigma0"] = t.sigma0;
    j["alpha"] = t.alpha;
    j["statistic"] = stat_name(t.kind);
    j["value"] = t.value;
    j["threshold"] = t.threshold;
    j["reject"] = t.reject;
    j["U"] = t.U;
    j["U_bar"] = t.U_bar;
    j["sigma2_hat"] = s.sigma2_hat;
    j["sigma2_tilde"] = s.sigma2_tilde;
    j["d_hat"] = s.d_hat;
    j["divergence_ratio"] = s.divergence_ratio;
    return dump(j);
}

std::string volset_json(const VolConfSet& set, const VolData& d) {
    ordered_json j;
    j["alpha"] = set.alpha;
    j["level"] = 1.0 - set.alpha;
    j["U_bar"] = d.U_bar;
    j["sigma2_tilde"] = d.sigma2_tilde;
    ordered_json iv = ordered_json::array();
    for (const auto& i : set.intervals) iv.push_back({i[0], i[1]});
    j["intervals"] = iv;
    j["is_interval"] = set.is_interval;
    j["grid_points"] = set.grid.size();
    std::size_t acc = 0;
    for (bool a : set.accepted) acc += a;
    j["accepted_points"] = acc;
    return dump(j);
}

}  // namespace levycal
