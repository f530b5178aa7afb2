// gardner_lab: identity checks, spectra, simulations and stability runs for
// Gardner breathers, with JSON/CSV reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gardner/checks.hpp"
#include "gardner/dynamics.hpp"
#include "gardner/exact.hpp"
#include "gardner/functionals.hpp"
#include "gardner/identities.hpp"
#include "gardner/spectral.hpp"
#include "gardner/sweep.hpp"

#ifndef GARDNER_VERSION
#define GARDNER_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gardner;

namespace {

constexpr double kIdentityTol = 1e-7;
constexpr double kClosedFormTol = 1e-7;
constexpr double kAngleTol = 1e-4;
constexpr double kBZeroTol = 1e-6;
constexpr double kQLambdaTol = 1e-5;
constexpr double kWronskianTol = 1e-8;
constexpr double kSolverH2Tol = 1e-6;
constexpr double kDriftTol = 1e-9;
constexpr double kAmplificationCap = 50.0;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    double alpha = 1.0, beta = 1.0, mu = 0.5, x1 = 0.0, x2 = 0.0;
    std::optional<double> grid_L;
    std::optional<int> grid_N;
    std::optional<double> dt, periods, eta;
    std::uint64_t seed = 1;
    std::string output_dir = "gardner-out";
    bool json = false, csv = false;
    unsigned threads = 0;

    // verify / spectrum
    double t = 0.0;
    int k = 8;
    int trials = 200;
    std::string sweep_mu;
    bool alternatives = false;

    // simulate / stability
    std::string kind = "random-band-limited";
    std::string integrator = "etdrk4";
    int snapshots_per_period = 20;
    bool xy = false;

    // sweep / closed-forms lattice
    std::vector<double> alphas{0.5, 1.0, 2.0}, betas{0.5, 1.0, 2.0}, mu_fractions{0.1, 0.5, 0.9};
    std::vector<std::string> checks{"closed-forms", "identities", "wronskian"};
};

// Shortest round-trip decimal form; locale independent.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// RFC 4180: CRLF records, cells quoted when they hold a comma, quote or line break.
class CsvWriter {
public:
    explicit CsvWriter(const fs::path& path) : os_(path, std::ios::binary) {
        if (!os_) throw std::runtime_error("cannot write " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cell(cells[i]);
        }
        os_ << "\r\n";
    }

private:
    static std::string cell(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }
    std::ofstream os_;
};

struct Run {
    std::string command;
    Options o;
    json config;
    std::string hash;
    fs::path dir;
    std::vector<std::string> failures;

    bool want_json() const { return o.json || !o.csv; }
    bool want_csv() const { return o.csv || !o.json; }
    fs::path file(const std::string& suffix) const { return dir / (command + "-" + hash + suffix); }

    json stamp(json j) const {
        j["version"] = GARDNER_VERSION;
        j["config_hash"] = hash;
        return j;
    }

    // One JSON object per line.
    void write_records(const std::vector<json>& records) const {
        if (!want_json()) return;
        std::ofstream os(file(".jsonl"), std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + file(".jsonl").string());
        for (const auto& r : records) os << stamp(r).dump() << '\n';
    }

    void line(bool pass, const std::string& id, const std::string& detail) {
        std::cout << (pass ? "PASS " : "FAIL ") << id << "  " << detail << '\n';
        if (!pass) failures.push_back(id);
    }
};

BreatherParams point(const Options& o) {
    BreatherParams p{o.alpha, o.beta, o.mu, o.x1, o.x2};
    p.validate();
    return p;
}

Grid grid_or(const Options& o, const Grid& fallback) {
    return Grid(o.grid_L.value_or(fallback.half_length()), o.grid_N.value_or(fallback.size()));
}

std::vector<double> parse_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad range '" + spec + "', expected a:b:n");
        }
    }
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2]))
        throw UsageError("bad range '" + spec + "', expected a:b:n");
    const int n = static_cast<int>(parts[2]);
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(n == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * i / (n - 1));
    return out;
}

json params_json(const BreatherParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"x1", p.x1}, {"x2", p.x2}};
}

json grid_json(const Grid& g) { return {{"L", g.half_length()}, {"N", g.size()}}; }

// ---------------------------------------------------------------- verify

void run_verify(Run& run) {
    const BreatherParams p = point(run.o);
    IdentityGrid ig;
    ig.grid = grid_or(run.o, ig.grid);
    const double T = breather_period(p).T;
    std::vector<IdentityId> ids(kGatedIdentities.begin(), kGatedIdentities.end());
    if (run.o.alternatives)
        for (IdentityId id :
             {IdentityId::elliptic_gardner_alt_quadratic, IdentityId::elliptic_gardner_alt_gradient})
            ids.push_back(id);

    std::vector<json> records;
    std::vector<std::vector<std::string>> rows;
    for (double t : {0.0, 0.25 * T, 0.5 * T}) {
        for (IdentityId id : ids) {
            const ResidualReport r = check_identity(id, p, t, ig);
            const bool gated = std::find(kGatedIdentities.begin(), kGatedIdentities.end(), id) !=
                               kGatedIdentities.end();
            const bool pass = r.pass(kIdentityTol);
            const std::string name(identity_name(id));
            records.push_back({{"identity", name},
                               {"alpha", p.alpha},
                               {"beta", p.beta},
                               {"mu", p.mu},
                               {"t", t},
                               {"sup_residual", r.sup_residual},
                               {"rel_scale", r.rel_scale},
                               {"relative", r.relative()},
                               {"gated", gated},
                               {"pass", pass}});
            rows.push_back({name, num(p.alpha), num(p.beta), num(p.mu), num(t), num(r.sup_residual),
                            num(r.rel_scale), num(r.relative()), gated ? "true" : "false",
                            pass ? "true" : "false"});
            char detail[96];
            std::snprintf(detail, sizeof detail, "t=%.6g rel=%.3e", t, r.relative());
            if (gated)
                run.line(pass, name, detail);
            else
                std::cout << "INFO " << name << "  " << detail << '\n';
        }
    }
    run.write_records(records);
    if (run.want_csv()) {
        CsvWriter w(run.file(".csv"));
        w.row({"identity", "alpha", "beta", "mu", "t", "sup_residual", "rel_scale", "relative", "gated", "pass"});
        for (const auto& r : rows) w.row(r);
    }
}

// ---------------------------------------------------------------- spectrum

json spectrum_json(const SpectralSummary& s) {
    const auto& sp = s.spectrum;
    json ev = json::array();
    for (double v : sp.eigenvalues) ev.push_back(v);
    return {{"alpha", s.params.alpha},
            {"beta", s.params.beta},
            {"mu", s.params.mu},
            {"t", s.t},
            {"eigenvalues", ev},
            {"negative_count", sp.negative_count},
            {"kernel_dim", sp.kernel_dim_numeric},
            {"lambda0_sq", sp.lambda0_sq},
            {"subspace_angle", sp.subspace_angle_kernel},
            {"nu_measured", s.coercivity.nu_measured},
            {"f_mu_root_count", s.wronskian.f_mu_root_count},
            {"wronskian_max_rel_err", s.wronskian.max_rel_err},
            {"wronskian_zero_count", s.wronskian.wronskian_zero_count},
            {"sigma_witness", s.coercivity.sigma_witness},
            {"q_b_minus_one", s.coercivity.q_b_minus_one},
            {"coercivity_trials", s.coercivity.trials},
            {"seed", s.coercivity.seed},
            {"tol_neg", sp.tol_neg},
            {"tol_ker", sp.tol_ker},
            {"b_zero_residual", s.b_zero.matrix_residual.relative()},
            {"b_zero_jet_residual", s.b_zero.jet_residual.relative()},
            {"b_zero_pairing", s.b_zero.pairing},
            {"b_zero_pairing_closed", s.b_zero.pairing_closed},
            {"q_lambda_alpha", s.q_lambda_alpha},
            {"q_lambda_alpha_closed", s.q_lambda_alpha_closed},
            {"q_lambda_beta", s.q_lambda_beta},
            {"q_lambda_beta_closed", s.q_lambda_beta_closed},
            {"continuous_edge", continuous_spectrum_edge(s.params)},
            {"grid", grid_json(s.grid)}};
}

// Gated spectral checks for one point; returns the failing check names.
std::vector<std::string> spectral_failures(const SpectralSummary& s, bool with_coercivity) {
    std::vector<std::string> f;
    if (s.spectrum.negative_count != 1) f.push_back("negative_count");
    if (s.spectrum.kernel_dim_numeric != 2) f.push_back("kernel_dim");
    if (!(s.spectrum.subspace_angle_kernel < kAngleTol)) f.push_back("subspace_angle");
    if (!(s.b_zero.matrix_residual.relative() < kBZeroTol)) f.push_back("b_zero_residual");
    if (!(relative_error(s.q_lambda_alpha, s.q_lambda_alpha_closed) < kQLambdaTol) ||
        !(s.q_lambda_alpha > 0.0))
        f.push_back("q_lambda_alpha");
    if (!(relative_error(s.q_lambda_beta, s.q_lambda_beta_closed) < kQLambdaTol))
        f.push_back("q_lambda_beta");
    if (with_coercivity && !(s.coercivity.nu_measured > 0.0 && s.coercivity.sigma_witness > 0.0))
        f.push_back("coercivity");
    if (s.wronskian.f_mu_root_count != 1 || s.wronskian.wronskian_zero_count != 1)
        f.push_back("root_count");
    if (!(s.wronskian.max_rel_err < kWronskianTol)) f.push_back("wronskian");
    return f;
}

void run_spectrum(Run& run) {
    const Options& o = run.o;
    std::vector<BreatherParams> pts;
    if (o.sweep_mu.empty()) {
        pts.push_back(point(o));
    } else {
        for (double f : parse_range(o.sweep_mu)) {
            BreatherParams p{o.alpha, o.beta, 0.0, o.x1, o.x2};
            p.mu = f * p.mu_max();
            p.validate();
            pts.push_back(p);
        }
    }
    if (o.k < 4) throw UsageError("--k must be at least 4");
    if (o.trials < 0) throw UsageError("--trials must be non-negative");
    const auto summaries = parallel_map(
        pts,
        [&](const BreatherParams& p) {
            return spectral_summary(p, o.t, grid_or(o, resolved_grid(p)), o.k, o.trials, o.seed);
        },
        o.threads ? o.threads : default_threads());

    std::vector<json> records;
    for (const auto& s : summaries) {
        const auto fails = spectral_failures(s, o.trials > 0);
        json j = spectrum_json(s);
        j["pass"] = fails.empty();
        j["failed_checks"] = fails;
        records.push_back(j);
        char detail[160];
        std::snprintf(detail, sizeof detail, "neg=%d ker=%d angle=%.2e nu=%.3g roots=%d wr=%.2e",
                      s.spectrum.negative_count, s.spectrum.kernel_dim_numeric,
                      s.spectrum.subspace_angle_kernel, s.coercivity.nu_measured,
                      s.wronskian.f_mu_root_count, s.wronskian.max_rel_err);
        std::string id = "spectrum(mu=" + num(s.params.mu) + ")";
        for (const auto& f : fails) id += " " + f;
        run.line(fails.empty(), id, detail);
    }
    run.write_records(records);
    if (run.want_csv()) {
        CsvWriter w(run.file(".csv"));
        w.row({"alpha", "beta", "mu", "t", "negative_count", "kernel_dim", "lambda0_sq", "subspace_angle",
               "nu_measured", "sigma_witness", "f_mu_root_count", "wronskian_max_rel_err",
               "b_zero_residual", "q_lambda_alpha", "q_lambda_beta", "pass"});
        for (std::size_t i = 0; i < summaries.size(); ++i) {
            const auto& s = summaries[i];
            w.row({num(s.params.alpha), num(s.params.beta), num(s.params.mu), num(s.t),
                   std::to_string(s.spectrum.negative_count), std::to_string(s.spectrum.kernel_dim_numeric),
                   num(s.spectrum.lambda0_sq), num(s.spectrum.subspace_angle_kernel),
                   num(s.coercivity.nu_measured), num(s.coercivity.sigma_witness),
                   std::to_string(s.wronskian.f_mu_root_count), num(s.wronskian.max_rel_err),
                   num(s.b_zero.matrix_residual.relative()), num(s.q_lambda_alpha), num(s.q_lambda_beta),
                   records[i]["pass"].get<bool>() ? "true" : "false"});
        }
    }
}

// ------------------------------------------------------ simulate / stability

json report_json(const StabilityReport& r) {
    return {{"params", params_json(r.params)},
            {"perturbation", {{"kind", std::string(perturbation_name(r.perturbation.kind))},
                              {"eta", r.perturbation.eta},
                              {"seed", r.perturbation.seed}}},
            {"eta", r.eta},
            {"sup_distance", r.sup_distance},
            {"amplification", r.amplification},
            {"invariant_drift", r.invariant_drift},
            {"modulation_speed", r.modulation_speed},
            {"modulation_speed_over_eta", r.eta > 0.0 ? json(r.modulation_speed / r.eta) : json(nullptr)},
            {"horizon_periods", r.horizon},
            {"captured", r.captured},
            {"escape_time", r.escape_time ? json(*r.escape_time) : json(nullptr)},
            {"growth", {{"slope", r.growth.slope},
                        {"std_error", r.growth.std_error},
                        {"t_stat", r.growth.t_stat},
                        {"p_value", r.growth.p_value},
                        {"samples", r.growth.samples},
                        {"lag", r.growth.lag},
                        {"non_secular", r.growth.non_secular}}},
            {"samples", r.samples.size()}};
}

void write_series(const Run& run, const StabilityReport& r) {
    if (run.want_csv()) {
        CsvWriter w(run.file(".csv"));
        w.row({"t", "distance_H2", "x1", "x2", "M", "E", "F", "H"});
        for (const auto& s : r.samples)
            w.row({num(s.t), num(s.distance), num(s.x1), num(s.x2), num(s.M), num(s.E), num(s.F), num(s.H)});
    }
}

void write_xy(const fs::path& path, const std::vector<double>& x, const std::vector<double>& y) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < x.size(); ++i) os << num(x[i]) << ' ' << num(y[i]) << '\n';
}

void write_plots(const Run& run, const StabilityReport& r, const Field& w0) {
    if (!run.o.xy) return;
    std::vector<double> t, d;
    for (const auto& s : r.samples) {
        t.push_back(s.t);
        d.push_back(s.distance);
    }
    write_xy(run.file("-distance.xy"), t, d);
    const Grid& g = w0.grid();
    auto vals = [](const Field& f) { return std::vector<double>(f.values().begin(), f.values().end()); };
    write_xy(run.file("-profile-initial.xy"), g.nodes(), vals(w0));
    if (r.final_state) write_xy(run.file("-profile-final.xy"), g.nodes(), vals(*r.final_state));
}

SolverConfig solver_config(const Options& o, const BreatherParams& p, double default_dt) {
    SolverConfig cfg;
    cfg.grid = grid_or(o, resolved_grid(p));
    cfg.dt = o.dt.value_or(default_dt);
    if (o.integrator == "etdrk4")
        cfg.integrator = Integrator::etdrk4;
    else if (o.integrator == "ifrk4")
        cfg.integrator = Integrator::ifrk4;
    else
        throw UsageError("unknown integrator '" + o.integrator + "'");
    if (o.snapshots_per_period < 1) throw UsageError("--snapshots-per-period must be positive");
    const double T = breather_period(p).T;
    cfg.snapshot_stride = std::max(1, static_cast<int>(std::lround(T / o.snapshots_per_period / cfg.dt)));
    return cfg;
}

PerturbationSpec perturbation_spec(const Options& o, double default_eta) {
    PerturbationSpec spec;
    try {
        spec.kind = perturbation_from_name(o.kind);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    spec.eta = o.eta.value_or(default_eta);
    spec.seed = o.seed;
    return spec;
}

void run_simulate(Run& run) {
    const Options& o = run.o;
    const BreatherParams p = point(o);
    const SolverConfig cfg = solver_config(o, p, 5e-5);
    const PerturbationSpec spec = perturbation_spec(o, 0.0);
    if (!(spec.eta >= 0.0)) throw UsageError("--eta must be non-negative");
    const double periods = o.periods.value_or(1.0);
    if (!(periods > 0.0)) throw UsageError("--periods must be positive");

    Field w0 = breather_field(p, 0.0, cfg.grid);
    if (spec.eta > 0.0) w0 += perturbation_profile(p, cfg.grid, spec) * spec.eta;
    StabilityReport r = track_orbit(p, w0, periods, cfg);
    r.perturbation = spec;
    r.eta = spec.eta;
    r.amplification = spec.eta > 0.0 ? r.sup_distance / spec.eta : 0.0;

    json j = report_json(r);
    j["grid"] = grid_json(cfg.grid);
    j["dt"] = cfg.dt;
    j["integrator"] = o.integrator;
    bool pass = r.captured && r.invariant_drift <= kDriftTol;
    run.line(r.invariant_drift <= kDriftTol, "invariant_drift", "max=" + num(r.invariant_drift));
    if (spec.eta == 0.0 && r.final_state && !r.samples.empty()) {
        // Unperturbed run: compare with the exact breather in the moving frame.
        const double t = r.samples.back().t;
        const double err = h2_norm(*r.final_state - breather_field(p, t, cfg.grid, cfg.frame_speed * t));
        j["h2_error_exact"] = err;
        j["t_final"] = t;
        run.line(err <= kSolverH2Tol, "h2_error_exact", "t=" + num(t) + " err=" + num(err));
        pass = pass && err <= kSolverH2Tol;
    }
    run.line(r.captured, "captured", "sup_distance=" + num(r.sup_distance));
    j["pass"] = pass;
    run.write_records({j});
    write_series(run, r);
    write_plots(run, r, w0);
}

void run_stability(Run& run) {
    const Options& o = run.o;
    const BreatherParams p = point(o);
    const SolverConfig cfg = solver_config(o, p, 1e-4);
    const PerturbationSpec spec = perturbation_spec(o, 1e-3);
    const double periods = o.periods.value_or(50.0);
    if (!(periods > 0.0)) throw UsageError("--periods must be positive");
    const StabilityReport r = stability_experiment(p, spec, periods, cfg);

    json j = report_json(r);
    j["grid"] = grid_json(cfg.grid);
    j["dt"] = cfg.dt;
    const bool bounded = r.amplification <= kAmplificationCap;
    j["pass"] = r.captured && bounded && r.growth.non_secular;
    run.line(r.captured, "captured",
             r.escape_time ? "escape_time=" + num(*r.escape_time) : "horizon=" + num(periods) + " periods");
    run.line(bounded, "amplification", num(r.amplification) + " <= " + num(kAmplificationCap));
    run.line(r.growth.non_secular, "non_secular",
             "slope=" + num(r.growth.slope) + " p=" + num(r.growth.p_value));
    std::cout << "INFO modulation_speed  " << num(r.modulation_speed) << '\n';
    run.write_records({j});
    write_series(run, r);
    Field w0 = breather_field(p, 0.0, cfg.grid);
    if (spec.eta > 0.0) w0 += perturbation_profile(p, cfg.grid, spec) * spec.eta;
    write_plots(run, r, w0);
}

// ------------------------------------------------------ sweep / closed-forms

SweepLattice lattice(const Options& o) {
    SweepLattice lat;
    lat.alphas = o.alphas;
    lat.betas = o.betas;
    lat.mu_fractions = o.mu_fractions;
    lat.x1 = o.x1;
    lat.x2 = o.x2;
    return lat;
}

struct SweepRow {
    std::vector<std::string> cells;  // alpha, beta, mu, mu_fraction, check, status, metric, tolerance, detail
    bool failed = false;
};

SweepRow sweep_row(const SweepPoint& sp, const std::string& check, const std::string& status,
                   double metric, double tol, const std::string& detail) {
    return {{num(sp.params.alpha), num(sp.params.beta), num(sp.params.mu), num(sp.mu_fraction), check, status,
             num(metric), num(tol), detail},
            status == "fail" || status == "error"};
}

std::vector<SweepRow> sweep_point(const SweepPoint& sp, const Options& o) {
    std::vector<SweepRow> rows;
    if (!sp.admissible) {
        rows.push_back(sweep_row(sp, "*", "skipped", std::nan(""), std::nan(""), sp.reason));
        return rows;
    }
    const BreatherParams& p = sp.params;
    for (const auto& check : o.checks) {
        try {
            if (check == "closed-forms") {
                double worst = 0.0;
                std::string which;
                for (const auto& r : closed_form_rows(p, grid_or(o, resolved_grid(p))))
                    if (!(r.rel_err <= worst)) {
                        worst = r.rel_err;
                        which = std::string(quantity_name(r.quantity));
                    }
                rows.push_back(sweep_row(sp, check, worst < kClosedFormTol ? "pass" : "fail", worst,
                                         kClosedFormTol, "worst=" + which));
            } else if (check == "identities") {
                IdentityGrid ig;
                ig.grid = grid_or(o, ig.grid);
                double worst = 0.0;
                std::string which;
                for (const auto& r : identity_suite(p, ig))
                    if (!(r.relative() <= worst)) {
                        worst = r.relative();
                        which = std::string(identity_name(r.id));
                    }
                rows.push_back(sweep_row(sp, check, worst < kIdentityTol ? "pass" : "fail", worst,
                                         kIdentityTol, "worst=" + which));
            } else if (check == "wronskian") {
                const auto w = wronskian_summary(p, o.t);
                const bool ok = w.max_rel_err < kWronskianTol && w.f_mu_root_count == 1 &&
                                w.wronskian_zero_count == 1;
                rows.push_back(sweep_row(sp, check, ok ? "pass" : "fail", w.max_rel_err, kWronskianTol,
                                         "roots=" + std::to_string(w.f_mu_root_count) +
                                             " zeros=" + std::to_string(w.wronskian_zero_count)));
            } else if (check == "spectrum") {
                const auto s =
                    spectral_summary(p, o.t, grid_or(o, resolved_grid(p)), o.k, o.trials, o.seed);
                const auto fails = spectral_failures(s, o.trials > 0);
                std::string detail = "neg=" + std::to_string(s.spectrum.negative_count) +
                                     " ker=" + std::to_string(s.spectrum.kernel_dim_numeric);
                for (const auto& f : fails) detail += " failed:" + f;
                rows.push_back(sweep_row(sp, check, fails.empty() ? "pass" : "fail",
                                         s.spectrum.subspace_angle_kernel, kAngleTol, detail));
            } else {
                throw UsageError("unknown check '" + check + "'");
            }
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            rows.push_back(sweep_row(sp, check, "error", std::nan(""), std::nan(""), e.what()));
        }
    }
    return rows;
}

void run_sweep(Run& run) {
    const Options& o = run.o;
    for (const auto& c : o.checks)
        if (c != "closed-forms" && c != "identities" && c != "wronskian" && c != "spectrum")
            throw UsageError("unknown check '" + c + "'");
    const auto pts = lattice_points(lattice(o));
    const auto per_point = parallel_map(
        pts, [&](const SweepPoint& sp) { return sweep_point(sp, o); }, o.threads ? o.threads : default_threads());

    const std::vector<std::string> header{"alpha", "beta", "mu", "mu_fraction", "check",
                                          "status", "metric", "tolerance", "detail"};
    std::vector<json> records;
    std::unique_ptr<CsvWriter> w;
    if (run.want_csv()) {
        w = std::make_unique<CsvWriter>(run.file(".csv"));
        w->row(header);
    }
    for (const auto& rows : per_point)
        for (const auto& r : rows) {
            if (w) w->row(r.cells);
            json j;
            for (std::size_t i = 0; i < header.size(); ++i) j[header[i]] = r.cells[i];
            records.push_back(j);
            const std::string id = r.cells[4] + "(" + r.cells[0] + "," + r.cells[1] + "," + r.cells[3] + ")";
            if (r.cells[5] == "skipped")
                std::cout << "SKIP " << id << "  " << r.cells[8] << '\n';
            else
                run.line(!r.failed, id, r.cells[6] + " " + r.cells[8]);
        }
    run.write_records(records);
}

void run_closed_forms(Run& run, bool single) {
    const Options& o = run.o;
    std::vector<SweepPoint> pts;
    if (single) {
        SweepPoint sp;
        sp.params = point(o);
        sp.mu_fraction = sp.params.mu / sp.params.mu_max();
        pts.push_back(sp);
    } else {
        pts = lattice_points(lattice(o));
    }
    struct Out {
        SweepPoint sp;
        std::vector<ClosedFormRow> rows;
        std::string error;
    };
    const auto outs = parallel_map(
        pts,
        [&](const SweepPoint& sp) {
            Out out{sp, {}, {}};
            if (!sp.admissible) return out;
            try {
                out.rows = closed_form_rows(sp.params, grid_or(o, resolved_grid(sp.params)));
            } catch (const std::exception& e) {
                out.error = e.what();
            }
            return out;
        },
        o.threads ? o.threads : default_threads());

    std::unique_ptr<CsvWriter> w;
    if (run.want_csv()) {
        w = std::make_unique<CsvWriter>(run.file(".csv"));
        w->row({"alpha", "beta", "mu", "quantity", "quadrature", "closed_form", "rel_err"});
    }
    std::vector<json> records;
    for (const auto& out : outs) {
        const auto& p = out.sp.params;
        const std::string where = "(" + num(p.alpha) + "," + num(p.beta) + "," + num(p.mu) + ")";
        if (!out.sp.admissible) {
            std::cout << "SKIP " << where << "  " << out.sp.reason << '\n';
            records.push_back({{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"skipped", out.sp.reason}});
            continue;
        }
        if (!out.error.empty()) {
            run.line(false, "closed-forms" + where, out.error);
            records.push_back({{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"error", out.error}});
            continue;
        }
        for (const auto& r : out.rows) {
            const std::string q(quantity_name(r.quantity));
            const bool pass = r.rel_err < kClosedFormTol;
            if (w)
                w->row({num(p.alpha), num(p.beta), num(p.mu), q, num(r.quadrature), num(r.closed_form),
                        num(r.rel_err)});
            records.push_back({{"alpha", p.alpha},
                               {"beta", p.beta},
                               {"mu", p.mu},
                               {"quantity", q},
                               {"quadrature", r.quadrature},
                               {"closed_form", r.closed_form},
                               {"rel_err", r.rel_err},
                               {"pass", pass}});
            run.line(pass, q + where, "rel=" + num(r.rel_err));
        }
    }
    run.write_records(records);
}

// ---------------------------------------------------------------- config

json effective_config(const std::string& command, const Options& o) {
    json j{{"command", command},
           {"alpha", o.alpha},
           {"beta", o.beta},
           {"mu", o.mu},
           {"x1", o.x1},
           {"x2", o.x2},
           {"grid_L", o.grid_L ? json(*o.grid_L) : json(nullptr)},
           {"grid_N", o.grid_N ? json(*o.grid_N) : json(nullptr)},
           {"dt", o.dt ? json(*o.dt) : json(nullptr)},
           {"periods", o.periods ? json(*o.periods) : json(nullptr)},
           {"eta", o.eta ? json(*o.eta) : json(nullptr)},
           {"seed", o.seed}};
    if (command == "verify") j["alternatives"] = o.alternatives;
    if (command == "spectrum" || command == "sweep") {
        j["t"] = o.t;
        j["k"] = o.k;
        j["trials"] = o.trials;
    }
    if (command == "spectrum") j["sweep_mu"] = o.sweep_mu;
    if (command == "simulate" || command == "stability") {
        j["kind"] = o.kind;
        j["integrator"] = o.integrator;
        j["snapshots_per_period"] = o.snapshots_per_period;
    }
    if (command == "sweep" || command == "closed-forms") {
        j["alphas"] = o.alphas;
        j["betas"] = o.betas;
        j["mu_fractions"] = o.mu_fractions;
    }
    if (command == "sweep") j["checks"] = o.checks;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gardner breather verification, spectra and stability experiments"};
    app.set_version_flag("--version", GARDNER_VERSION);
    app.set_config("--config", "", "Key = value config file; [command] sections hold command options");
    app.require_subcommand(1, 1);
    app.fallthrough();

    Options o;
    app.add_option("--alpha", o.alpha, "Breather alpha")->capture_default_str();
    app.add_option("--beta", o.beta, "Breather beta")->capture_default_str();
    app.add_option("--mu", o.mu, "Background mu")->capture_default_str();
    app.add_option("--x1", o.x1, "Shift x1")->capture_default_str();
    app.add_option("--x2", o.x2, "Shift x2")->capture_default_str();
    app.add_option("--grid-L", o.grid_L, "Grid half-length (default: per command)");
    app.add_option("--grid-N", o.grid_N, "Grid points (default: per command)");
    app.add_option("--dt", o.dt, "Time step (default: 5e-5 simulate, 1e-4 stability)");
    app.add_option("--periods", o.periods, "Horizon in breather periods (default: 1 simulate, 50 stability)");
    app.add_option("--eta", o.eta, "Perturbation size in H2 (default: 0 simulate, 1e-3 stability)");
    app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
    app.add_option("--output-dir", o.output_dir, "Directory for reports")->capture_default_str();
    app.add_flag("--json", o.json, "Write JSON records (default: JSON and CSV)");
    app.add_flag("--csv", o.csv, "Write CSV (default: JSON and CSV)");
    app.add_option("--threads", o.threads, "Worker threads for multi-point runs (0: all cores)");

    auto* verify = app.add_subcommand("verify", "Identity residual suite at t = 0, T/4, T/2");
    verify->add_flag("--alternatives", o.alternatives, "Also report alternative printings (not gated)");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Spectrum, B0, coercivity and Wronskian checks");
    spectrum_cmd->add_option("--t", o.t, "Time")->capture_default_str();
    spectrum_cmd->add_option("--k", o.k, "Number of lowest eigenvalues")->capture_default_str();
    spectrum_cmd->add_option("--trials", o.trials, "Coercivity trials (0 skips)")->capture_default_str();
    spectrum_cmd->add_option("--sweep-mu", o.sweep_mu, "a:b:n, mu as fractions of mu_max");

    auto* simulate = app.add_subcommand("simulate", "Evolve a (perturbed) breather and track it");
    auto* stability = app.add_subcommand("stability", "Perturbed-breather stability experiment");
    for (auto* sub : {simulate, stability}) {
        sub->add_option("--kind", o.kind, "random-band-limited | kernel-aligned | scaling-aligned | b0-aligned")
            ->capture_default_str();
        sub->add_option("--integrator", o.integrator, "etdrk4 | ifrk4")->capture_default_str();
        sub->add_option("--snapshots-per-period", o.snapshots_per_period, "Modulation samples per period")
            ->capture_default_str();
        sub->add_flag("--xy", o.xy, "Write two-column plot files");
    }

    auto* sweep = app.add_subcommand("sweep", "Checks over a parameter lattice");
    auto* closed = app.add_subcommand("closed-forms", "Closed forms vs quadrature");
    for (auto* sub : {sweep, closed}) {
        sub->add_option("--alphas", o.alphas, "Lattice alphas")->delimiter(',')->capture_default_str();
        sub->add_option("--betas", o.betas, "Lattice betas")->delimiter(',')->capture_default_str();
        sub->add_option("--mu-fractions", o.mu_fractions, "Lattice mu / mu_max")
            ->delimiter(',')
            ->capture_default_str();
    }
    sweep->add_option("--checks", o.checks, "closed-forms, identities, wronskian, spectrum")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--t", o.t, "Time for wronskian/spectrum checks")->capture_default_str();
    sweep->add_option("--k", o.k, "Eigenvalues for the spectrum check")->capture_default_str();
    sweep->add_option("--trials", o.trials, "Coercivity trials for the spectrum check")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Run run;
    run.command = app.get_subcommands().front()->get_name();
    run.o = o;
    try {
        run.config = effective_config(run.command, o);
        run.hash = hex64(fnv1a(run.config.dump()));
        run.dir = o.output_dir;
        fs::create_directories(run.dir);
        {
            std::ofstream cfg(run.file(".config.json"), std::ios::binary);
            if (!cfg) throw UsageError("output directory not writable: " + run.dir.string());
            cfg << run.stamp(run.config).dump(2) << '\n';
        }

        if (run.command == "verify")
            run_verify(run);
        else if (run.command == "spectrum")
            run_spectrum(run);
        else if (run.command == "simulate")
            run_simulate(run);
        else if (run.command == "stability")
            run_stability(run);
        else if (run.command == "sweep")
            run_sweep(run);
        else if (run.command == "closed-forms")
            run_closed_forms(run, app.count("--alpha") + app.count("--beta") + app.count("--mu") > 0);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterDomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "check failure: " << e.what() << '\n';
        return 1;
    }

    if (!run.failures.empty()) {
        std::cout << "failed:";
        for (const auto& f : run.failures) std::cout << ' ' << f;
        std::cout << '\n';
        return 1;
    }
    std::cout << "all checks passed (" << run.command << ", config " << run.hash << ")\n";
    return 0;
}
