#include "runner.hpp"

#include "cforge/errors.hpp"
#include "cforge/fixtures.hpp"
#include "cforge/rigging.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace cforge::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

Check less(std::string name, double v, double tol) { return {std::move(name), v, tol, "<", v < tol}; }
Check at_most(std::string name, double v, double tol) { return {std::move(name), v, tol, "<=", v <= tol}; }
Check at_least(std::string name, double v, double tol) { return {std::move(name), v, tol, ">=", v >= tol}; }
Check within(std::string name, double v, double target, double tol) {
    std::ostringstream rel;
    rel << "|value - " << target << "| <=";
    return {std::move(name), v, tol, rel.str(), std::abs(v - target) <= tol};
}
Check flag(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, 1.0, "==", ok}; }

template <class T>
T param(const Settings& s, const char* key, T fallback) {
    if (!s.params.contains(key)) return fallback;
    try {
        return s.params.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for params.") + key + ": " + e.what());
    }
}

fs::path resolve(const Settings& s, const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() || s.base_dir.empty() ? q : s.base_dir / q;
}

double h2tol(const Settings& s, const Grid& g) { return s.tol.value_or(10.0 * std::pow(g.max_spacing(), 2)); }

std::vector<double> schedule(const Settings& s, int lo, int hi) {
    const int a = s.eps_lo ? s.eps_lo : lo, b = s.eps_hi ? s.eps_hi : hi;
    if (a < 1 || b < a || b > 14) throw ConfigError("eps schedule must satisfy 1 <= lo <= hi <= 14");
    return dyadic_schedule(a, b);
}

int grid_or(const Settings& s, int fallback) {
    const int n = s.grid ? s.grid : fallback;
    if (n < 5 || n > 4096) throw ConfigError("grid must be in [5, 4096]");
    return n;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << text;
}

template <class F>
void write_with(const fs::path& p, F&& fn) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + p.string());
    fn(os);
}

struct Outcome {
    json results = json::object();
    std::vector<Check> checks;
};

// ---- residual --------------------------------------------------------------

SubmanifoldFixture inline_chart(const Settings& s, const json& chart) {
    SubmanifoldFixture fx;
    fx.name = "inline";
    fx.g = io::metric_data(io::load_field(resolve(s, chart.at("metric").get<std::string>())));
    validate_metric(fx.g);
    const Grid& grid = fx.g.grid();
    const int n = fx.g.dim();
    const auto sig = chart.value("normal_signature", std::vector<int>{});
    const auto hs = chart.value("second_fundamental", std::vector<std::string>{});
    if (sig.size() != hs.size() || sig.empty())
        throw ConfigError("inline chart needs one second_fundamental file per normal_signature entry");
    fx.fund = FundamentalData::zero(grid, n, sig);
    for (std::size_t a = 0; a < hs.size(); ++a) {
        fx.fund.h[a] = io::matrix_field(io::load_field(resolve(s, hs[a])));
        if (!(fx.fund.h[a].grid == grid) || fx.fund.h[a][0].rows() != n || fx.fund.h[a][0].cols() != n)
            throw ConfigError("second_fundamental file " + hs[a] + " does not match the metric");
    }
    const auto om = chart.value("normal_connection", std::vector<std::string>{});
    if (!om.empty()) {
        if (int(om.size()) != n) throw ConfigError("normal_connection needs one file per chart direction");
        for (int l = 0; l < n; ++l) {
            fx.fund.omega[l] = io::matrix_field(io::load_field(resolve(s, om[l])));
            if (!(fx.fund.omega[l].grid == grid) || fx.fund.omega[l][0].rows() != fx.fund.k)
                throw ConfigError("normal_connection file " + om[l] + " does not match the metric");
        }
    }
    fx.frame = gram_schmidt(fx.g, identity_frame(grid, n));
    return fx;
}

Outcome run_residual(Settings& s) {
    SubmanifoldFixture fx;
    if (s.params.contains("chart")) {
        fx = inline_chart(s, s.params.at("chart"));
        s.fixture = "inline";
    } else {
        const int N = grid_or(s, 64);
        s.grid = N;
        fx = s.fixture == "sphere" && s.params.contains("ii_scale") ? sphere_fixture(N, param(s, "ii_scale", 1.0))
                                                                    : make_submanifold_fixture(s.fixture, N);
    }
    const double tol = h2tol(s, fx.g.grid());
    const ConnectionForm W = connection_one_form(fx.frame, christoffel(fx.g), fx.fund);
    const EquivalenceReport r = gcr_cartan_equivalence(fx.fund, fx.g, fx.frame, tol);
    io::save_field(io::to_table(W), fs::path(s.out) / "connection");
    Outcome o;
    o.results = io::equivalence_json(r);
    o.results["tol"] = tol;
    o.checks = {at_most("gcr_l2", r.gcr_l2, tol), at_most("structural_l2", r.structural_l2, tol),
                less("semi_skew_defect", semi_skew_defect(W), 1e-12), flag("suites_agree", r.consistent)};
    return o;
}

// ---- roundtrip -------------------------------------------------------------

Outcome run_roundtrip(Settings& s) {
    const int N = grid_or(s, 64);
    s.grid = N;
    const double tol = s.tol.value_or(1e-3);
    const auto fx = make_submanifold_fixture(s.fixture, N);
    const RoundtripReport r = roundtrip(fx.exact, fx.basepoint);
    const Immersion& out = r.realization.immersion;
    io::save_field(io::to_table(out), fs::path(s.out) / "immersion");
    if (out.grid().ndim() == 2) write_with(fs::path(s.out) / "immersion.obj", [&](std::ostream& os) { io::write_obj(os, out); });
    Outcome o;
    o.results = io::roundtrip_json(r);
    o.checks = {less("aligned_sup", r.aligned_sup, tol)};
    if (param(s, "order_check", false)) {
        const int N2 = 2 * N - 1;
        const auto fine = make_submanifold_fixture(s.fixture, N2);
        const double e2 = roundtrip(fine.exact, fine.basepoint).aligned_sup;
        const double ratio = r.aligned_sup / e2;
        o.results["refined_grid"] = N2;
        o.results["refined_aligned_sup"] = e2;
        o.results["ratio"] = num(ratio);
        o.checks.push_back({"error_ratio", ratio, 0.0, "in [3.2, 4.8]", ratio >= 3.2 && ratio <= 4.8});
    }
    return o;
}

// ---- weak-limit ------------------------------------------------------------

Outcome run_weak(Settings& s) {
    Outcome o;
    const fs::path table = fs::path(s.out) / "table.csv";
    if (s.fixture == "flat-cylinder-family") {
        const auto eps = schedule(s, 3, 7);
        const double kbar = param(s, "kbar", 1.0);
        const auto r = cartan_family_experiment(kbar, eps);
        write_with(table, [&](std::ostream& os) {
            os << "eps,structural_l2,tol,pairing,error\n";
            for (const auto& row : r.rows)
                os << row.eps << "," << row.structural_l2 << "," << row.tol << "," << row.pairing << "," << row.error << "\n";
        });
        double worst = 0.0;
        bool members_ok = true;
        json rows = json::array();
        for (const auto& row : r.rows) {
            worst = std::max(worst, row.structural_l2 / row.tol);
            members_ok = members_ok && row.structural_l2 < row.tol;
            rows.push_back({{"eps", row.eps}, {"structural_l2", row.structural_l2}, {"tol", row.tol}, {"error", row.error}});
        }
        o.results = {{"rows", rows},
                     {"limit_structural_l2", r.limit_structural_l2},
                     {"limit_tol", r.limit_tol},
                     {"limit_pairing", r.limit_pairing},
                     {"fitted_rate", num(r.rate)}};
        o.checks = {less("member_structural_l2_over_tol", worst, 1.0),
                    less("limit_structural_l2", r.limit_structural_l2, r.limit_tol),
                    at_least("fitted_rate", r.rate, s.min_rate)};
        return o;
    }
    WeakLimitReport r;
    if (s.fixture == "constrained-resonant") {
        r = weak_limit_experiment(constrained_resonant_family(schedule(s, 3, 9)), div_curl_form());
        o.checks = {at_least("fitted_rate", r.rate, s.min_rate)};
    } else if (s.fixture == "nonresonant") {
        r = weak_limit_experiment(nonresonant_family({1.0, 0.0}, {0.0, 1.0}, schedule(s, 3, 6)), div_curl_form());
        o.checks = {at_least("fitted_rate", r.rate, s.min_rate)};
    } else if (s.fixture == "unconstrained") {
        r = weak_limit_experiment(unconstrained_family(schedule(s, 3, 9)), product_form());
        const double want = param(s, "expected_gap", 0.5);
        o.checks = {within("final_gap", r.final_gap, want, s.tol.value_or(0.02))};
    } else {
        throw ConfigError("unknown weak-limit fixture '" + s.fixture + "'");
    }
    write_with(table, [&](std::ostream& os) { io::write_weak_csv(os, r); });
    bool pass = true;
    for (const auto& c : o.checks) pass = pass && c.pass;
    o.results = io::weak_summary_json(r, pass);
    return o;
}

// ---- lca -------------------------------------------------------------------

Outcome run_lca(Settings& s) {
    LcaFixture fx = make_lca_fixture(s.fixture);
    if (s.params.contains("multiplier"))
        fx.multiplier = io::multiplier_from_json(io::read_json_file(resolve(s, param<std::string>(s, "multiplier", ""))), fx.group);
    if (s.params.contains("retraction"))
        fx.retraction = io::retraction_from_json(io::read_json_file(resolve(s, param<std::string>(s, "retraction", ""))), fx.group);
    const auto deltas = param(s, "deltas", std::vector<double>{1e-1, 1e-2});
    const int n_lambda = param(s, "n_lambda", 4096);
    const double tol = s.tol.value_or(1e-8);
    const LcaReport r = lca_quadratic_experiment(fx.group, fx.multiplier, fx.Q, fx.family, fx.retraction, deltas, n_lambda, s.seed);
    write_with(fs::path(s.out) / "table.csv", [&](std::ostream& os) { io::write_lca_csv(os, r); });
    Outcome o;
    double worst_c = 0.0;
    for (const auto& [d, c] : r.constants) worst_c = std::max(worst_c, c);
    o.checks = {less("plancherel_defect", r.plancherel_defect, 1e-10), flag("cone_precheck", r.precheck.pass),
                flag("cone_constants_finite", std::isfinite(worst_c)), less("final_error", r.final_error, tol)};
    bool pass = true;
    for (const auto& c : o.checks) pass = pass && c.pass;
    o.results = io::lca_summary_json(r, pass);
    return o;
}

// ---- constraints -----------------------------------------------------------

Outcome run_constraints(Settings& s) {
    const int N = grid_or(s, 24);
    s.grid = N;
    SliceData slice;
    if (s.fixture == "h3-slice") {
        slice = hyperbolic_slice(N, param(s, "h_scale", 1.0));
    } else if (s.fixture == "flat-slice") {
        slice = flat_slice(N);
    } else {
        throw ConfigError("unknown constraints fixture '" + s.fixture + "'");
    }
    const double tol = h2tol(s, slice.gamma.grid());
    const ConstraintReport r = einstein_constraints(slice);
    io::save_field(io::to_table(r.hamiltonian), fs::path(s.out) / "hamiltonian");
    Outcome o;
    o.results = {{"hamiltonian", io::norms_json(r.hamiltonian_norms)}, {"momentum", io::norms_json(r.momentum_norms)}, {"tol", tol}};
    o.checks = {at_most("hamiltonian_l2", r.hamiltonian_norms.l2, tol), at_most("momentum_l2", r.momentum_norms.l2, tol)};
    return o;
}

// ---- null-wave -------------------------------------------------------------

Outcome run_null_wave(Settings& s) {
    NullFormCoefficients A = s.params.contains("coefficients")
                                 ? io::null_form_from_json(io::read_json_file(resolve(s, param<std::string>(s, "coefficients", ""))))
                                 : make_null_form(s.fixture);
    if (s.params.contains("coefficients")) s.fixture = A.name;
    const int n_dirs = param(s, "n_dirs", 256);
    const WaveConeReport cone = wave_cone_check(A, n_dirs, 8, s.seed);
    const double tol = s.tol.value_or(1e-12);
    Outcome o;
    o.results["null_condition"] = {{"max_violation", cone.necessary.max_violation},
                                   {"worst_covector", std::vector<double>(cone.necessary.worst_xi.data(), cone.necessary.worst_xi.data() + 4)}};
    o.results["cone"] = {{"full_max_abs_q", cone.full.max_abs_q},
                         {"full_pass", cone.full.pass},
                         {"gradient_max_abs_q", cone.gradient.max_abs_q},
                         {"gradient_pass", cone.gradient.pass}};
    o.checks = {less("null_violation", cone.necessary.max_violation, tol)};
    if (A.N == 1) {
        const WaveExperiment w = wave_weak_continuity_experiment(A, null_wave_family(schedule(s, 3, 6)));
        write_with(fs::path(s.out) / "table.csv", [&](std::ostream& os) { io::write_weak_csv(os, w.report); });
        o.results["wave"] = io::weak_summary_json(w.report, w.report.rate >= s.min_rate);
        o.checks.push_back(at_least("wave_fitted_rate", w.report.rate, s.min_rate));
    }
    return o;
}

// ---- rigging ---------------------------------------------------------------

Outcome run_rigging(Settings& s) {
    const int N = grid_or(s, 64);
    s.grid = N;
    const RiggedFixture fx = make_rigged_fixture(s.fixture, N);
    const double tol = h2tol(s, fx.iota.grid);
    const RiggedHypersurface h = rig_decompose(fx.iota, fx.ell, fx.signature);
    const HypersurfaceEquivalence eq = hypersurface_equivalence(h, h.gamma, tol);
    Outcome o;
    const auto& R = eq.residuals;
    o.results = {{"rigging_defect", h.rigging_defect},
                 {"tangency_defect", h.tangency_defect},
                 {"min_abs_det_g", h.min_abs_det_g},
                 {"gauss", io::norms_json(R.gauss)},
                 {"codazzi_k", io::norms_json(R.codazzi_k)},
                 {"codazzi_Psi", io::norms_json(R.codazzi_Psi)},
                 {"codazzi_psi", io::norms_json(R.codazzi_psi)},
                 {"sigma_structural", io::norms_json(eq.sigma.total)},
                 {"tol", tol}};
    o.checks = {less("rigging_defect", h.rigging_defect, 1e-12), at_most("gauss_codazzi_max_l2", R.max_l2(), tol),
                flag("suites_agree", eq.consistent())};
    if (param(s, "roundtrip", true)) {
        const RiggedRoundtrip rt = rigged_roundtrip(fx.iota, fx.ell, fx.signature);
        Immersion im{rt.realization.iota, fx.signature, {}};
        io::save_field(io::to_table(im), fs::path(s.out) / "immersion");
        if (im.grid().ndim() == 2) write_with(fs::path(s.out) / "immersion.obj", [&](std::ostream& os) { io::write_obj(os, im); });
        o.results["roundtrip"] = {{"raw_sup", rt.raw_sup}, {"aligned_sup", rt.aligned_sup}, {"ell_sup", rt.ell_sup}};
        o.checks.push_back(less("roundtrip_aligned_sup", rt.aligned_sup, param(s, "roundtrip_tol", 1e-3)));
    }
    return o;
}

const std::map<std::string, Outcome (*)(Settings&)>& dispatch() {
    static const std::map<std::string, Outcome (*)(Settings&)> m = {
        {"residual", run_residual},       {"roundtrip", run_roundtrip},     {"weak-limit", run_weak},
        {"lca", run_lca},                 {"constraints", run_constraints}, {"null-wave", run_null_wave},
        {"rigging", run_rigging}};
    return m;
}

json checks_json(const std::vector<Check>& cs) {
    json a = json::array();
    for (const auto& c : cs) a.push_back({{"name", c.name}, {"value", num(c.value)}, {"tol", num(c.tol)}, {"relation", c.relation}, {"pass", c.pass}});
    return a;
}

} // namespace

json Settings::to_json() const {
    json j = {{"kind", kind}, {"fixture", fixture}, {"seed", seed}, {"out", out}, {"min_rate", min_rate}, {"params", params}};
    j["grid"] = grid ? json(grid) : json(nullptr);
    j["tol"] = tol ? num(*tol) : json(nullptr);
    j["eps_lo"] = eps_lo ? json(eps_lo) : json(nullptr);
    j["eps_hi"] = eps_hi ? json(eps_hi) : json(nullptr);
    return j;
}

std::vector<std::string> experiment_kinds() {
    std::vector<std::string> k;
    for (const auto& [name, fn] : dispatch()) k.push_back(name);
    return k;
}

Settings parse_settings(const json& cfg, const Overrides& ov, const fs::path& base_dir) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {"kind", "fixture", "grid", "seed", "tol", "out", "eps_lo", "eps_hi", "min_rate", "params"};
    for (const auto& [key, v] : cfg.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
    Settings s;
    s.base_dir = base_dir;
    try {
        s.kind = cfg.at("kind").get<std::string>();
        s.fixture = cfg.value("fixture", std::string());
        s.grid = cfg.value("grid", 0);
        s.seed = cfg.value("seed", std::uint64_t(1));
        if (cfg.contains("tol") && !cfg["tol"].is_null()) s.tol = cfg["tol"].get<double>();
        s.out = cfg.value("out", s.out);
        s.eps_lo = cfg.value("eps_lo", 0);
        s.eps_hi = cfg.value("eps_hi", 0);
        s.min_rate = cfg.value("min_rate", s.min_rate);
        s.params = cfg.value("params", json::object());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    if (!dispatch().count(s.kind)) throw ConfigError("unknown experiment kind '" + s.kind + "'");
    if (s.fixture.empty() && !(s.params.contains("chart") || s.params.contains("coefficients")))
        throw ConfigError("config needs a fixture");
    if (!s.params.is_object()) throw ConfigError("params must be an object");
    if (ov.out) s.out = *ov.out;
    if (ov.seed) s.seed = *ov.seed;
    if (ov.grid) s.grid = *ov.grid;
    if (ov.tol) s.tol = *ov.tol;
    if (s.tol && !(*s.tol > 0.0)) throw ConfigError("tol must be positive");
    if (!fs::path(s.out).is_absolute() && !base_dir.empty() && !ov.out) s.out = (base_dir / s.out).string();
    return s;
}

RunResult run_settings(const Settings& in) {
    Settings s = in;
    std::error_code ec;
    fs::create_directories(s.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + s.out);
    const Outcome o = dispatch().at(s.kind)(s);
    RunResult r;
    r.checks = o.checks;
    bool pass = !o.checks.empty();
    for (const auto& c : o.checks) pass = pass && c.pass;
    r.exit_code = pass ? 0 : 1;
    r.summary = {{"tool", "cartan-forge"}, {"version", kVersion}, {"settings", s.to_json()}, {"results", o.results},
                 {"checks", checks_json(o.checks)}, {"pass", pass}, {"exit_code", r.exit_code}};
    write_text(fs::path(s.out) / "summary.json", summary_text(r.summary));
    return r;
}

RunResult run_config(const fs::path& config, const Overrides& ov, std::ostream& err) {
    RunResult r;
    auto fail = [&](int code, const std::string& kind, const std::string& what) {
        err << "cartan-forge: " << what << "\n";
        r.exit_code = code;
        r.summary = {{"tool", "cartan-forge"}, {"version", kVersion}, {"error", {{"kind", kind}, {"message", what}}}, {"pass", false},
                     {"exit_code", code}};
        return r;
    };
    Settings s;
    try {
        s = parse_settings(io::read_json_file(config), ov, config.parent_path());
    } catch (const Error& e) {
        return fail(2, e.kind(), e.what());
    }
    try {
        return run_settings(s);
    } catch (const UsageError& e) {
        fail(2, e.kind(), e.what());
    } catch (const NumericalFailure& e) {
        fail(3, e.kind(), e.what());
    } catch (const json::exception& e) {
        fail(2, "ConfigError", e.what());
    }
    r.summary["settings"] = s.to_json();
    std::error_code ec;
    if (fs::create_directories(s.out, ec), !ec) {
        std::ofstream os(fs::path(s.out) / "summary.json");
        if (os) os << summary_text(r.summary);
    }
    return r;
}

const std::vector<FixtureEntry>& fixture_registry() {
    static const std::vector<FixtureEntry> reg = [] {
        std::vector<FixtureEntry> v = {
            {"plane", "residual roundtrip", "z = 0 in R^3"},
            {"sphere", "residual roundtrip", "unit sphere patch, h = g (params.ii_scale scales h)"},
            {"sphere-scaled", "residual roundtrip", "unit sphere with h = 1.1 g (incompatible)"},
            {"de-sitter", "residual roundtrip", "unit de Sitter slice in R^{2,1}"},
            {"hyperbolic", "residual roundtrip", "hyperboloid sheet H^2 in R^{2,1}"},
            {"flat-cylinder", "residual roundtrip", "cylinder over a unit speed plane curve"},
            {"clifford-torus", "residual roundtrip", "flat torus in R^4 with a twisted normal frame"},
            {"flat-cylinder-family", "weak-limit", "cylinders with kappa = kbar + cos(s/eps)"},
            {"constrained-resonant", "weak-limit", "div-curl pair, pairing -eps^2/32"},
            {"nonresonant", "weak-limit", "div-curl pair with distinct wave vectors"},
            {"unconstrained", "weak-limit", "cos(x/eps) squared, gap 1/2"},
            {"h3-slice", "constraints", "umbilic hyperboloid slice (params.h_scale)"},
            {"flat-slice", "constraints", "t = 0 in Minkowski space"},
        };
        for (const auto& n : lca_fixture_names()) v.push_back({n, "lca", "finite group " + make_lca_fixture(n).group.label()});
        const std::map<std::string, std::string> rig = {
            {"lightcone", "null cone t = |x| in R^{2,1} away from the apex, null rigging"},
            {"hyperplane", "t = 0 in R^{2,1} rigged by d_t"},
            {"rigged-sphere", "unit sphere rigged by its position vector"}};
        for (const auto& n : rigged_fixture_names()) v.push_back({n, "rigging", rig.count(n) ? rig.at(n) : "rigged hypersurface"});
        const std::map<std::string, std::string> nf = {
            {"q0", "Q0 = (d_t phi)^2 - |grad phi|^2, satisfies the null condition"},
            {"dt-squared", "(d_t phi)^2, violates the null condition"},
            {"zero", "vanishing coefficients"}};
        for (const auto& n : null_form_names()) v.push_back({n, "null-wave", nf.count(n) ? nf.at(n) : "null form coefficients"});
        return v;
    }();
    return reg;
}

void print_fixtures(std::ostream& os, bool as_json) {
    if (as_json) {
        json a = json::array();
        for (const auto& e : fixture_registry()) a.push_back({{"name", e.name}, {"kinds", e.kinds}, {"description", e.description}});
        os << a.dump(2) << "\n";
        return;
    }
    for (const auto& e : fixture_registry()) {
        std::string name = e.name, kinds = e.kinds;
        name.resize(std::max<std::size_t>(name.size(), 22), ' ');
        kinds.resize(std::max<std::size_t>(kinds.size(), 20), ' ');
        os << name << " " << kinds << " " << e.description << "\n";
    }
}

std::string summary_text(const json& summary) { return summary.dump(2) + "\n"; }

} // namespace cforge::cli
