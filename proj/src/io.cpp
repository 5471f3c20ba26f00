#include "cforge/io.hpp"

#include "cforge/errors.hpp"
#include "cforge/forms.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cforge::io {

namespace {

constexpr const char* kFormat = "cartan-forge-field";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

FieldTable blank(const Grid& g, std::string kind, std::vector<std::string> comps) {
    FieldTable t;
    t.grid = g;
    t.kind = std::move(kind);
    t.components = std::move(comps);
    t.values.assign(g.size() * t.components.size(), 0.0);
    return t;
}

void expect_kind(const FieldTable& t, const std::string& kind) {
    if (t.kind != kind) throw ConfigError("expected a '" + kind + "' field, got '" + t.kind + "'");
}

std::vector<std::string> matrix_names(int r, int c, const std::string& prefix = "m") {
    std::vector<std::string> out;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) out.push_back(prefix + "_" + std::to_string(i) + "_" + std::to_string(j));
    return out;
}

Eigen::MatrixXcd complex_matrix(const json& rows, int r, int c) {
    if (!rows.is_array() || int(rows.size()) != r) throw ConfigError("multiplier entry has the wrong number of rows");
    Eigen::MatrixXcd m(r, c);
    for (int i = 0; i < r; ++i) {
        if (!rows[i].is_array() || int(rows[i].size()) != c) throw ConfigError("multiplier row has the wrong length");
        for (int k = 0; k < c; ++k) {
            const json& z = rows[i][k];
            if (z.is_number()) {
                m(i, k) = cplx(z.get<double>(), 0.0);
            } else if (z.is_array() && z.size() == 2) {
                m(i, k) = cplx(z[0].get<double>(), z[1].get<double>());
            } else {
                throw ConfigError("multiplier entries are numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

} // namespace

json grid_to_json(const Grid& g) {
    json j;
    j["dims"] = g.dims;
    j["spacing"] = g.spacing;
    j["origin"] = g.origin;
    std::vector<bool> per = g.periodic;
    j["periodic"] = per;
    return j;
}

Grid grid_from_json(const json& j) {
    Grid g;
    g.dims = get<std::vector<int>>(j, "dims");
    g.spacing = get<std::vector<double>>(j, "spacing");
    g.origin = get<std::vector<double>>(j, "origin");
    g.periodic = j.contains("periodic") ? get<std::vector<bool>>(j, "periodic") : std::vector<bool>(g.dims.size(), false);
    try {
        g.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid grid: ") + e.what());
    }
    return g;
}

json header_json(const FieldTable& t) {
    json j;
    j["format"] = kFormat;
    j["version"] = 1;
    j["kind"] = t.kind;
    j["grid"] = grid_to_json(t.grid);
    j["components"] = t.components;
    j["meta"] = t.meta;
    return j;
}

void write_csv(std::ostream& os, const FieldTable& t) {
    const int d = t.grid.ndim();
    for (int a = 0; a < d; ++a) os << (a ? "," : "") << "x" << a;
    for (const auto& c : t.components) os << "," << c;
    os << "\n";
    for (std::size_t p = 0; p < t.grid.size(); ++p) {
        const Eigen::VectorXd x = t.grid.point(p);
        for (int a = 0; a < d; ++a) os << (a ? "," : "") << fmt17(x[a]);
        for (std::size_t c = 0; c < t.ncomp(); ++c) os << "," << fmt17(t.at(p, c));
        os << "\n";
    }
}

FieldTable read_table(const json& header, std::istream& csv) {
    if (get<std::string>(header, "format") != kFormat) throw ConfigError("not a field header");
    FieldTable t;
    t.kind = get<std::string>(header, "kind");
    t.grid = grid_from_json(get<json>(header, "grid"));
    t.components = get<std::vector<std::string>>(header, "components");
    t.meta = header.value("meta", json::object());
    const int d = t.grid.ndim();
    const std::size_t ncol = std::size_t(d) + t.ncomp();
    std::string line;
    if (!std::getline(csv, line)) throw ConfigError("empty field CSV");
    t.values.reserve(t.grid.size() * t.ncomp());
    std::size_t p = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        if (p >= t.grid.size()) throw ConfigError("field CSV has more rows than grid points");
        const Eigen::VectorXd x = t.grid.point(p);
        const char* s = line.c_str();
        for (std::size_t c = 0; c < ncol; ++c) {
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end == s) throw ConfigError("bad number in field CSV row " + std::to_string(p + 1));
            if (c < std::size_t(d)) {
                if (std::abs(v - x[c]) > 1e-9 * (1.0 + std::abs(x[c])))
                    throw ConfigError("field CSV coordinates do not match the grid at row " + std::to_string(p + 1));
            } else {
                t.values.push_back(v);
            }
            s = end;
            if (c + 1 < ncol) {
                if (*s != ',') throw ConfigError("field CSV row " + std::to_string(p + 1) + " has too few columns");
                ++s;
            }
        }
        if (*s != '\0' && *s != '\r') throw ConfigError("field CSV row " + std::to_string(p + 1) + " has too many columns");
        ++p;
    }
    if (p != t.grid.size()) throw ConfigError("field CSV has fewer rows than grid points");
    return t;
}

void save_field(const FieldTable& t, const std::filesystem::path& stem) {
    std::ofstream h(stem.string() + ".json");
    std::ofstream c(stem.string() + ".csv");
    if (!h || !c) throw ConfigError("cannot write " + stem.string());
    h << header_json(t).dump(2) << "\n";
    write_csv(c, t);
}

json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

FieldTable load_field(const std::filesystem::path& stem) {
    const json h = read_json_file(stem.string() + ".json");
    std::ifstream c(stem.string() + ".csv");
    if (!c) throw ConfigError("cannot read " + stem.string() + ".csv");
    return read_table(h, c);
}

FieldTable to_table(const ScalarField& f) {
    FieldTable t = blank(f.grid, "scalar", {"v"});
    t.values = f.data;
    return t;
}

FieldTable to_table(const VectorField& f) {
    const int m = f.data.empty() ? 0 : int(f[0].size());
    std::vector<std::string> names;
    for (int i = 0; i < m; ++i) names.push_back("v_" + std::to_string(i));
    FieldTable t = blank(f.grid, "vector", names);
    for (std::size_t p = 0; p < f.size(); ++p) {
        if (f[p].size() != m) throw ShapeMismatch("vector field with ragged components");
        for (int i = 0; i < m; ++i) t.values[p * m + i] = f[p][i];
    }
    return t;
}

FieldTable to_table(const MatrixField& f) {
    const int r = f.data.empty() ? 0 : int(f[0].rows()), c = f.data.empty() ? 0 : int(f[0].cols());
    FieldTable t = blank(f.grid, "matrix", matrix_names(r, c));
    t.meta["rows"] = r;
    t.meta["cols"] = c;
    for (std::size_t p = 0; p < f.size(); ++p) {
        if (f[p].rows() != r || f[p].cols() != c) throw ShapeMismatch("matrix field with ragged blocks");
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) t.values[(p * r + i) * c + j] = f[p](i, j);
    }
    return t;
}

FieldTable to_table(const FormField& f) {
    const FormBasis& B = form_basis(f.n, f.degree);
    std::vector<std::string> names;
    for (const auto& combo : B.combos) {
        std::string lab = "w";
        for (int a : combo) lab += "_" + std::to_string(a);
        if (f.scalar()) {
            names.push_back(lab);
        } else {
            for (const auto& m : matrix_names(f.rows, f.cols, "")) names.push_back(lab + ":" + m.substr(1));
        }
    }
    FieldTable t = blank(f.grid, "form", names);
    t.meta["n"] = f.n;
    t.meta["degree"] = f.degree;
    t.meta["rows"] = f.rows;
    t.meta["cols"] = f.cols;
    const std::size_t nc = t.ncomp();
    for (std::size_t p = 0; p < f.grid.size(); ++p) {
        std::size_t c = 0;
        for (int b = 0; b < B.size(); ++b) {
            const auto v = f.value(p, b);
            for (int i = 0; i < f.rows; ++i)
                for (int j = 0; j < f.cols; ++j) t.values[p * nc + c++] = v(i, j);
        }
    }
    return t;
}

FieldTable to_table(const MetricData& g) {
    FieldTable t = to_table(g.g);
    t.kind = "metric";
    t.meta["signature"] = g.signature;
    t.meta["index"] = g.index;
    t.meta["floor"] = g.floor;
    return t;
}

FieldTable to_table(const ConnectionForm& w) {
    FieldTable t = to_table(w.W);
    t.kind = "connection";
    t.meta["tangent_dim"] = w.n;
    t.meta["codim"] = w.k;
    t.meta["signature"] = w.signature;
    return t;
}

FieldTable to_table(const Immersion& f) {
    FieldTable t = to_table(f.f);
    t.kind = "immersion";
    for (std::size_t i = 0; i < t.components.size(); ++i) t.components[i] = "f_" + std::to_string(i);
    t.meta["signature"] = f.signature;
    return t;
}

ScalarField scalar_field(const FieldTable& t) {
    expect_kind(t, "scalar");
    if (t.ncomp() != 1) throw ConfigError("scalar field needs one component");
    ScalarField f(t.grid);
    f.data = t.values;
    return f;
}

VectorField vector_field(const FieldTable& t) {
    if (t.kind != "vector" && t.kind != "immersion") expect_kind(t, "vector");
    const int m = int(t.ncomp());
    VectorField f(t.grid);
    for (std::size_t p = 0; p < f.size(); ++p) f[p] = Eigen::Map<const Eigen::VectorXd>(t.values.data() + p * m, m);
    return f;
}

MatrixField matrix_field(const FieldTable& t) {
    if (t.kind != "matrix" && t.kind != "metric") expect_kind(t, "matrix");
    const int r = get<int>(t.meta, "rows"), c = get<int>(t.meta, "cols");
    if (std::size_t(r) * c != t.ncomp()) throw ConfigError("matrix field rows*cols does not match the components");
    MatrixField f(t.grid);
    for (std::size_t p = 0; p < f.size(); ++p) {
        f[p].resize(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) f[p](i, j) = t.values[(p * r + i) * c + j];
    }
    return f;
}

FormField form_field(const FieldTable& t) {
    if (t.kind != "form" && t.kind != "connection") expect_kind(t, "form");
    const int n = get<int>(t.meta, "n"), k = get<int>(t.meta, "degree");
    const int r = get<int>(t.meta, "rows"), c = get<int>(t.meta, "cols");
    if (n != t.grid.ndim() || k < 0 || k > n) throw ConfigError("form header does not match the grid");
    FormField f(t.grid, k, r, c);
    if (f.block() != t.ncomp()) throw ConfigError("form components do not match degree and block size");
    const std::size_t nc = t.ncomp();
    for (std::size_t p = 0; p < t.grid.size(); ++p) {
        std::size_t q = 0;
        for (int b = 0; b < f.nbasis(); ++b) {
            auto v = f.value(p, b);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) v(i, j) = t.values[p * nc + q++];
        }
    }
    return f;
}

MetricData metric_data(const FieldTable& t) {
    expect_kind(t, "metric");
    MetricData g;
    g.g = matrix_field(t);
    g.signature = get<std::vector<int>>(t.meta, "signature");
    g.index = get<int>(t.meta, "index");
    g.floor = get<double>(t.meta, "floor");
    return g;
}

ConnectionForm connection_form(const FieldTable& t) {
    expect_kind(t, "connection");
    ConnectionForm w;
    w.W = form_field(t);
    w.n = get<int>(t.meta, "tangent_dim");
    w.k = get<int>(t.meta, "codim");
    w.signature = get<std::vector<int>>(t.meta, "signature");
    if (w.W.rows != w.n + w.k || int(w.signature.size()) != w.n + w.k)
        throw ConfigError("connection header block size does not match n + k");
    return w;
}

void write_obj(std::ostream& os, const Immersion& f) {
    const Grid& g = f.grid();
    if (g.ndim() != 2) throw ShapeMismatch("mesh export needs a 2D chart");
    os << "# cartan-forge mesh " << g.dims[0] << "x" << g.dims[1] << "\n";
    for (std::size_t p = 0; p < g.size(); ++p) {
        os << "v";
        for (int a = 0; a < 3; ++a) os << " " << fmt17(a < f.f[p].size() ? f.f[p][a] : 0.0);
        os << "\n";
    }
    for (int i = 0; i + 1 < g.dims[0]; ++i)
        for (int j = 0; j + 1 < g.dims[1]; ++j) {
            const auto id = [&](int a, int b) { return g.flat_index({a, b}) + 1; };
            os << "f " << id(i, j) << " " << id(i + 1, j) << " " << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
        }
}

json norms_json(const Norms& n) { return {{"sup", n.sup}, {"l2", n.l2}}; }

json equivalence_json(const EquivalenceReport& r) {
    return {{"gauss", norms_json(r.gauss)},
            {"codazzi", norms_json(r.codazzi)},
            {"ricci", norms_json(r.ricci)},
            {"structural", norms_json(r.structural)},
            {"gcr_l2", r.gcr_l2},
            {"structural_l2", r.structural_l2},
            {"tol", r.tol},
            {"gcr_pass", r.gcr_pass},
            {"structural_pass", r.structural_pass},
            {"consistent", r.consistent},
            {"skew_defect", r.skew_defect}};
}

json roundtrip_json(const RoundtripReport& r) {
    return {{"aligned_sup", r.aligned_sup},     {"aligned_rms", r.aligned_rms}, {"isometry_defect", r.isometry_defect},
            {"structural_l2", r.structural_l2}, {"gauss_l2", r.gauss_l2},       {"codazzi_l2", r.codazzi_l2},
            {"ricci_l2", r.ricci_l2},           {"pfaff_path_defect", r.pfaff_path_defect}};
}

void write_weak_csv(std::ostream& os, const WeakLimitReport& r) {
    os << "eps,pairing,error,points\n";
    for (const auto& row : r.rows) os << fmt17(row.eps) << "," << fmt17(row.pairing) << "," << fmt17(row.error) << "," << row.points << "\n";
}

json weak_summary_json(const WeakLimitReport& r, bool pass) {
    // A non-finite rate means every error was exactly zero.
    json rate = std::isfinite(r.rate) ? json(r.rate) : json("inf");
    return {{"name", r.name}, {"fitted_rate", rate}, {"declared_limit", r.declared_limit}, {"final_gap", r.final_gap}, {"pass", pass}};
}

void write_lca_csv(std::ostream& os, const LcaReport& r) {
    os << "label,low_mass,pairing,error\n";
    for (const auto& row : r.rows)
        os << fmt17(row.label) << "," << fmt17(row.low_mass) << "," << fmt17(row.pairing) << "," << fmt17(row.error) << "\n";
}

json lca_summary_json(const LcaReport& r, bool pass) {
    json consts = json::array();
    for (const auto& [d, c] : r.constants) consts.push_back({{"delta", d}, {"C", std::isfinite(c) ? json(c) : json("inf")}});
    return {{"group", r.group},
            {"precheck_pass", r.precheck.pass},
            {"precheck_max_abs_q", r.precheck.max_abs_q},
            {"plancherel_defect", r.plancherel_defect},
            {"cone_constants", consts},
            {"declared_limit", r.declared_limit},
            {"final_error", r.final_error},
            {"pass", pass}};
}

FiniteAbelianGroup group_from_json(const json& j) {
    const auto orders = get<std::vector<int>>(j, "orders");
    try {
        return FiniteAbelianGroup(orders);
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid group: ") + e.what());
    }
}

json multiplier_to_json(const FiniteAbelianGroup& G, const Multiplier& m) {
    json table = json::array();
    for (const auto& M : m.table) {
        json rows = json::array();
        for (int i = 0; i < M.rows(); ++i) {
            json row = json::array();
            for (int k = 0; k < M.cols(); ++k) row.push_back({M(i, k).real(), M(i, k).imag()});
            rows.push_back(row);
        }
        table.push_back(rows);
    }
    return {{"orders", G.orders}, {"dim_in", m.dim_in}, {"dim_out", m.dim_out}, {"table", table}};
}

Multiplier multiplier_from_json(const json& j, const FiniteAbelianGroup& G) {
    if (j.contains("orders") && get<std::vector<int>>(j, "orders") != G.orders)
        throw ConfigError("multiplier table is for another group");
    Multiplier m;
    m.dim_in = get<int>(j, "dim_in");
    m.dim_out = get<int>(j, "dim_out");
    if (m.dim_in < 1 || m.dim_out < 1) throw ConfigError("multiplier dimensions must be positive");
    const json& table = get<json>(j, "table");
    if (!table.is_array() || table.size() != G.size())
        throw ConfigError("multiplier table needs one entry per dual element (" + std::to_string(G.size()) + ")");
    for (const auto& e : table) m.table.push_back(complex_matrix(e, m.dim_out, m.dim_in));
    return m;
}

json retraction_to_json(const Retraction& r) { return {{"low", r.low}, {"target", r.target}}; }

Retraction retraction_from_json(const json& j, const FiniteAbelianGroup& G) {
    if (j.contains("box_radius")) return box_retraction(G, get<int>(j, "box_radius"));
    Retraction r;
    r.low = get<std::vector<std::size_t>>(j, "low");
    r.target = get<std::vector<long>>(j, "target");
    if (r.target.size() != G.size()) throw ConfigError("retraction needs one target per dual element");
    std::vector<bool> in_low(G.size(), false);
    for (auto x : r.low) {
        if (x >= G.size()) throw ConfigError("retraction low set index out of range");
        in_low[x] = true;
    }
    for (std::size_t x = 0; x < G.size(); ++x) {
        const long t = r.target[x];
        if (in_low[x] ? t != -1 : (t < 0 || std::size_t(t) >= G.size() || in_low[std::size_t(t)]))
            throw ConfigError("retraction target of " + std::to_string(x) + " must be -1 on the low set and outside it elsewhere");
    }
    return r;
}

json null_form_to_json(const NullFormCoefficients& A) {
    json entries = json::array();
    for (int I = 0; I < A.N; ++I)
        for (int J = 0; J < A.N; ++J)
            for (int K = 0; K < A.N; ++K) {
                const Eigen::Matrix4d& M = A(I, J, K);
                if (M.isZero(0.0)) continue;
                json rows = json::array();
                for (int r = 0; r < 4; ++r) rows.push_back({M(r, 0), M(r, 1), M(r, 2), M(r, 3)});
                entries.push_back({{"I", I}, {"J", J}, {"K", K}, {"A", rows}});
            }
    return {{"name", A.name}, {"N", A.N}, {"entries", entries}};
}

NullFormCoefficients null_form_from_json(const json& j) {
    const int N = get<int>(j, "N");
    auto A = NullFormCoefficients::zero(N, j.value("name", std::string("custom")));
    for (const auto& e : get<json>(j, "entries")) {
        const int I = get<int>(e, "I"), J = get<int>(e, "J"), K = get<int>(e, "K");
        if (I < 0 || J < 0 || K < 0 || I >= N || J >= N || K >= N) throw ConfigError("null form entry index out of range");
        const auto rows = get<std::vector<std::vector<double>>>(e, "A");
        if (rows.size() != 4) throw ConfigError("null form entries are 4x4");
        for (int r = 0; r < 4; ++r) {
            if (rows[r].size() != 4) throw ConfigError("null form entries are 4x4");
            for (int c = 0; c < 4; ++c) A(I, J, K)(r, c) = rows[r][c];
        }
    }
    return A;
}

} // namespace cforge::io
