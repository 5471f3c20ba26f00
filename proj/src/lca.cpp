#include "cforge/lca.hpp"

#include "cforge/errors.hpp"
#include "cforge/util.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>

namespace cforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx e2pi(double t) { return std::polar(1.0, 2.0 * kPi * t); }

void check_shape(const FiniteAbelianGroup& G, const GroupFunction& u) {
    if (u.size() != G.size()) throw ShapeMismatch("group function has " + std::to_string(u.size()) +
                                                  " values, group has " + std::to_string(G.size()));
    for (const auto& v : u)
        if (v.size() != u.front().size()) throw ShapeMismatch("group function fibers differ in size");
}

// Unscaled transform along every axis; sign -1 forward, +1 backward.
GroupFunction transform(const FiniteAbelianGroup& G, const GroupFunction& u, bool forward) {
    check_shape(G, u);
    GroupFunction out = u;
    if (u.empty()) return out;
    const int J = int(u.front().size());
    const int d = G.rank();
    std::vector<std::size_t> stride(d, 1);
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * std::size_t(G.orders[a + 1]);
    for (int a = 0; a < d; ++a) {
        const int n = G.orders[a];
        if (n == 1) continue;  // the DFT of length one is the identity
        const std::size_t s = stride[a];
        // every line along axis a starts at an index with digit 0 on that axis
        std::vector<std::size_t> starts;
        for (std::size_t p = 0; p < G.size(); ++p)
            if ((p / s) % std::size_t(n) == 0) starts.push_back(p);
        parallel_for(starts.size(), [&](std::size_t li) {
            Eigen::FFT<double> fft;
            fft.SetFlag(Eigen::FFT<double>::Unscaled);
            std::vector<cplx> in(n), res(n);
            const std::size_t p0 = starts[li];
            for (int c = 0; c < J; ++c) {
                for (int k = 0; k < n; ++k) in[k] = out[p0 + k * s][c];
                if (forward) fft.fwd(res, in);
                else fft.inv(res, in);
                for (int k = 0; k < n; ++k) out[p0 + k * s][c] = res[k];
            }
        });
    }
    return out;
}

Eigen::MatrixXcd kernel_basis(const Eigen::MatrixXcd& M, int dim) {
    if (M.rows() == 0) return Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, s.size() ? s[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > cut) ++rank;
    return svd.matrixV().rightCols(dim - rank);
}

Eigen::VectorXcd random_unit(Rng& rng, int n) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
    return v / v.norm();
}

} // namespace

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> o) : orders(std::move(o)) {
    if (orders.empty()) throw ConfigError("group needs at least one cyclic factor");
    for (int n : orders)
        if (n < 1) throw ConfigError("cyclic factor orders must be positive");
}

std::size_t FiniteAbelianGroup::size() const {
    std::size_t s = 1;
    for (int n : orders) s *= std::size_t(n);
    return s;
}

std::vector<int> FiniteAbelianGroup::multi_index(std::size_t flat) const {
    std::vector<int> idx(orders.size());
    for (int a = rank() - 1; a >= 0; --a) {
        idx[a] = int(flat % std::size_t(orders[a]));
        flat /= std::size_t(orders[a]);
    }
    return idx;
}

std::size_t FiniteAbelianGroup::flat(const std::vector<int>& idx) const {
    if (int(idx.size()) != rank()) throw ShapeMismatch("group index has the wrong rank");
    std::size_t f = 0;
    for (int a = 0; a < rank(); ++a) {
        const int n = orders[a];
        f = f * std::size_t(n) + std::size_t(((idx[a] % n) + n) % n);
    }
    return f;
}

std::vector<int> FiniteAbelianGroup::signed_index(std::size_t flat) const {
    std::vector<int> idx = multi_index(flat);
    for (int a = 0; a < rank(); ++a)
        if (2 * idx[a] > orders[a]) idx[a] -= orders[a];
    return idx;
}

double FiniteAbelianGroup::pairing(std::size_t xi, std::size_t g) const {
    const auto x = multi_index(xi), y = multi_index(g);
    double t = 0.0;
    for (int a = 0; a < rank(); ++a) t += double((long(x[a]) * y[a]) % orders[a]) / orders[a];
    return t - std::floor(t);
}

std::string FiniteAbelianGroup::label() const {
    std::string s;
    for (std::size_t a = 0; a < orders.size(); ++a) s += (a ? "xZ" : "Z") + std::to_string(orders[a]);
    return s;
}

GroupFunction fourier(const FiniteAbelianGroup& G, const GroupFunction& u) {
    GroupFunction out = transform(G, u, true);
    const double w = 1.0 / double(G.size());
    for (auto& v : out) v *= w;
    return out;
}

GroupFunction inverse_fourier(const FiniteAbelianGroup& G, const GroupFunction& uhat) {
    return transform(G, uhat, false);
}

double norm_on_group(const FiniteAbelianGroup& G, const GroupFunction& u) {
    check_shape(G, u);
    double s = 0.0;
    for (const auto& v : u) s += v.squaredNorm();
    return std::sqrt(s / double(G.size()));
}

double norm_on_dual(const FiniteAbelianGroup& G, const GroupFunction& uhat) {
    check_shape(G, uhat);
    double s = 0.0;
    for (const auto& v : uhat) s += v.squaredNorm();
    return std::sqrt(s);
}

Multiplier make_multiplier(const FiniteAbelianGroup& G,
                           const std::function<Eigen::MatrixXcd(const std::vector<int>& xi)>& m) {
    Multiplier out;
    out.table.resize(G.size());
    for (std::size_t x = 0; x < G.size(); ++x) {
        out.table[x] = m(G.signed_index(x));
        if (x == 0) {
            out.dim_out = int(out.table[x].rows());
            out.dim_in = int(out.table[x].cols());
        } else if (out.table[x].rows() != out.dim_out || out.table[x].cols() != out.dim_in) {
            throw ShapeMismatch("multiplier entries differ in shape");
        }
    }
    return out;
}

GroupFunction apply_multiplier(const FiniteAbelianGroup& G, const Multiplier& m, const GroupFunction& u) {
    if (m.table.size() != G.size()) throw ShapeMismatch("multiplier table does not cover the dual");
    GroupFunction uh = fourier(G, u);
    for (std::size_t x = 0; x < uh.size(); ++x) {
        if (uh[x].size() != m.dim_in) throw ShapeMismatch("multiplier and function fibers differ");
        uh[x] = (m[x] * uh[x]).eval();
    }
    GroupFunction out = inverse_fourier(G, uh);
    return out;
}

LcaConeCheck lca_cone_precheck(const FiniteAbelianGroup& G, const Multiplier& m, const QuadraticForm& Q, int n_pts,
                               std::uint64_t seed, double tol) {
    if (Q.dim() != m.dim_in) throw ShapeMismatch("Q and the multiplier act on different fibers");
    LcaConeCheck r;
    Rng rng(seed);
    for (std::size_t x = 1; x < G.size(); ++x) {
        const Eigen::MatrixXcd K = kernel_basis(m[x], m.dim_in);
        if (K.cols() == 0) continue;
        ++r.kernel_directions;
        auto visit = [&](const Eigen::VectorXcd& s) {
            r.max_abs_q = std::max(r.max_abs_q, std::abs(Q(s)));
            ++r.samples;
        };
        for (int c = 0; c < K.cols(); ++c) visit(K.col(c));
        for (int t = 0; t < n_pts; ++t) visit(K * random_unit(rng, int(K.cols())));
    }
    r.pass = r.max_abs_q < tol;
    return r;
}

Retraction box_retraction(const FiniteAbelianGroup& G, int radius) {
    Retraction r;
    r.target.assign(G.size(), -1);
    for (std::size_t x = 0; x < G.size(); ++x) {
        bool low = true;
        for (int v : G.signed_index(x)) low = low && std::abs(v) <= radius;
        if (low) r.low.push_back(x);
        else r.target[x] = long(x);
    }
    return r;
}

double sampled_cone_constant(const FiniteAbelianGroup& G, const Multiplier& m, const QuadraticForm& Q,
                             const Retraction& phi, double delta, int n_lambda, std::uint64_t seed) {
    if (phi.target.size() != G.size()) throw ShapeMismatch("retraction table does not cover the dual");
    std::vector<char> in_k(G.size(), 0);
    for (long t : phi.target)
        if (t >= 0) in_k[std::size_t(t)] = 1;
    // the same lambda samples at every eta, plus the kernel basis of each m(eta)
    Rng rng(seed);
    std::vector<Eigen::VectorXcd> lam;
    for (int i = 0; i < m.dim_in; ++i) lam.push_back(Eigen::VectorXcd::Unit(m.dim_in, i));
    for (int t = 0; t < n_lambda; ++t) lam.push_back(random_unit(rng, m.dim_in));
    std::vector<double> deficit(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) deficit[i] = -Q.real(lam[i]) - delta;
    const double inf = std::numeric_limits<double>::infinity();
    double C = 0.0;
    for (std::size_t eta = 0; eta < G.size(); ++eta) {
        if (!in_k[eta]) continue;
        const Eigen::MatrixXcd& M = m[eta];
        auto ratio = [&](const Eigen::VectorXcd& l, double def) {
            if (def <= 0.0) return;
            const double den = (M * l).squaredNorm();
            C = std::max(C, den > 1e-300 ? def / den : inf);
        };
        for (std::size_t i = 0; i < lam.size(); ++i) ratio(lam[i], deficit[i]);
        const Eigen::MatrixXcd K = kernel_basis(M, m.dim_in);
        for (int c = 0; c < K.cols(); ++c) ratio(K.col(c), -Q.real(Eigen::VectorXcd(K.col(c))) - delta);
    }
    return C;
}

LcaReport lca_quadratic_experiment(const FiniteAbelianGroup& G, const Multiplier& m, const QuadraticForm& Q,
                                   const LcaFamily& fam, const Retraction& phi, const std::vector<double>& deltas,
                                   int n_lambda, std::uint64_t seed) {
    LcaReport rep;
    rep.group = G.label();
    rep.declared_limit = fam.declared_limit;
    rep.precheck = lca_cone_precheck(G, m, Q, 8, seed);
    if (!rep.precheck.pass)
        throw ConePrecheckFailed("Q reaches " + std::to_string(rep.precheck.max_abs_q) +
                                 " on the kernels of the multiplier");
    for (double d : deltas) rep.constants.emplace_back(d, sampled_cone_constant(G, m, Q, phi, d, n_lambda, seed));
    for (std::size_t j = 0; j < fam.members.size(); ++j) {
        const GroupFunction& u = fam.members[j];
        const GroupFunction uh = fourier(G, u);
        rep.plancherel_defect = std::max(rep.plancherel_defect, std::abs(norm_on_group(G, u) - norm_on_dual(G, uh)));
        LcaRow row;
        row.label = j < fam.labels.size() ? fam.labels[j] : double(j);
        for (std::size_t x : phi.low) row.low_mass += uh[x].squaredNorm();
        double s = 0.0;
        for (const auto& v : u) s += Q.real(v);
        row.pairing = s / double(G.size());
        row.error = std::abs(row.pairing - fam.declared_limit);
        rep.rows.push_back(row);
    }
    rep.final_error = rep.rows.empty() ? 0.0 : rep.rows.back().error;
    return rep;
}

namespace {

QuadraticForm off_diagonal_form() {
    Eigen::Matrix2d q;
    q << 0.0, 0.5, 0.5, 0.0;
    return QuadraticForm(Eigen::MatrixXd(q));
}

} // namespace

LcaFixture z256_fixture() {
    constexpr int N = 256;
    LcaFixture f;
    f.name = "z256";
    f.group = FiniteAbelianGroup({N});
    f.multiplier = make_multiplier(f.group, [](const std::vector<int>& xi) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
        m(0, 0) = e2pi(2.0 * xi[0] / N) - 1.0;
        m(1, 1) = e2pi(double(xi[0]) / N) - 1.0;
        return m;
    });
    f.Q = off_diagonal_form();
    f.retraction = box_retraction(f.group, 2);
    f.family.name = "oscillating-characters";
    for (int j = 1; j <= 6; ++j) {
        const int xi = 1 << j;
        GroupFunction u(N, Eigen::VectorXcd(2));
        for (int g = 0; g < N; ++g) {
            const int c = g <= N / 2 ? g : g - N;
            const double env = std::exp(-0.5 * double(c) * c / 256.0);
            u[g] << env * e2pi(double(xi) * g / N), env * e2pi(2.0 * xi * g / N);
        }
        f.family.labels.push_back(xi);
        f.family.members.push_back(std::move(u));
    }
    f.family.declared_limit = 0.0;
    return f;
}

LcaFixture z8xz3_fixture() {
    LcaFixture f;
    f.name = "z8xz3";
    f.group = FiniteAbelianGroup({8, 3});
    f.multiplier = make_multiplier(f.group, [](const std::vector<int>& xi) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
        m(0, 0) = e2pi(xi[0] / 8.0) - 1.0;
        m(1, 1) = e2pi(xi[1] / 3.0) - 1.0;
        return m;
    });
    f.Q = off_diagonal_form();
    f.retraction = box_retraction(f.group, 0);
    f.family.name = "characters";
    const std::vector<std::vector<int>> freqs = {{1, 1}, {3, 1}, {1, 2}, {3, 2}};
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        const std::size_t x = f.group.flat(freqs[j]);
        const std::size_t x2 = f.group.flat({2 * freqs[j][0], 2 * freqs[j][1]});
        GroupFunction u(f.group.size(), Eigen::VectorXcd(2));
        for (std::size_t g = 0; g < f.group.size(); ++g)
            u[g] << e2pi(f.group.pairing(x, g)), e2pi(f.group.pairing(x2, g));
        f.family.labels.push_back(double(j + 1));
        f.family.members.push_back(std::move(u));
    }
    f.family.declared_limit = 0.0;
    return f;
}

std::vector<std::string> lca_fixture_names() { return {"z256", "z8xz3"}; }

LcaFixture make_lca_fixture(const std::string& name) {
    if (name == "z256") return z256_fixture();
    if (name == "z8xz3") return z8xz3_fixture();
    throw ConfigError("unknown group fixture '" + name + "'");
}

} // namespace cforge
