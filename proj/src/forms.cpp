#include "cforge/forms.hpp"

#include "cforge/metric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace cforge {

namespace {

void combos_rec(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (int(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        combos_rec(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw ShapeMismatch(std::string(what) + ": forms live on different grids");
}

// Product of two coefficient blocks with scalar promotion.
Eigen::MatrixXd value_product(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b) {
    if (a.rows() == 1 && a.cols() == 1) return a(0, 0) * b;
    if (b.rows() == 1 && b.cols() == 1) return b(0, 0) * a;
    return a * b;
}

} // namespace

int FormBasis::find(const std::vector<int>& sorted) const {
    // combos are in lexicographic order: binary search
    auto it = std::lower_bound(combos.begin(), combos.end(), sorted);
    if (it == combos.end() || *it != sorted) return -1;
    return int(it - combos.begin());
}

const FormBasis& form_basis(int n, int k) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, FormBasis> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, k);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    FormBasis b;
    b.n = n;
    b.k = k;
    if (k >= 0 && k <= n) {
        std::vector<int> cur;
        combos_rec(n, k, 0, cur, b.combos);
    }
    return cache.emplace(key, std::move(b)).first->second;
}

int permutation_sign(std::vector<int> idx) {
    int sign = 1;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            if (idx[i] == idx[j]) return 0;
            if (idx[i] > idx[j]) sign = -sign;
        }
    }
    return sign;
}

FormField::FormField(const Grid& g, int degree_, int rows_, int cols_)
    : grid(g), n(g.ndim()), degree(degree_), rows(rows_), cols(cols_) {
    data.assign(g.size() * block(), 0.0);
}

Eigen::MatrixXd FormField::component(std::size_t p, const std::vector<int>& idx) const {
    if (int(idx.size()) != degree) throw ShapeMismatch("component: index count differs from degree");
    const int s = permutation_sign(idx);
    if (s == 0) return Eigen::MatrixXd::Zero(rows, cols);
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    const int b = form_basis(n, degree).find(sorted);
    return double(s) * value(p, b);
}

FormField ext_d(const FormField& w) {
    FormField out(w.grid, w.degree + 1, w.rows, w.cols);
    const FormBasis& in_b = form_basis(w.n, w.degree);
    const FormBasis& out_b = form_basis(w.n, w.degree + 1);
    if (out_b.size() == 0) return out;
    const std::size_t blk = w.block();
    const std::size_t rc = std::size_t(w.rows) * w.cols;
    // For each output basis element, the (sign, axis, input basis) terms.
    struct Term {
        double sign;
        int axis;
        int b;
    };
    std::vector<std::vector<Term>> terms(out_b.size());
    for (int J = 0; J < out_b.size(); ++J) {
        const auto& idx = out_b.combos[J];
        for (std::size_t q = 0; q < idx.size(); ++q) {
            std::vector<int> rest;
            for (std::size_t r = 0; r < idx.size(); ++r)
                if (r != q) rest.push_back(idx[r]);
            terms[J].push_back({(q % 2 == 0) ? 1.0 : -1.0, idx[q], in_b.find(rest)});
        }
    }
    parallel_chunks(w.grid.size(), [&](std::size_t, std::size_t b0, std::size_t b1) {
        std::vector<double> deriv(std::size_t(w.n) * blk);
        for (std::size_t p = b0; p < b1; ++p) {
            for (int a = 0; a < w.n; ++a) {
                if (w.grid.dims[a] < 3) {
                    std::fill(deriv.begin() + a * blk, deriv.begin() + (a + 1) * blk, 0.0);
                    continue;
                }
                fd_block(w.grid, w.data.data(), blk, p, a, deriv.data() + a * blk);
            }
            double* o = out.data.data() + p * out.block();
            for (int J = 0; J < out_b.size(); ++J) {
                double* oj = o + J * rc;
                for (const Term& t : terms[J]) {
                    const double* src = deriv.data() + t.axis * blk + t.b * rc;
                    for (std::size_t c = 0; c < rc; ++c) oj[c] += t.sign * src[c];
                }
            }
        }
    });
    return out;
}

FormField wedge(const FormField& a, const FormField& b) {
    require_same_grid(a.grid, b.grid, "wedge");
    const int deg = a.degree + b.degree;
    if (deg > a.n) return FormField(a.grid, deg, 1, 1);
    int rows, cols;
    if (a.scalar()) {
        rows = b.rows;
        cols = b.cols;
    } else if (b.scalar()) {
        rows = a.rows;
        cols = a.cols;
    } else {
        if (a.cols != b.rows) throw ShapeMismatch("wedge: value shapes do not multiply");
        rows = a.rows;
        cols = b.cols;
    }
    FormField out(a.grid, deg, rows, cols);
    const FormBasis& kb = form_basis(a.n, deg);
    const FormBasis& ab = form_basis(a.n, a.degree);
    const FormBasis& bb = form_basis(a.n, b.degree);
    struct Split {
        double sign;
        int ia;
        int ib;
    };
    std::vector<std::vector<Split>> splits(kb.size());
    const FormBasis& pos = form_basis(deg, a.degree);
    for (int K = 0; K < kb.size(); ++K) {
        const auto& idx = kb.combos[K];
        for (const auto& sel : pos.combos) {
            std::vector<int> I, J;
            std::vector<bool> in(deg, false);
            for (int s : sel) in[s] = true;
            for (int q = 0; q < deg; ++q) (in[q] ? I : J).push_back(idx[q]);
            std::vector<int> cat = I;
            cat.insert(cat.end(), J.begin(), J.end());
            splits[K].push_back({double(permutation_sign(cat)), ab.find(I), bb.find(J)});
        }
    }
    parallel_for(a.grid.size(), [&](std::size_t p) {
        for (int K = 0; K < kb.size(); ++K) {
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
            for (const Split& s : splits[K]) acc += s.sign * value_product(a.value(p, s.ia), b.value(p, s.ib));
            out.value(p, K) = acc;
        }
    });
    return out;
}

FormField operator+(const FormField& a, const FormField& b) {
    require_same_grid(a.grid, b.grid, "form sum");
    if (a.degree != b.degree || a.rows != b.rows || a.cols != b.cols) throw ShapeMismatch("form sum: shapes differ");
    FormField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

FormField operator-(const FormField& a, const FormField& b) {
    require_same_grid(a.grid, b.grid, "form difference");
    if (a.degree != b.degree || a.rows != b.rows || a.cols != b.cols)
        throw ShapeMismatch("form difference: shapes differ");
    FormField out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

FormField operator*(double s, const FormField& a) {
    FormField out = a;
    for (double& v : out.data) v *= s;
    return out;
}

Eigen::MatrixXd form_gram(const Eigen::MatrixXd& ginv, int k) {
    const FormBasis& b = form_basis(int(ginv.rows()), k);
    Eigen::MatrixXd G(b.size(), b.size());
    for (int I = 0; I < b.size(); ++I) {
        for (int L = 0; L < b.size(); ++L) {
            Eigen::MatrixXd minor(k, k);
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) minor(r, c) = ginv(b.combos[I][r], b.combos[L][c]);
            G(I, L) = k == 0 ? 1.0 : minor.determinant();
        }
    }
    return G;
}

namespace {

// Matrix S with (*w)_J = sum_L S(J,L) w_L at one point.
Eigen::MatrixXd star_matrix(const Eigen::MatrixXd& g, int k) {
    const int n = int(g.rows());
    const double vol = std::sqrt(std::abs(g.determinant()));
    const Eigen::MatrixXd G = form_gram(g.inverse(), k);
    const FormBasis& in_b = form_basis(n, k);
    const FormBasis& out_b = form_basis(n, n - k);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(out_b.size(), in_b.size());
    for (int J = 0; J < out_b.size(); ++J) {
        std::vector<int> I;
        const auto& jj = out_b.combos[J];
        for (int i = 0; i < n; ++i)
            if (std::find(jj.begin(), jj.end(), i) == jj.end()) I.push_back(i);
        std::vector<int> cat = I;
        cat.insert(cat.end(), jj.begin(), jj.end());
        const double sgn = permutation_sign(cat);
        const int Ii = in_b.find(I);
        for (int L = 0; L < in_b.size(); ++L) S(J, L) = vol * sgn * G(Ii, L);
    }
    return S;
}

} // namespace

FormField hodge_star(const FormField& w, const MetricData& g) {
    require_same_grid(w.grid, g.grid(), "hodge_star");
    validate_metric(g);
    FormField out(w.grid, w.n - w.degree, w.rows, w.cols);
    const std::size_t rc = std::size_t(w.rows) * w.cols;
    parallel_for(w.grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd S = star_matrix(g.g[p], w.degree);
        for (int J = 0; J < S.rows(); ++J) {
            double* o = out.data.data() + p * out.block() + J * rc;
            for (int L = 0; L < S.cols(); ++L) {
                const double* src = w.data.data() + p * w.block() + L * rc;
                for (std::size_t c = 0; c < rc; ++c) o[c] += S(J, L) * src[c];
            }
        }
    });
    return out;
}

FormField hodge_star_inverse(const FormField& w, const MetricData& g) {
    const int p = w.degree, n = w.n;
    const int e = p * (n - p) + g.index;
    FormField s = hodge_star(w, g);
    if (e % 2 != 0)
        for (double& v : s.data) v = -v;
    return s;
}

FormField codifferential(const FormField& w, const MetricData& g) {
    if (w.degree < 1) throw ShapeMismatch("codifferential of a 0-form");
    FormField out = hodge_star_inverse(ext_d(hodge_star(w, g)), g);
    if (w.degree % 2 != 0)
        for (double& v : out.data) v = -v;
    return out;
}

ScalarField form_inner(const FormField& a, const FormField& b, const MetricData& g) {
    require_same_grid(a.grid, b.grid, "form_inner");
    if (a.degree != b.degree) throw ShapeMismatch("form_inner: degrees differ");
    if (!a.scalar() || !b.scalar()) throw ShapeMismatch("form_inner: scalar forms only");
    ScalarField out(a.grid, 0.0);
    const int nb = a.nbasis();
    parallel_for(a.grid.size(), [&](std::size_t p) {
        const Eigen::MatrixXd G = form_gram(g.g[p].inverse(), a.degree);
        double s = 0.0;
        for (int I = 0; I < nb; ++I)
            for (int L = 0; L < nb; ++L) s += G(I, L) * a.coeff(p, I) * b.coeff(p, L);
        out[p] = s;
    });
    return out;
}

Norms form_norms(const FormField& w) {
    NormAccumulator acc;
    const std::size_t blk = w.block();
    for (std::size_t p = 0; p < w.grid.size(); ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < blk; ++c) s += w.data[p * blk + c] * w.data[p * blk + c];
        acc.add(s);
    }
    return acc.norms();
}

} // namespace cforge
