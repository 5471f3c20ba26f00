#include "cforge/gcr.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

std::vector<MatrixField> shape_operator(const FundamentalData& fund, const MetricData& g) {
    validate_metric(g);
    std::vector<MatrixField> S;
    for (int a = 0; a < fund.k; ++a) {
        MatrixField s(g.grid());
        for (std::size_t p = 0; p < s.size(); ++p) s[p] = g.g[p].inverse() * fund.h[a][p];
        S.push_back(std::move(s));
    }
    return S;
}

double shape_self_adjoint_defect(const std::vector<MatrixField>& S, const MetricData& g) {
    double d = 0.0;
    for (const auto& s : S)
        for (std::size_t p = 0; p < s.size(); ++p) {
            const Eigen::MatrixXd gs = g.g[p] * s[p];
            d = std::max(d, (gs - gs.transpose()).cwiseAbs().maxCoeff());
        }
    return d;
}

double gauss_residual_component(const FormField& omega, const FundamentalData& fund, const MetricData& g,
                                std::size_t p, int a, int b, int c, int d) {
    double ii = 0.0;
    for (int al = 0; al < fund.k; ++al) {
        const Eigen::MatrixXd& h = fund.h[al][p];
        ii += fund.normal_signature[al] * (h(a, c) * h(b, d) - h(a, d) * h(b, c));
    }
    return riemann_lower(omega, g.g[p], p, a, b, c, d) - ii;
}

Norms gauss_residual(const FormField& omega, const FundamentalData& fund, const MetricData& g) {
    const int n = g.dim();
    NormAccumulator acc;
    for (std::size_t p = 0; p < g.g.size(); ++p) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = c + 1; d < n; ++d) {
                        const double r = gauss_residual_component(omega, fund, g, p, a, b, c, d);
                        s += r * r;
                    }
        acc.add(s);
    }
    return acc.norms();
}

Norms codazzi_residual(const FundamentalData& fund, const ChristoffelField& gamma) {
    const int n = fund.n, k = fund.k;
    const Grid& grid = gamma.grid;
    std::vector<NormAccumulator> parts(64);
    parallel_chunks(grid.size(), [&](std::size_t chunk, std::size_t b0, std::size_t b1) {
        for (std::size_t p = b0; p < b1; ++p) {
            // c^b_{ij} = eps_b h_b(i,j); D[l][b] = covariant derivative along d_l
            std::vector<std::vector<Eigen::MatrixXd>> D(n, std::vector<Eigen::MatrixXd>(k));
            for (int l = 0; l < n; ++l) {
                for (int be = 0; be < k; ++be) {
                    const double eb = fund.normal_signature[be];
                    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(n, n);
                    if (grid.dims[l] >= 3)
                        dc = eb * fd_derivative(grid, p, l,
                                                [&](std::size_t q) -> const Eigen::MatrixXd& { return fund.h[be][q]; });
                    Eigen::MatrixXd v = dc;
                    const Eigen::MatrixXd cb = eb * fund.h[be][p];
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            double s = 0.0;
                            for (int m = 0; m < n; ++m) s += gamma(p, m, l, i) * cb(m, j) + gamma(p, m, l, j) * cb(i, m);
                            v(i, j) -= s;
                        }
                    for (int al = 0; al < k; ++al)
                        v += fund.omega[l][p](al, be) * double(fund.normal_signature[al]) * fund.h[al][p];
                    D[l][be] = v;
                }
            }
            double s = 0.0;
            for (int be = 0; be < k; ++be)
                for (int l = 0; l < n; ++l)
                    for (int i = l + 1; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            const double r = D[l][be](i, j) - D[i][be](l, j);
                            s += r * r;
                        }
            parts[chunk].add(s);
        }
    });
    NormAccumulator acc;
    for (auto& a : parts) acc.merge(a);
    return acc.norms();
}

Norms ricci_residual(const FundamentalData& fund, const MetricData& g) {
    const int n = fund.n, k = fund.k;
    const Grid& grid = g.grid();
    NormAccumulator acc;
    if (k <= 1) {
        for (std::size_t p = 0; p < grid.size(); ++p) acc.add(0.0);
        return acc.norms();
    }
    FormField w(grid, 1, k, k);
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (int l = 0; l < n; ++l) w.dir(p, l) = fund.omega[l][p];
    const FormField om = curvature(w);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Eigen::MatrixXd gi = g.g[p].inverse();
        double s = 0.0;
        for (int al = 0; al < k; ++al)
            for (int be = 0; be < k; ++be) {
                const Eigen::MatrixXd comm = fund.h[al][p] * gi * fund.h[be][p] - fund.h[be][p] * gi * fund.h[al][p];
                for (int a = 0; a < n; ++a)
                    for (int b = a + 1; b < n; ++b) {
                        const double lhs = fund.normal_signature[be] * om.component(p, {a, b})(al, be);
                        const double r = lhs - comm(b, a);
                        s += r * r;
                    }
            }
        acc.add(s);
    }
    return acc.norms();
}

EquivalenceReport gcr_cartan_equivalence(const FundamentalData& fund, const MetricData& g, const FrameField& frame,
                                         double tol) {
    EquivalenceReport r;
    r.tol = tol;
    const ChristoffelField gamma = christoffel(g);
    const FormField om = curvature(gamma);
    r.gauss = gauss_residual(om, fund, g);
    r.codazzi = codazzi_residual(fund, gamma);
    r.ricci = ricci_residual(fund, g);
    const ConnectionForm W = connection_one_form(frame, gamma, fund);
    r.skew_defect = semi_skew_defect(W);
    r.structural = second_structural_residual(W).norms;
    r.gcr_l2 = std::max({r.gauss.l2, r.codazzi.l2, r.ricci.l2});
    r.structural_l2 = r.structural.l2;
    r.gcr_pass = r.gcr_l2 < tol;
    r.structural_pass = r.structural_l2 < tol;
    r.consistent = r.gcr_pass == r.structural_pass;
    return r;
}

} // namespace cforge
