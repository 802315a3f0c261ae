#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oscilap/errors.hpp"
#include "oscilap/grid.hpp"
#include "oscilap/quadrature.hpp"

namespace oscilap {

struct QuadratureConfig {
    int near_order = 6;        // tensor Gauss order inside the adaptive near-diagonal rule
    int far_order = 6;         // fixed tensor Gauss order for well-separated element pairs
    double adaptive_tol = 1e-9;  // relative to the natural pair scale h^(3-2s)
    long max_cells_per_pair = 400000;
};

struct StiffnessForm {
    double s;
    Eigen::MatrixXd A;
    QuadratureConfig quad;
    long total_cells = 0;  // adaptive cells spent across all near-diagonal pairs
};

struct MassMatrix {
    Eigen::MatrixXd M;
    bool lumped;
};

namespace detail {

// Global hat function of interior node i (1-based) on the grid.
inline double hat(const Grid& g, int i, double x) {
    const double xi = -g.half_width + i * g.spacing;
    return std::max(0.0, 1.0 - std::abs(x - xi) / g.spacing);
}

// Density of the interaction of a point x in Omega with all of R \ Omega.
inline double exterior_density(const Grid& g, double s, double x) {
    const double L = g.half_width;
    return (std::pow(L - x, -2.0 * s) + std::pow(L + x, -2.0 * s)) / (2.0 * s);
}

constexpr int kMaxPairComps = 10;  // at most 4 nodes touch an element pair -> C(4,2)+4

struct PairIntegrand {
    const Grid* grid;
    double s;
    int n_comps;
    std::array<int, 4> nodes;           // node indices involved
    std::array<std::pair<int, int>, kMaxPairComps> comps;  // (a,b) indices into nodes

    void eval(double x, double y, std::array<double, kMaxPairComps>& out) const {
        // On very deep cells quadrature points from the two elements can collide in
        // floating point; the hat differences vanish there too, so the contribution
        // is zero rather than 0 * inf.
        if (x == y) {
            out.fill(0.0);
            return;
        }
        const double kern = std::pow(std::abs(x - y), -1.0 - 2.0 * s);
        std::array<double, 4> d;
        for (int a = 0; a < 4; ++a)
            if (nodes[a] > 0) d[a] = hat(*grid, nodes[a], x) - hat(*grid, nodes[a], y);
        for (int c = 0; c < n_comps; ++c)
            out[c] = d[comps[c].first] * d[comps[c].second] * kern;
    }
};

using PairValues = std::array<double, kMaxPairComps>;

inline void tensor_gauss_pair(const PairIntegrand& f, double x0, double x1, double y0,
                              double y1, int order, PairValues& out) {
    const GaussRule& r = gauss_legendre(order);
    const double xm = 0.5 * (x0 + x1), xh = 0.5 * (x1 - x0);
    const double ym = 0.5 * (y0 + y1), yh = 0.5 * (y1 - y0);
    out.fill(0.0);
    PairValues val;
    for (int a = 0; a < order; ++a) {
        const double x = xm + xh * r.nodes[a];
        for (int b = 0; b < order; ++b) {
            f.eval(x, ym + yh * r.nodes[b], val);
            const double w = r.weights[a] * r.weights[b];
            for (int c = 0; c < f.n_comps; ++c) out[c] += w * val[c];
        }
    }
    for (int c = 0; c < f.n_comps; ++c) out[c] *= xh * yh;
}

struct AdaptivePairWorker {
    const PairIntegrand& f;
    int order;
    long budget;
    long used = 0;

    // coarse = estimate of the whole cell at the parent's order
    void run(double x0, double x1, double y0, double y1, const PairValues& coarse,
             double tol, int depth, PairValues& acc) {
        if (++used > budget) throw QuadratureError("near-diagonal pair budget exhausted");
        const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
        PairValues child[4], fine;
        tensor_gauss_pair(f, x0, xm, y0, ym, order, child[0]);
        tensor_gauss_pair(f, xm, x1, y0, ym, order, child[1]);
        tensor_gauss_pair(f, x0, xm, ym, y1, order, child[2]);
        tensor_gauss_pair(f, xm, x1, ym, y1, order, child[3]);
        double diff = 0.0, mag = 0.0;
        for (int c = 0; c < f.n_comps; ++c) {
            fine[c] = child[0][c] + child[1][c] + child[2][c] + child[3][c];
            diff += std::abs(fine[c] - coarse[c]);
            mag += std::abs(fine[c]);
        }
        // Near the corner singularity the coarse/fine difference decays at almost
        // the same rate as the per-level tolerance, so a pure absolute criterion
        // makes the refinement front spread. The relative floor cuts a cell off once
        // its own contribution is resolved to ~5 digits, and the depth cap stops the
        // corner path before cells get so small that coordinate roundoff (ulp of the
        // node positions vs the cell size) turns the evaluations into noise; the
        // contribution left behind at depth 30 is ~(2^-30)^(3-2s) of the pair scale.
        if (depth > 0 && (diff <= tol || diff <= 1e-5 * mag || depth >= 30)) {
            for (int c = 0; c < f.n_comps; ++c) acc[c] += fine[c];
            return;
        }
        run(x0, xm, y0, ym, child[0], 0.5 * tol, depth + 1, acc);
        run(xm, x1, y0, ym, child[1], 0.5 * tol, depth + 1, acc);
        run(x0, xm, ym, y1, child[2], 0.5 * tol, depth + 1, acc);
        run(xm, x1, ym, y1, child[3], 0.5 * tol, depth + 1, acc);
    }
};

}  // namespace detail

/// Galerkin matrix of the Gagliardo form for piecewise-linear functions vanishing
/// outside (-L, L). Element-pair decomposition:
///   - same element: exact closed form (the difference quotient is linear there),
///   - pairs within 2 elements: adaptive tensor Gauss on the merged integrand
///     (u(x)-u(y))(v(x)-v(y))|x-y|^(-1-2s), which stays integrable through the corner,
///   - well-separated pairs: fixed tensor Gauss,
///   - interaction with the exterior: exact reduction to 2*int u v rho with
///     rho(x) = ((L-x)^(-2s) + (L+x)^(-2s)) / (2s).
inline StiffnessForm assemble_stiffness(const Grid& grid, double s,
                                        const QuadratureConfig& quad = {}) {
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("assemble_stiffness: s must lie in (0,1)");
    const int n = grid.n_interior;
    const double h = grid.spacing;
    const int n_elems = n + 1;  // grid points 0..n+1, element e spans points e, e+1

    StiffnessForm form;
    form.s = s;
    form.quad = quad;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

    // Same-element pairs: on one element every hat is linear, so
    // (hat_i(x)-hat_i(y))(hat_j(x)-hat_j(y)) = c_i c_j (x-y)^2 with slopes c = +-1/h,
    // and the integral of |x-y|^(1-2s) over the square is closed-form.
    const double self_square =
        2.0 * std::pow(h, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    for (int e = 0; e < n_elems; ++e) {
        const int left = e, right = e + 1;  // node indices (0 and n+1 are boundary)
        const double cl = -1.0 / h, cr = 1.0 / h;
        if (left >= 1 && left <= n) A(left - 1, left - 1) += cl * cl * self_square;
        if (right >= 1 && right <= n) A(right - 1, right - 1) += cr * cr * self_square;
        if (left >= 1 && right <= n) {
            A(left - 1, right - 1) += cl * cr * self_square;
            A(right - 1, left - 1) += cl * cr * self_square;
        }
    }

    // Distinct element pairs e < f; each contributes twice (swap of the two factors
    // of the double integral).
    const double pair_scale = std::pow(h, 3.0 - 2.0 * s);
    long worst_cells = -1;
    int worst_e = -1, worst_f = -1;
    for (int e = 0; e < n_elems; ++e) {
        const double ex0 = -grid.half_width + e * h, ex1 = ex0 + h;
        for (int f = e + 1; f < n_elems; ++f) {
            const double fx0 = -grid.half_width + f * h, fx1 = fx0 + h;

            detail::PairIntegrand ig;
            ig.grid = &grid;
            ig.s = s;
            int cand[4] = {e, e + 1, f, f + 1};
            int nn = 0;
            for (int c : cand) {
                if (c < 1 || c > n) continue;
                bool dup = false;
                for (int a = 0; a < nn; ++a) dup = dup || ig.nodes[a] == c;
                if (!dup) ig.nodes[nn++] = c;
            }
            if (nn == 0) continue;
            for (int a = nn; a < 4; ++a) ig.nodes[a] = -1;
            ig.n_comps = 0;
            for (int a = 0; a < nn; ++a)
                for (int b = a; b < nn; ++b) ig.comps[ig.n_comps++] = {a, b};

            detail::PairValues I;
            if (f - e <= 2) {
                detail::AdaptivePairWorker w{ig, quad.near_order, quad.max_cells_per_pair};
                detail::PairValues coarse;
                detail::tensor_gauss_pair(ig, ex0, ex1, fx0, fx1, quad.near_order, coarse);
                I.fill(0.0);
                try {
                    w.run(ex0, ex1, fx0, fx1, coarse, quad.adaptive_tol * pair_scale, 0, I);
                } catch (const QuadratureError&) {
                    throw AssemblyError("assemble_stiffness: quadrature budget exhausted on element pair (" +
                                        std::to_string(e) + ", " + std::to_string(f) + ")");
                }
                form.total_cells += w.used;
                if (w.used > worst_cells) { worst_cells = w.used; worst_e = e; worst_f = f; }
            } else {
                detail::tensor_gauss_pair(ig, ex0, ex1, fx0, fx1, quad.far_order, I);
            }

            for (int c = 0; c < ig.n_comps; ++c) {
                const int i = ig.nodes[ig.comps[c].first] - 1;
                const int j = ig.nodes[ig.comps[c].second] - 1;
                const double v = 2.0 * I[c];
                A(i, j) += v;
                if (i != j) A(j, i) += v;
            }
        }
    }
    (void)worst_e; (void)worst_f; (void)worst_cells;

    // Exterior interaction: 2 * int_Omega hat_i hat_j rho. Nonzero for |i-j| <= 1.
    // rho blows up like dist^(-2s) at the boundary but the hats vanish there, so the
    // integrand is integrable; adaptive 1D quadrature absorbs the boundary elements.
    for (int e = 0; e < n_elems; ++e) {
        const double ex0 = -grid.half_width + e * h, ex1 = ex0 + h;
        const int nodes[2] = {e, e + 1};
        for (int a = 0; a < 2; ++a) {
            for (int b = a; b < 2; ++b) {
                const int i = nodes[a], j = nodes[b];
                if (i < 1 || i > n || j < 1 || j > n) continue;
                auto f1 = [&](double x) {
                    // deep bisection can round x onto the boundary where the hats
                    // vanish but rho is infinite; the product is 0 there
                    const double w = detail::hat(grid, i, x) * detail::hat(grid, j, x);
                    return w == 0.0 ? 0.0 : w * detail::exterior_density(grid, s, x);
                };
                double v;
                try {
                    v = 2.0 * adaptive_integrate(f1, ex0, ex1, 8,
                                                 quad.adaptive_tol * pair_scale, 100000);
                } catch (const QuadratureError&) {
                    throw AssemblyError("assemble_stiffness: exterior quadrature budget exhausted on element " +
                                        std::to_string(e));
                }
                A(i - 1, j - 1) += v;
                if (i != j) A(j - 1, i - 1) += v;
            }
        }
    }

    // Enforce exact symmetry against rounding in the accumulation order.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (A(i, j) + A(j, i));
            A(i, j) = v;
            A(j, i) = v;
        }

    form.A = std::move(A);
    return form;
}

inline MassMatrix assemble_mass(const Grid& grid, bool lumped) {
    const int n = grid.n_interior;
    const double h = grid.spacing;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    if (lumped) {
        M.diagonal().setConstant(h);
    } else {
        M.diagonal().setConstant(2.0 * h / 3.0);
        for (int i = 0; i + 1 < n; ++i) {
            M(i, i + 1) = h / 6.0;
            M(i + 1, i) = h / 6.0;
        }
    }
    return MassMatrix{std::move(M), lumped};
}

struct SignInequalityReport {
    bool holds = true;
    long pairs_checked = 0;
    double worst_margin = 0.0;  // min over pairs of lhs - rhs (negative = violation)
    bool exhaustive = false;
};

/// Pointwise check of (u(x)-u(y))(u-(x)-u-(y)) >= |u-(x)-u-(y)|^2 with u- = min(u,0),
/// over node pairs (with the zero boundary values included as virtual nodes).
inline SignInequalityReport check_sign_inequality(const NodalVector& u, long sample_pairs,
                                                  std::uint64_t seed = 0x5eedu) {
    const long n = u.size();
    auto val = [&](long i) { return i < 0 || i >= n ? 0.0 : u[i]; };
    auto margin = [&](long i, long j) {
        const double ui = val(i), uj = val(j);
        const double mi = std::min(ui, 0.0), mj = std::min(uj, 0.0);
        const double d = mi - mj;
        return (ui - uj) * d - d * d;
    };
    SignInequalityReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    const long total = (n + 2) * (n + 2);
    if (total <= sample_pairs) {
        rep.exhaustive = true;
        for (long i = -1; i <= n; ++i)
            for (long j = -1; j <= n; ++j) {
                const double m = margin(i, j);
                rep.worst_margin = std::min(rep.worst_margin, m);
                ++rep.pairs_checked;
            }
    } else {
        std::mt19937_64 rng(seed);
        for (long k = 0; k < sample_pairs; ++k) {
            const long i = static_cast<long>(rng() % (n + 2)) - 1;
            const long j = static_cast<long>(rng() % (n + 2)) - 1;
            const double m = margin(i, j);
            rep.worst_margin = std::min(rep.worst_margin, m);
            ++rep.pairs_checked;
        }
    }
    rep.holds = rep.worst_margin >= -1e-15;
    return rep;
}

}  // namespace oscilap
