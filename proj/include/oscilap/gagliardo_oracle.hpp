#pragma once

#include <cmath>
#include <vector>

#include "oscilap/grid.hpp"
#include "oscilap/operator.hpp"
#include "oscilap/quadrature.hpp"

namespace oscilap {

/// Brute-force evaluation of the Gagliardo double integral for the piecewise-linear
/// function represented by u, on a refinement-times finer cell decomposition.
/// Deliberately independent of the stiffness assembly path: plain tensor 2-point
/// Gauss for separated cell pairs, closed forms where u is linear across a pair,
/// and the exact exterior reduction. Testing use only; O(m^2) in the fine cells.
inline double oracle_gagliardo(const Grid& grid, const NodalVector& u, double s,
                               int refinement) {
    if (refinement < 1) throw std::invalid_argument("oracle_gagliardo: refinement >= 1");
    const double L = grid.half_width;
    const int m = (grid.n_interior + 1) * refinement;
    const double hf = 2.0 * L / m;
    const double g = 1.0 / std::sqrt(3.0);  // 2-point Gauss abscissa on [-1,1]

    std::vector<double> xa(m), xb(m), ua(m), ub(m), slope(m);
    for (int i = 0; i < m; ++i) {
        const double x0 = -L + i * hf, x1 = x0 + hf, mid = 0.5 * (x0 + x1);
        xa[i] = mid - 0.5 * hf * g;
        xb[i] = mid + 0.5 * hf * g;
        ua[i] = eval_nodal(grid, u, xa[i]);
        ub[i] = eval_nodal(grid, u, xb[i]);
        const double v0 = (i == 0) ? 0.0 : eval_nodal(grid, u, x0);
        const double v1 = (i == m - 1) ? 0.0 : eval_nodal(grid, u, x1);
        slope[i] = (v1 - v0) / hf;
    }

    const double c_self = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    const double self_block = c_self * std::pow(hf, 3.0 - 2.0 * s);
    // int over adjacent cells of (x-y)^(1-2s), both cells in one linear piece
    const double adj_block = (std::pow(2.0 * hf, 3.0 - 2.0 * s) -
                              2.0 * std::pow(hf, 3.0 - 2.0 * s)) /
                             ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    const double w = 0.5 * hf;  // Gauss-2 weight scaled to cell width
    const double ex = -1.0 - 2.0 * s;

    double total = 0.0;
    for (int i = 0; i < m; ++i) total += slope[i] * slope[i] * self_block;

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            double contrib;
            if (j == i + 1 && (i + 1) % refinement != 0) {
                // same coarse element: u is a single linear piece across both cells
                contrib = slope[i] * slope[i] * adj_block;
            } else {
                double sum = 0.0;
                const double d1 = ua[i] - ua[j], d2 = ua[i] - ub[j];
                const double d3 = ub[i] - ua[j], d4 = ub[i] - ub[j];
                sum += d1 * d1 * std::pow(std::abs(xa[i] - xa[j]), ex);
                sum += d2 * d2 * std::pow(std::abs(xa[i] - xb[j]), ex);
                sum += d3 * d3 * std::pow(std::abs(xb[i] - xa[j]), ex);
                sum += d4 * d4 * std::pow(std::abs(xb[i] - xb[j]), ex);
                contrib = w * w * sum;
            }
            total += 2.0 * contrib;
        }
    }

    // interaction with the exterior: 2 * int u^2 rho, element by element
    for (int e = 0; e <= grid.n_interior; ++e) {
        const double x0 = -L + e * grid.spacing, x1 = x0 + grid.spacing;
        auto f = [&](double x) {
            // x can round onto the boundary under deep bisection; u vanishes there
            const double v = eval_nodal(grid, u, x);
            return v == 0.0 ? 0.0 : v * v * detail::exterior_density(grid, s, x);
        };
        total += 2.0 * adaptive_integrate(f, x0, x1, 8, 1e-13, 100000);
    }
    return total;
}

}  // namespace oscilap
