#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oscilap {

using NodalVector = Eigen::VectorXd;

/// Uniform grid on (-L, L). Interior nodes only; the function represented by a
/// nodal vector is piecewise linear, zero at +-L and identically zero outside.
struct Grid {
    double half_width;
    int n_interior;
    double spacing;

    double node(int i) const { return -half_width + (i + 1) * spacing; }
};

inline Grid build_grid(double L, int n_interior) {
    if (!(L > 0.0)) throw std::invalid_argument("build_grid: half_width must be positive");
    if (n_interior < 3) throw std::invalid_argument("build_grid: need at least 3 interior nodes");
    return Grid{L, n_interior, 2.0 * L / (n_interior + 1)};
}

template <class F>
NodalVector interpolate(const Grid& grid, const F& fn) {
    NodalVector u(grid.n_interior);
    for (int i = 0; i < grid.n_interior; ++i) {
        const double v = fn(grid.node(i));
        if (!std::isfinite(v))
            throw std::invalid_argument("interpolate: non-finite value at node x=" +
                                        std::to_string(grid.node(i)));
        u[i] = v;
    }
    return u;
}

inline double linf_norm(const NodalVector& u) {
    return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff();
}

/// Piecewise-linear evaluation with zero extension outside the domain.
inline double eval_nodal(const Grid& grid, const NodalVector& u, double x) {
    const double L = grid.half_width, h = grid.spacing;
    if (x <= -L || x >= L) return 0.0;
    const double t = (x + L) / h;
    const int j = static_cast<int>(std::floor(t));
    const double frac = t - j;
    const double vl = (j >= 1 && j <= grid.n_interior) ? u[j - 1] : 0.0;
    const double vr = (j + 1 >= 1 && j + 1 <= grid.n_interior) ? u[j] : 0.0;
    return vl * (1.0 - frac) + vr * frac;
}

}  // namespace oscilap
