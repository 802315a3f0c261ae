#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "oscilap/grid.hpp"
#include "oscilap/nonlinearity.hpp"
#include "oscilap/operator.hpp"

namespace oscilap {

/// Discrete embedding constant C1 = max ||u||_L2 / ||u||_X over nodal vectors,
/// with the lumped L2 norm (the same quadrature the energy uses for the G-term,
/// which makes the coercivity lower bound a true bound for the discrete energy).
/// Equals sqrt(h / lambda_min(A)).
inline double measure_embedding_constant(const Eigen::MatrixXd& A, double h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    if (!(lam_min > 0.0))
        throw std::logic_error("stiffness matrix is not positive definite");
    return std::sqrt(h / lam_min);
}

struct EnergyModel {
    Grid grid;
    Eigen::MatrixXd A;   // Gagliardo form
    Eigen::MatrixXd Mc;  // consistent mass, used by the quadratic mu-term
    double mu = 0.0;
    std::shared_ptr<const TruncatedG> gk;  // null means g_k == 0
    double C1 = 0.0;                       // measured embedding constant
};

inline double energy(const EnergyModel& m, const NodalVector& u) {
    double e = 0.5 * u.dot(m.A * u) + 0.5 * m.mu * u.dot(m.Mc * u);
    if (m.gk) {
        const double h = m.grid.spacing;
        double s = 0.0;
        for (int i = 0; i < u.size(); ++i) s += m.gk->G(u[i]);
        e -= h * s;
    }
    return e;
}

inline NodalVector gradient(const EnergyModel& m, const NodalVector& u) {
    NodalVector g = m.A * u + m.mu * (m.Mc * u);
    if (m.gk) {
        const double h = m.grid.spacing;
        for (int i = 0; i < u.size(); ++i) g[i] -= h * m.gk->g(u[i]);
    }
    return g;
}

/// -1/2 (C1 * sup|g_k| * |Omega|^(1/2))^2, a true bound for the discrete energy:
/// h*sum G_k(u_i) <= sup|g_k| * sqrt(2L) * ||u||_{L2,lumped} <= ... <= coercive tail.
inline double lower_bound(const EnergyModel& m) {
    if (!m.gk) return 0.0;
    const double omega = 2.0 * m.grid.half_width;
    const double b = m.C1 * m.gk->sup_abs() * std::sqrt(omega);
    return -0.5 * b * b;
}

struct BumpSpec {
    double plateau_radius;  // R
    double height;          // zeta
    double center = 0.0;
};

/// Plateau of height zeta for |x-c| <= R, linear ramp to zero at |x-c| = 2R.
inline NodalVector build_bump(const Grid& grid, const BumpSpec& b) {
    if (!(b.plateau_radius > 0.0) || !(b.height > 0.0))
        throw std::invalid_argument("bump radius and height must be positive");
    if (2.0 * b.plateau_radius > grid.half_width - std::abs(b.center))
        throw std::invalid_argument("bump support exceeds the domain");
    return interpolate(grid, [&](double x) {
        const double d = std::abs(x - b.center);
        if (d <= b.plateau_radius) return b.height;
        if (d <= 2.0 * b.plateau_radius)
            return b.height * (2.0 * b.plateau_radius - d) / b.plateau_radius;
        return 0.0;
    });
}

/// Measured constant of ||z_zeta||_X^2 = C * zeta^2 (exact equality by quadratic
/// homogeneity of the assembled form).
inline double bump_energy_constant(const Grid& grid, const Eigen::MatrixXd& A, double R,
                                   double center = 0.0) {
    const NodalVector z1 = build_bump(grid, BumpSpec{R, 1.0, center});
    return z1.dot(A * z1);
}

}  // namespace oscilap
