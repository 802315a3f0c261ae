#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>

#include "oscilap/energy.hpp"
#include "oscilap/operator.hpp"
#include "oscilap/solver.hpp"

using namespace oscilap;

namespace {

EnergyModel small_model(int n = 17, double eta = 0.25) {
    const Grid grid = build_grid(1.0, n);
    NonlinearitySpec s;
    s.family = Family::origin_oscillatory;
    s.alpha = 0.5;
    s.beta = 1.0;
    s.a = 0.5;
    s.lambda = 0.0;
    s.mu_lin = 0.1;
    auto comp = std::make_shared<const CompositeG>(compose_g(s, Construction::power_shift_origin));
    const Eigen::MatrixXd A = assemble_stiffness(grid, 0.4).A;
    const Eigen::MatrixXd Mc = assemble_mass(grid, false).M;
    return EnergyModel{grid, A, Mc, comp->mu(),
                       std::make_shared<const TruncatedG>(comp, eta),
                       measure_embedding_constant(A, grid.spacing)};
}

}  // namespace

TEST_CASE("energy of the zero vector is zero") {
    const EnergyModel m = small_model();
    CHECK(energy(m, NodalVector::Zero(17)) == 0.0);
}

TEST_CASE("the nonlinear term subtracts the lumped quadrature of G") {
    EnergyModel m = small_model();
    EnergyModel quad = m;
    quad.gk = nullptr;
    std::mt19937_64 rng(3);
    NodalVector u(17);
    for (int i = 0; i < 17; ++i) u[i] = 0.3 * u01(rng);
    double gsum = 0.0;
    for (int i = 0; i < 17; ++i) gsum += m.gk->G(u[i]);
    CHECK(energy(m, u) ==
          Catch::Approx(energy(quad, u) - m.grid.spacing * gsum).epsilon(1e-13));
}

TEST_CASE("gradient matches central finite differences") {
    const EnergyModel m = small_model();
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        NodalVector u(17), v(17);
        for (int i = 0; i < 17; ++i) {
            u[i] = 0.01 + 0.2 * u01(rng);
            v[i] = 2.0 * u01(rng) - 1.0;
        }
        const double eps = 1e-6;
        const double fd = (energy(m, u + eps * v) - energy(m, u - eps * v)) / (2.0 * eps);
        CHECK(gradient(m, u).dot(v) == Catch::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("bump nodal values follow the plateau-ramp profile") {
    const Grid g = build_grid(1.0, 7);  // h = 0.25, nodes at -0.75 .. 0.75
    const NodalVector z = build_bump(g, BumpSpec{0.25, 2.0, 0.0});
    CHECK(z[3] == 2.0);                      // x = 0, plateau
    CHECK(z[2] == 2.0);                      // x = -0.25, plateau edge
    CHECK(z[4] == 2.0);
    CHECK(z[1] == 0.0);                      // x = -0.5, ramp end
    CHECK(z[0] == 0.0);
    const Grid g15 = build_grid(1.0, 15);  // h = 0.125
    const NodalVector z2 = build_bump(g15, BumpSpec{0.25, 1.0, 0.0});
    CHECK(z2[10] == Catch::Approx(0.5));     // x = 0.375, halfway down the ramp
    CHECK_THROWS_AS(build_bump(g, BumpSpec{0.3, 1.0, 0.9}), std::invalid_argument);
    CHECK_THROWS_AS(build_bump(g, BumpSpec{-0.1, 1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("bump energy constant is exactly homogeneous in the height") {
    const Grid g = build_grid(1.0, 33);
    const Eigen::MatrixXd A = assemble_stiffness(g, 0.4).A;
    const double c = bump_energy_constant(g, A, 0.3);
    CHECK(c > 0.0);
    for (double zeta : {0.1, 0.003}) {
        const NodalVector z = build_bump(g, BumpSpec{0.3, zeta, 0.0});
        CHECK(z.dot(A * z) / (zeta * zeta) == Catch::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("lower bound formula and containment") {
    const EnergyModel m = small_model();
    const double b = m.C1 * m.gk->sup_abs() * std::sqrt(2.0 * m.grid.half_width);
    CHECK(lower_bound(m) == Catch::Approx(-0.5 * b * b).epsilon(1e-14));
    EnergyModel quad = m;
    quad.gk = nullptr;
    CHECK(lower_bound(quad) == 0.0);

    // every iterate of a minimization stays above the bound
    const BoxConstraint box{m.gk->eta()};
    std::vector<std::pair<std::string, NodalVector>> starts;
    starts.emplace_back("zero", NodalVector::Zero(17));
    for (auto& st : random_starts(17, box, 3, 21)) starts.emplace_back(std::move(st));
    std::vector<SolutionRecord> all;
    minimize_in_box(m, box, starts, SolverOptions{}, &all);
    for (const auto& rec : all) CHECK(rec.min_iterate_energy >= lower_bound(m) - 1e-9);
}

TEST_CASE("embedding constant rejects indefinite matrices") {
    Eigen::MatrixXd bad = -Eigen::MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(measure_embedding_constant(bad, 0.1), std::logic_error);
}
