#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "oscilap/cli.hpp"
#include "oscilap/solver.hpp"

using namespace oscilap;

TEST_CASE("project clamps into the box") {
    NodalVector u(4);
    u << -1.0, 0.3, 2.0, 0.9;
    const NodalVector p = project(u, BoxConstraint{1.0});
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 0.3);
    CHECK(p[2] == 1.0);
    CHECK(p[3] == 0.9);
}

TEST_CASE("pure quadratic energy minimizes to zero") {
    const Grid grid = build_grid(1.0, 9);
    const Eigen::MatrixXd A = assemble_stiffness(grid, 0.4).A;
    const Eigen::MatrixXd Mc = assemble_mass(grid, false).M;
    const EnergyModel m{grid, A, Mc, 1.0, nullptr,
                        measure_embedding_constant(A, grid.spacing)};
    const BoxConstraint box{1.0};
    std::vector<std::pair<std::string, NodalVector>> starts;
    for (auto& st : random_starts(9, box, 4, 77)) starts.emplace_back(std::move(st));
    const SolutionRecord rec = minimize_in_box(m, box, starts, SolverOptions{});
    CHECK(rec.converged);
    CHECK(rec.linf <= 1e-6);
    CHECK(rec.energy_value == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("solver matches the exhaustive grid-search oracle on the 3-node toy") {
    const EnergyModel toy = make_toy_model();
    const BoxConstraint box{1.0};
    std::vector<std::pair<std::string, NodalVector>> starts;
    starts.emplace_back("zero", NodalVector::Zero(3));
    starts.emplace_back("mid", NodalVector::Constant(3, 0.5));
    for (auto& st : random_starts(3, box, 3, 99)) starts.emplace_back(std::move(st));
    const SolutionRecord rec = minimize_in_box(toy, box, starts, SolverOptions{});
    const NodalVector oracle = toy_grid_search(toy, 1.0, 1e-3);
    CHECK((rec.u - oracle).cwiseAbs().maxCoeff() <= 2e-3);
    CHECK(rec.converged);
}

TEST_CASE("returned energy never exceeds any start energy") {
    const EnergyModel toy = make_toy_model();
    const BoxConstraint box{1.0};
    std::vector<std::pair<std::string, NodalVector>> starts;
    starts.emplace_back("zero", NodalVector::Zero(3));
    for (auto& st : random_starts(3, box, 5, 4)) starts.emplace_back(std::move(st));
    const SolutionRecord rec = minimize_in_box(toy, box, starts, SolverOptions{});
    for (const auto& [label, u0] : starts)
        CHECK(rec.energy_value <= energy(toy, project(u0, box)) + 1e-12);
}

TEST_CASE("KKT residual is small at a converged solution") {
    const EnergyModel toy = make_toy_model();
    const BoxConstraint box{1.0};
    std::vector<std::pair<std::string, NodalVector>> starts;
    starts.emplace_back("mid", NodalVector::Constant(3, 0.5));
    const SolutionRecord rec = minimize_in_box(toy, box, starts, SolverOptions{});
    CHECK(residual_norm(toy, rec) <= 1e-6);
}

TEST_CASE("zero iteration budget reports non-convergence with the best partial") {
    const EnergyModel toy = make_toy_model();
    const BoxConstraint box{1.0};
    std::vector<std::pair<std::string, NodalVector>> starts;
    starts.emplace_back("mid", NodalVector::Constant(3, 0.5));
    SolverOptions opts;
    opts.max_iter = 0;
    try {
        minimize_in_box(toy, box, starts, opts);
        FAIL("expected MinimizeFailure");
    } catch (const MinimizeFailure& e) {
        CHECK(e.best_partial.start_label == "mid");
    }
}

TEST_CASE("box membership check") {
    SolutionRecord rec;
    rec.u = NodalVector::Constant(3, 0.4);
    rec.eta = 1.0;
    const BoxMembership in = check_box_membership(rec, 0.5, 1e-10);
    CHECK(in.inside);
    CHECK(in.margin == Catch::Approx(0.1));
    const BoxMembership out = check_box_membership(rec, 0.3, 1e-10);
    CHECK_FALSE(out.inside);
    CHECK_THROWS_AS(check_box_membership(rec, 1.5, 1e-10), std::invalid_argument);
}

TEST_CASE("distinctness groups nearby records and keeps the lowest energy") {
    auto make = [](double v, double e) {
        SolutionRecord r;
        r.u = NodalVector::Constant(3, v);
        r.energy_value = e;
        return r;
    };
    const std::vector<SolutionRecord> recs = {make(0.10, -1.0), make(0.1005, -2.0),
                                              make(0.50, -0.5)};
    const DistinctnessGrouping grouping = distinctness(recs, 0.01);
    REQUIRE(grouping.representatives.size() == 2);
    CHECK(grouping.group_of[0] == grouping.group_of[1]);
    CHECK(grouping.group_of[2] != grouping.group_of[0]);
    CHECK(grouping.representatives[0] == 1);  // lower energy within the group
}

TEST_CASE("random starts are deterministic in the seed and feasible") {
    const BoxConstraint box{0.7};
    const auto a = random_starts(5, box, 3, 1234);
    const auto b = random_starts(5, box, 3, 1234);
    REQUIRE(a.size() == 3);
    for (size_t k = 0; k < 3; ++k) {
        CHECK((a[k].second - b[k].second).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a[k].second.minCoeff() >= 0.0);
        CHECK(a[k].second.maxCoeff() <= 0.7);
    }
    const auto c = random_starts(5, box, 3, 4321);
    CHECK((a[0].second - c[0].second).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("toy grid search agrees with itself at finer resolution") {
    const EnergyModel toy = make_toy_model();
    const NodalVector coarse = toy_grid_search(toy, 1.0, 2e-3);
    const NodalVector fine = toy_grid_search(toy, 1.0, 5e-4);
    CHECK((coarse - fine).cwiseAbs().maxCoeff() <= 4e-3);
}
