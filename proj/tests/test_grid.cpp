#include <catch2/catch_amalgamated.hpp>

#include "oscilap/grid.hpp"

using namespace oscilap;

TEST_CASE("build_grid computes spacing and nodes") {
    const Grid g = build_grid(1.0, 3);
    CHECK(g.spacing == 0.5);
    CHECK(g.node(0) == -0.5);
    CHECK(g.node(1) == 0.0);
    CHECK(g.node(2) == 0.5);

    const Grid g2 = build_grid(2.5, 9);
    CHECK(g2.spacing == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(g2.node(8) == Catch::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("build_grid rejects bad arguments") {
    CHECK_THROWS_AS(build_grid(0.0, 9), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(-1.0, 9), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, 2), std::invalid_argument);
}

TEST_CASE("interpolate samples nodal values and rejects non-finite ones") {
    const Grid g = build_grid(1.0, 3);
    const NodalVector u = interpolate(g, [](double x) { return x * x; });
    CHECK(u[0] == 0.25);
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.25);
    CHECK_THROWS_AS(interpolate(g, [](double) { return std::nan(""); }),
                    std::invalid_argument);
}

TEST_CASE("eval_nodal is piecewise linear with zero extension") {
    const Grid g = build_grid(1.0, 3);
    NodalVector u(3);
    u << 1.0, 2.0, -1.0;
    CHECK(eval_nodal(g, u, -0.5) == 1.0);
    CHECK(eval_nodal(g, u, 0.0) == 2.0);
    CHECK(eval_nodal(g, u, -0.25) == Catch::Approx(1.5));
    CHECK(eval_nodal(g, u, 0.25) == Catch::Approx(0.5));
    // linear ramp to the zero boundary value
    CHECK(eval_nodal(g, u, -0.75) == Catch::Approx(0.5));
    CHECK(eval_nodal(g, u, 0.75) == Catch::Approx(-0.5));
    CHECK(eval_nodal(g, u, -1.0) == 0.0);
    CHECK(eval_nodal(g, u, 1.7) == 0.0);
    CHECK(eval_nodal(g, u, -3.0) == 0.0);
}

TEST_CASE("linf_norm") {
    NodalVector u(3);
    u << 1.0, -4.0, 2.0;
    CHECK(linf_norm(u) == 4.0);
    CHECK(linf_norm(NodalVector()) == 0.0);
}
