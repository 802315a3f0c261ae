#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oscilap/cli.hpp"

using namespace oscilap;
namespace fs = std::filesystem;

namespace {

void report(int num, const char* name, bool ok) {
    std::printf("criterion %d (%s): %s\n", num, name, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
}

const DiscreteOperator& op257() {
    static DiscreteOperator op = make_discrete_operator(build_grid(1.0, 257), 0.4);
    return op;
}

NonlinearitySpec origin_spec() {
    NonlinearitySpec s;  // sqrt(t) * (1/2 + sin(1/t))
    s.lambda = 0.0;
    s.p = 0.5;
    return s;
}

NonlinearitySpec infinity_spec() {
    NonlinearitySpec s;  // t^2 * (1/2 + sin(t^1.5))
    s.family = Family::infinity_oscillatory;
    s.alpha = 2.0;
    s.beta = 1.5;
    s.lambda = 0.0;
    return s;
}

LadderOptions origin_opts() {
    LadderOptions o;
    o.search_lo = 9e-4;
    o.search_hi = 5e-3;
    o.samples_per_decade = 32;
    return o;
}

LadderOptions infinity_opts() {
    LadderOptions o;
    o.search_lo = 1.0;
    o.search_hi = 40.0;
    return o;
}

const LadderResult& origin_result() {
    static LadderResult r = run_origin_ladder(origin_spec(),
                                              Construction::power_shift_origin, op257(), 3,
                                              origin_opts());
    return r;
}

const LadderResult& infinity_result() {
    static LadderResult r = run_infinity_ladder(infinity_spec(),
                                                Construction::power_shift_infinity, op257(),
                                                3, infinity_opts());
    return r;
}

NodalVector smooth_random(const Grid& g, std::mt19937_64& rng) {
    double c[4];
    for (double& v : c) v = 2.0 * u01(rng) - 1.0;
    return interpolate(g, [&](double x) {
        const double t = M_PI * (x + g.half_width) / (2.0 * g.half_width);
        return c[0] * std::sin(t) + c[1] * std::sin(2 * t) + c[2] * std::sin(3 * t) +
               c[3] * std::sin(4 * t);
    });
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: operator correctness") {
    bool ok = true;
    std::mt19937_64 rng(2026);
    for (int n : {33, 65}) {
        const Grid g = build_grid(1.0, n);
        for (double s : {0.25, 0.4, 0.75}) {
            const StiffnessForm f = assemble_stiffness(g, s);
            ok = ok && (f.A - f.A.transpose()).cwiseAbs().maxCoeff() == 0.0;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.A, Eigen::EigenvaluesOnly);
            ok = ok && es.eigenvalues().minCoeff() > 0.0;
            std::vector<NodalVector> us;
            us.push_back(interpolate(g, [&](double x) {
                return std::max(0.0, 1.0 - std::abs(x) / g.spacing);
            }));
            us.push_back(build_bump(g, BumpSpec{0.3, 1.0, 0.0}));
            for (int t = 0; t < 5; ++t) us.push_back(smooth_random(g, rng));
            for (const NodalVector& u : us) {
                const double quad = u.dot(f.A * u);
                const double oracle = oracle_gagliardo(g, u, s, 8);
                ok = ok && std::abs(quad - oracle) <= 0.01 * std::abs(oracle);
            }
        }
    }
    report(1, "operator vs oracle, symmetry, positivity", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 2: gradient consistency") {
    const Grid g = build_grid(1.0, 65);
    const Eigen::MatrixXd A = assemble_stiffness(g, 0.4).A;
    const Eigen::MatrixXd Mc = assemble_mass(g, false).M;
    const double C1 = measure_embedding_constant(A, g.spacing);
    std::vector<EnergyModel> models;
    auto co = std::make_shared<const CompositeG>(
        compose_g(origin_spec(), Construction::power_shift_origin));
    models.push_back({g, A, Mc, co->mu(), std::make_shared<const TruncatedG>(co, 0.25), C1});
    auto ci = std::make_shared<const CompositeG>(
        compose_g(infinity_spec(), Construction::power_shift_infinity));
    models.push_back({g, A, Mc, ci->mu(), std::make_shared<const TruncatedG>(ci, 3.0), C1});
    models.push_back({g, A, Mc, 1.0, nullptr, C1});

    bool ok = true;
    int pairs = 0;
    std::mt19937_64 rng(7);
    for (const auto& m : models) {
        const double eta = m.gk ? m.gk->eta() : 1.0;
        for (int trial = 0; trial < 34; ++trial) {
            NodalVector u(65), v(65);
            for (int i = 0; i < 65; ++i) {
                u[i] = 0.05 * eta + 0.85 * eta * u01(rng);
                v[i] = 2.0 * u01(rng) - 1.0;
            }
            const double eps = 1e-6;  // balances FD truncation against roundoff
            const double fd = (energy(m, u + eps * v) - energy(m, u - eps * v)) / (2.0 * eps);
            const double an = gradient(m, u).dot(v);
            ok = ok && std::abs(fd - an) <= 1e-6 * std::max(1e-12, std::abs(an));
            ++pairs;
        }
    }
    ok = ok && pairs >= 100;
    report(2, "gradient vs central differences", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 3: bump norm homogeneity and mesh stability") {
    bool ok = true;
    const double R = 0.25;
    const Grid g257 = op257().grid;
    double base = 0.0;
    for (double zeta : {0.1, 0.01, 0.001}) {
        const NodalVector z = build_bump(g257, BumpSpec{R, zeta, 0.0});
        const double ratio = z.dot(op257().A * z) / (zeta * zeta);
        if (base == 0.0) base = ratio;
        ok = ok && std::abs(ratio - base) <= 1e-12 * base;
    }
    const Grid g513 = build_grid(1.0, 513);
    const Eigen::MatrixXd A513 = assemble_stiffness(g513, 0.4).A;
    const double c513 = bump_energy_constant(g513, A513, R);
    ok = ok && std::abs(c513 - base) <= 0.02 * base;
    report(3, "bump quadratic homogeneity, 257 vs 513", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 4: pointwise sign inequality") {
    bool ok = true;
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        NodalVector u(257);
        for (int i = 0; i < 257; ++i) u[i] = 2.0 * u01(rng) - 1.0;
        const SignInequalityReport rep = check_sign_inequality(u, 10000, rng());
        ok = ok && rep.holds && rep.pairs_checked >= 10000;
    }
    for (int trial = 0; trial < 20; ++trial) {
        NodalVector u(15);
        for (int i = 0; i < 15; ++i) u[i] = 2.0 * u01(rng) - 1.0;
        const SignInequalityReport rep = check_sign_inequality(u, 10000, rng());
        ok = ok && rep.holds && rep.exhaustive;
    }
    report(4, "|u|-vs-u form inequality, sampled and exhaustive", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 5: oscillation-at-origin pipeline") {
    const LadderResult& res = origin_result();
    bool ok = res.rungs.size() == 3;
    if (ok) {
        const auto& r = res.rungs;
        ok = ok && r[0].sol.energy_value < r[1].sol.energy_value &&
             r[1].sol.energy_value < r[2].sol.energy_value && r[2].sol.energy_value < 0.0;
        for (int k = 0; k < 3; ++k) {
            ok = ok && r[k].sol.u.minCoeff() >= 0.0;
            ok = ok && r[k].sol.u.maxCoeff() <= r[k].delta + 1e-10 * r[k].eta;
            ok = ok && r[k].sol.energy_value <= r[k].certificate;
        }
        ok = ok && r[1].sol.linf < r[0].sol.linf && r[2].sol.linf < r[1].sol.linf;
        ok = ok && r[1].sol.xnorm < r[0].sol.xnorm && r[2].sol.xnorm < r[1].sol.xnorm;
    }
    report(5, "three ordered small solutions", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 6: oscillation-at-infinity pipeline") {
    const LadderResult& res = infinity_result();
    bool ok = res.rungs.size() == 3;
    if (ok) {
        const auto& r = res.rungs;
        ok = ok && r[1].sol.energy_value < r[0].sol.energy_value &&
             r[2].sol.energy_value < r[1].sol.energy_value;
        ok = ok && r[1].sol.linf > r[0].sol.linf && r[2].sol.linf > r[1].sol.linf;
        const NormClaimVerdict nc = verify_norm_claims(res);
        ok = ok && nc.ok;
    }
    report(6, "three ordered large solutions", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 7: perturbation window") {
    bool ok = true;
    double lt = 0.0;
    try {
        LadderResult base = origin_result();  // copy: the estimator fills lp_p
        const WindowEstimate w = estimate_lambda_window(base, 0.5);
        lt = w.lambda_tilde.back();
        ok = lt > 0.0;
    } catch (const std::exception&) {
        ok = false;
    }
    if (ok) {
        const std::vector<double> lambdas = {-lt, -0.5 * lt, 0.0, 0.5 * lt, lt};
        const SweepResult sweep =
            lambda_sweep(origin_spec(), Construction::power_shift_origin, op257(),
                         LadderDirection::origin, 3, lambdas, origin_opts(), 0.5);
        for (const auto& row : sweep.rows)
            ok = ok && row.ran_ok && row.distinct_count >= 3 && row.ordering_ok;
        ok = ok && sweep.window_covered;
    }
    report(7, "three solutions across the estimated lambda window", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 8: solver vs exhaustive search") {
    const EnergyModel toy = make_toy_model();
    const BoxConstraint box{1.0};
    std::vector<std::pair<std::string, NodalVector>> starts;
    starts.emplace_back("zero", NodalVector::Zero(3));
    starts.emplace_back("mid", NodalVector::Constant(3, 0.5));
    for (auto& st : random_starts(3, box, 3, 99)) starts.emplace_back(std::move(st));
    const SolutionRecord rec = minimize_in_box(toy, box, starts, SolverOptions{});
    const NodalVector oracle = toy_grid_search(toy, 1.0, 1e-3);
    const bool ok = (rec.u - oracle).cwiseAbs().maxCoeff() <= 2e-3;
    report(8, "3-node toy matches grid search", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 9: coercivity bound containment") {
    const bool ok = origin_result().bound_slack >= -1e-9 &&
                    infinity_result().bound_slack >= -1e-9;
    report(9, "all iterates above the energy lower bound", ok);
    REQUIRE(ok);
}

TEST_CASE("criterion 10: end-to-end determinism") {
    const fs::path dir_a = fs::temp_directory_path() / "oscilap_acc_det_a";
    const fs::path dir_b = fs::temp_directory_path() / "oscilap_acc_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    fs::create_directories(dir_a);
    fs::create_directories(dir_b);
    ordered_json j;
    j["domain"] = {{"n_interior", 65}};
    j["construction"] = {{"name", "power-shift-origin"}, {"lambda", 0.0}, {"p", 0.5}};
    j["ladder"] = {{"direction", "origin"},
                   {"K", 3},
                   {"search_lo", 9e-4},
                   {"search_hi", 5e-3},
                   {"samples_per_decade", 32}};
    j["output"] = {{"directory", dir_a.string()}};
    const fs::path cfg = dir_a / "config.json";
    std::ofstream(cfg) << j.dump(2) << "\n";
    const std::string base = std::string(OSCILAP_CLI_PATH) + " ladder --config " +
                             cfg.string() + " --seed 7 ";
    bool ok = std::system((base + "> /dev/null 2>&1").c_str()) == 0;
    ok = ok &&
         std::system((base + "--out " + dir_b.string() + " > /dev/null 2>&1").c_str()) == 0;
    const std::string a = slurp(dir_a / "ladder_summary.csv");
    ok = ok && !a.empty() && a == slurp(dir_b / "ladder_summary.csv");
    report(10, "identical seed and config give identical summaries", ok);
    REQUIRE(ok);
}
