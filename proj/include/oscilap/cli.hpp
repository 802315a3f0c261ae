#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oscilap/config.hpp"
#include "oscilap/energy.hpp"
#include "oscilap/errors.hpp"
#include "oscilap/gagliardo_oracle.hpp"
#include "oscilap/io.hpp"
#include "oscilap/ladder.hpp"
#include "oscilap/solver.hpp"

namespace oscilap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

namespace detail {

inline int map_numerical_error(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalFailure;
}

}  // namespace detail

/// The 3-node toy model used by the solver-oracle equivalence check: s=0.4, L=1,
/// mu=0.2, g_k(t) = -t clamped at eta=1.
inline EnergyModel make_toy_model() {
    const Grid grid = build_grid(1.0, 3);
    NonlinearitySpec spec;
    spec.family = Family::custom_table;
    spec.table = {{0.0, 0.0}, {100.0, -200.0}};  // f(t) = -2t
    spec.lambda = 0.0;
    spec.mu_lin = 1.0;  // g = t + f(t) = -t
    auto comp = std::make_shared<const CompositeG>(compose_g(spec, Construction::power_shift_origin));
    auto gk = std::make_shared<const TruncatedG>(comp, 1.0);
    const Eigen::MatrixXd A = assemble_stiffness(grid, 0.4).A;
    const Eigen::MatrixXd Mc = assemble_mass(grid, false).M;
    return EnergyModel{grid, A, Mc, 0.2, gk, measure_embedding_constant(A, grid.spacing)};
}

/// Exhaustive box search refined by nested zooms down to the requested resolution.
inline NodalVector toy_grid_search(const EnergyModel& m, double eta, double resolution) {
    NodalVector best = NodalVector::Zero(3);
    double best_e = energy(m, best);
    double lo[3] = {0.0, 0.0, 0.0}, hi[3] = {eta, eta, eta};
    double step = eta / 50.0;
    while (true) {
        NodalVector u(3);
        for (double x0 = lo[0]; x0 <= hi[0] + 1e-15; x0 += step) {
            for (double x1 = lo[1]; x1 <= hi[1] + 1e-15; x1 += step) {
                for (double x2 = lo[2]; x2 <= hi[2] + 1e-15; x2 += step) {
                    u << std::min(x0, eta), std::min(x1, eta), std::min(x2, eta);
                    const double e = energy(m, u);
                    if (e < best_e) {
                        best_e = e;
                        best = u;
                    }
                }
            }
        }
        if (step <= resolution) break;
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::max(0.0, best[i] - 2.0 * step);
            hi[i] = std::min(eta, best[i] + 2.0 * step);
        }
        step = std::max(resolution, step / 10.0);
    }
    return best;
}

inline int cmd_assemble_check(const RunConfig& cfg, bool dump_matrix = false) {
    ordered_json report;
    bool pass = true;
    try {
        const Grid grid = build_grid(cfg.half_width, cfg.n_interior);
        const StiffnessForm form = assemble_stiffness(grid, cfg.s);
        const MassMatrix mc = assemble_mass(grid, false);
        const MassMatrix ml = assemble_mass(grid, true);

        const double asym = (form.A - form.A.transpose()).cwiseAbs().maxCoeff();
        report["symmetry_defect"] = asym;
        const bool sym_ok = asym == 0.0;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form.A, Eigen::EigenvaluesOnly);
        const double lam_min = es.eigenvalues().minCoeff();
        report["min_eigenvalue"] = lam_min;
        const bool pd_ok = lam_min > 1e-12 * form.A.norm();

        const NodalVector hat = interpolate(grid, [&](double x) {
            return std::max(0.0, 1.0 - std::abs(x) / (grid.spacing));
        });
        const double quad_form = hat.dot(form.A * hat);
        const double oracle = oracle_gagliardo(grid, hat, cfg.s, 8);
        const double rel = std::abs(quad_form - oracle) / oracle;
        report["oracle_relative_error"] = rel;
        const bool oracle_ok = rel <= 0.01;

        bool mass_ok = true;
        for (int i = 0; i < grid.n_interior; ++i)
            mass_ok = mass_ok && std::abs(ml.M(i, i) - grid.spacing) < 1e-15;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esm(mc.M, Eigen::EigenvaluesOnly);
        mass_ok = mass_ok && esm.eigenvalues().minCoeff() > 0.0;
        report["mass_ok"] = mass_ok;

        report["symmetry_ok"] = sym_ok;
        report["pd_ok"] = pd_ok;
        report["oracle_ok"] = oracle_ok;
        pass = sym_ok && pd_ok && oracle_ok && mass_ok;

        if (dump_matrix) {
            std::ostringstream csv;
            for (int i = 0; i < grid.n_interior; ++i) {
                for (int j = 0; j < grid.n_interior; ++j)
                    csv << (j ? "," : "") << fmt_full(form.A(i, j));
                csv << "\n";
            }
            atomic_write(std::filesystem::path(cfg.out_dir) / "stiffness.csv", csv.str());
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        return detail::map_numerical_error(e);
    }
    report["pass"] = pass;
    atomic_write(std::filesystem::path(cfg.out_dir) / "assemble_check.json",
                 report.dump(2) + "\n");
    if (!pass) std::cerr << "assemble-check failed\n";
    return pass ? kExitOk : kExitVerificationFailure;
}

inline std::string ladder_summary_csv(const LadderResult& res) {
    std::ostringstream csv;
    csv << "k,delta,eta,energy,linf,xnorm,residual,certificate,box_ok,converged,"
           "iterations,start\n";
    for (const auto& r : res.rungs) {
        csv << r.k << "," << fmt_full(r.delta) << "," << fmt_full(r.eta) << ","
            << fmt_full(r.sol.energy_value) << "," << fmt_full(r.sol.linf) << ","
            << fmt_full(r.sol.xnorm) << "," << fmt_full(r.residual) << ","
            << fmt_full(r.certificate) << "," << (r.box_ok ? 1 : 0) << ","
            << (r.sol.converged ? 1 : 0) << "," << r.sol.iterations << ","
            << r.sol.start_label << "\n";
    }
    return csv.str();
}

inline ordered_json ladder_result_json(const LadderResult& res) {
    ordered_json j;
    j["direction"] = res.direction == LadderDirection::origin ? "origin" : "infinity";
    j["s"] = res.s;
    j["mu"] = res.mu;
    j["grid"] = {{"half_width", res.grid.half_width}, {"n_interior", res.grid.n_interior}};
    j["C_meas"] = res.C_meas;
    ordered_json rungs = ordered_json::array();
    for (const auto& r : res.rungs) {
        rungs.push_back({{"k", r.k},
                         {"delta", r.delta},
                         {"eta", r.eta},
                         {"energy", r.sol.energy_value},
                         {"linf", r.sol.linf},
                         {"xnorm", r.sol.xnorm},
                         {"residual", r.residual},
                         {"certificate", r.certificate},
                         {"box_ok", r.box_ok},
                         {"lower_bound", r.lower_bound_value},
                         {"min_iterate_energy", r.min_iterate_energy},
                         {"lambda_cap", r.lambda_cap},
                         {"iterations", r.sol.iterations},
                         {"start", r.sol.start_label}});
    }
    j["rungs"] = rungs;
    j["verdicts"] = {{"ordering", res.verdicts.ordering},
                     {"negativity", res.verdicts.negativity},
                     {"box", res.verdicts.box},
                     {"linf_trend", res.verdicts.linf_trend},
                     {"xnorm_trend", res.verdicts.xnorm_trend},
                     {"certificate", res.verdicts.certificate},
                     {"distinct", res.verdicts.distinct}};
    const NormClaimVerdict nc = verify_norm_claims(res);
    j["norm_claims"] = {{"ok", nc.ok}, {"shift", nc.shift}};
    return j;
}

inline int cmd_ladder(const RunConfig& cfg) {
    try {
        const Grid grid = build_grid(cfg.half_width, cfg.n_interior);
        const DiscreteOperator op = make_discrete_operator(grid, cfg.s);
        const LadderResult res =
            run_ladder(cfg.spec, cfg.construction, op, cfg.direction, cfg.K, cfg.ladder);
        const std::filesystem::path out(cfg.out_dir);
        for (const auto& r : res.rungs) {
            std::ostringstream csv;
            csv << "x,u\n";
            for (int i = 0; i < grid.n_interior; ++i)
                csv << fmt_full(grid.node(i)) << "," << fmt_full(r.sol.u[i]) << "\n";
            atomic_write(out / ("solution_k" + std::to_string(r.k) + ".csv"), csv.str());
        }
        atomic_write(out / "ladder_summary.csv", ladder_summary_csv(res));
        atomic_write(out / "ladder_result.json", ladder_result_json(res).dump(2) + "\n");
        if (!res.verdicts.all()) {
            std::cerr << "ladder verdicts failed\n";
            return kExitVerificationFailure;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        return detail::map_numerical_error(e);
    }
}

inline int cmd_sweep(const RunConfig& cfg, std::vector<double> lambdas) {
    try {
        const Grid grid = build_grid(cfg.half_width, cfg.n_interior);
        const DiscreteOperator op = make_discrete_operator(grid, cfg.s);
        if (lambdas.empty()) lambdas = cfg.sweep_lambdas;
        if (lambdas.empty()) {
            // derive the default list from the lambda = 0 window estimate
            NonlinearitySpec s0 = cfg.spec;
            s0.lambda = 0.0;
            LadderResult base = run_ladder(s0, cfg.construction, op, cfg.direction, cfg.K,
                                           cfg.ladder);
            const WindowEstimate w = estimate_lambda_window(base, cfg.window_p);
            const double lt = w.lambda_tilde.back();
            lambdas = {-lt, -0.5 * lt, 0.0, 0.5 * lt, lt};
        }
        const SweepResult sweep = lambda_sweep(cfg.spec, cfg.construction, op, cfg.direction,
                                               cfg.K, lambdas, cfg.ladder, cfg.window_p);
        const std::filesystem::path out(cfg.out_dir);
        std::ostringstream csv;
        csv << "lambda,ran_ok,distinct_count,ordering_ok,error\n";
        for (const auto& row : sweep.rows)
            csv << fmt_full(row.lambda) << "," << (row.ran_ok ? 1 : 0) << ","
                << row.distinct_count << "," << (row.ordering_ok ? 1 : 0) << ","
                << row.error << "\n";
        atomic_write(out / "sweep.csv", csv.str());
        ordered_json wj;
        wj["has_window"] = sweep.has_window;
        if (sweep.has_window) {
            wj["theta"] = sweep.window.theta;
            wj["alpha"] = sweep.window.alpha;
            wj["beta"] = sweep.window.beta;
            wj["lambda_cap"] = sweep.window.lambda_cap;
            wj["lambda_tilde"] = sweep.window.lambda_tilde;
        }
        atomic_write(out / "window.json", wj.dump(2) + "\n");
        if (!sweep.window_covered) {
            std::cerr << "sweep: solution count dropped inside the estimated window\n";
            return kExitVerificationFailure;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        return detail::map_numerical_error(e);
    }
}

inline int cmd_verify(const RunConfig& cfg) {
    ordered_json report;
    bool pass = true;
    try {
        // gradient vs central finite differences across three nonlinearity setups
        {
            const Grid grid = build_grid(1.0, 65);
            const Eigen::MatrixXd A = assemble_stiffness(grid, cfg.s).A;
            const Eigen::MatrixXd Mc = assemble_mass(grid, false).M;
            const double C1 = measure_embedding_constant(A, grid.spacing);
            std::vector<EnergyModel> models;
            NonlinearitySpec so;  // origin defaults
            so.lambda = 0.0;
            auto co = std::make_shared<const CompositeG>(
                compose_g(so, Construction::power_shift_origin));
            models.push_back({grid, A, Mc, co->mu(),
                              std::make_shared<const TruncatedG>(co, 0.25), C1});
            NonlinearitySpec si;
            si.family = Family::infinity_oscillatory;
            si.alpha = 2.0;
            si.beta = 1.5;
            si.lambda = 0.0;
            auto ci = std::make_shared<const CompositeG>(
                compose_g(si, Construction::power_shift_infinity));
            models.push_back({grid, A, Mc, ci->mu(),
                              std::make_shared<const TruncatedG>(ci, 3.0), C1});
            models.push_back({grid, A, Mc, 1.0, nullptr, C1});
            double worst = 0.0;
            std::mt19937_64 rng(cfg.ladder.solver.rng_seed);
            for (const auto& m : models) {
                const double eta = m.gk ? m.gk->eta() : 1.0;
                for (int trial = 0; trial < 34; ++trial) {
                    NodalVector u(grid.n_interior), v(grid.n_interior);
                    for (int i = 0; i < grid.n_interior; ++i) {
                        u[i] = 0.05 * eta + 0.85 * eta * u01(rng);
                        v[i] = 2.0 * u01(rng) - 1.0;
                    }
                    const double eps = 1e-6;  // balances FD truncation against roundoff
                    const double fd =
                        (energy(m, u + eps * v) - energy(m, u - eps * v)) / (2.0 * eps);
                    const double an = gradient(m, u).dot(v);
                    worst = std::max(worst, std::abs(fd - an) / std::max(1e-12, std::abs(an)));
                }
            }
            report["gradient_fd_worst_rel"] = worst;
            report["gradient_ok"] = worst <= 1e-6;
            pass = pass && worst <= 1e-6;
        }
        // bump homogeneity
        {
            const Grid grid = build_grid(cfg.half_width, cfg.n_interior);
            const Eigen::MatrixXd A = assemble_stiffness(grid, cfg.s).A;
            const double R = 0.25 * cfg.half_width;
            double worst = 0.0, base = 0.0;
            for (double zeta : {0.1, 0.01, 0.001}) {
                const NodalVector z = build_bump(grid, BumpSpec{R, zeta, 0.0});
                const double ratio = z.dot(A * z) / (zeta * zeta);
                if (base == 0.0) base = ratio;
                worst = std::max(worst, std::abs(ratio - base) / base);
            }
            report["bump_homogeneity_rel"] = worst;
            report["bump_ok"] = worst <= 1e-12;
            pass = pass && worst <= 1e-12;
        }
        // pointwise sign inequality
        {
            std::mt19937_64 rng(cfg.ladder.solver.rng_seed + 7);
            bool ok = true;
            for (int trial = 0; trial < 20; ++trial) {
                NodalVector u(33);
                for (int i = 0; i < 33; ++i) u[i] = 2.0 * u01(rng) - 1.0;
                ok = ok && check_sign_inequality(u, 10000, rng()).holds;
            }
            report["sign_inequality_ok"] = ok;
            pass = pass && ok;
        }
        // toy solver equivalence
        {
            const EnergyModel toy = make_toy_model();
            const BoxConstraint box{1.0};
            std::vector<std::pair<std::string, NodalVector>> starts;
            starts.emplace_back("zero", NodalVector::Zero(3));
            starts.emplace_back("mid", NodalVector::Constant(3, 0.5));
            for (auto& st : random_starts(3, box, 3, 99)) starts.emplace_back(std::move(st));
            SolverOptions so;
            const SolutionRecord rec = minimize_in_box(toy, box, starts, so);
            const NodalVector oracle = toy_grid_search(toy, 1.0, 1e-3);
            const double dev = (rec.u - oracle).cwiseAbs().maxCoeff();
            report["toy_solver_deviation"] = dev;
            report["toy_ok"] = dev <= 2e-3;
            pass = pass && dev <= 2e-3;
        }
        // lower-bound containment on the configured pipeline
        {
            const Grid grid = build_grid(cfg.half_width, cfg.n_interior);
            const DiscreteOperator op = make_discrete_operator(grid, cfg.s);
            const LadderResult res =
                run_ladder(cfg.spec, cfg.construction, op, cfg.direction, cfg.K, cfg.ladder);
            report["bound_slack"] = res.bound_slack;
            report["bound_ok"] = res.bound_slack >= -1e-9;
            pass = pass && res.bound_slack >= -1e-9;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        return detail::map_numerical_error(e);
    }
    report["pass"] = pass;
    atomic_write(std::filesystem::path(cfg.out_dir) / "verify.json", report.dump(2) + "\n");
    if (!pass) std::cerr << "verify failed\n";
    return pass ? kExitOk : kExitVerificationFailure;
}

}  // namespace oscilap
