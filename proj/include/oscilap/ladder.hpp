#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "oscilap/energy.hpp"
#include "oscilap/errors.hpp"
#include "oscilap/grid.hpp"
#include "oscilap/nonlinearity.hpp"
#include "oscilap/operator.hpp"
#include "oscilap/solver.hpp"

namespace oscilap {

/// Assembled forms shared by every rung (and every lambda of a sweep).
struct DiscreteOperator {
    Grid grid;
    double s;
    Eigen::MatrixXd A;
    Eigen::MatrixXd Mc;
    double C1;
};

inline DiscreteOperator make_discrete_operator(const Grid& grid, double s,
                                               const QuadratureConfig& quad = {}) {
    DiscreteOperator op;
    op.grid = grid;
    op.s = s;
    op.A = assemble_stiffness(grid, s, quad).A;
    op.Mc = assemble_mass(grid, false).M;
    op.C1 = measure_embedding_constant(op.A, grid.spacing);
    return op;
}

struct LadderOptions {
    SolverOptions solver;
    double search_lo = 0.0;  // 0 means direction default
    double search_hi = 0.0;
    int samples_per_decade = 512;
    std::vector<double> bump_radii;  // absolute; default {0.2, 0.3, 0.45} * L
    int peak_candidates = 3;
    double delta_tol_factor = 1e-10;  // box-membership tolerance = factor * eta
    double sep_factor = 1e-4;         // distinctness separation = factor * largest eta
};

struct RungRecord {
    int k = 0;
    double delta = 0.0;
    double eta = 0.0;
    SolutionRecord sol;
    double certificate = 0.0;  // best bump-start energy E_k(z_k)
    double residual = 0.0;
    bool box_ok = false;
    double box_margin = 0.0;
    double lower_bound_value = 0.0;
    double min_iterate_energy = 0.0;  // min energy seen across all starts' iterates
    double lambda_cap = 0.0;          // largest |lambda| keeping g <= 0 on [delta, eta]
    double lp_p = 0.0;                // h * sum u_i^p, filled by the window estimator
};

struct LadderVerdicts {
    bool ordering = false;
    bool negativity = false;
    bool box = false;
    bool linf_trend = false;
    bool xnorm_trend = false;
    bool certificate = false;
    bool distinct = false;
    bool all() const {
        return ordering && negativity && box && linf_trend && xnorm_trend && certificate &&
               distinct;
    }
};

struct LadderResult {
    LadderDirection direction = LadderDirection::origin;
    Grid grid{1.0, 3, 0.5};
    double s = 0.0;
    double mu = 0.0;
    TruncationLadder ladder;
    std::vector<RungRecord> rungs;
    LadderVerdicts verdicts;
    double C_meas = 0.0;  // measured bump constant at the default radius
    std::shared_ptr<const CompositeG> composite;
    double bound_slack = 0.0;  // min over rungs of (min iterate energy - lower bound)
};

namespace detail {

/// Candidate bump heights: local maxima of G(t)/t^2 on (0, cap), best first,
/// plus the cap itself (the deepest feasible plateau).
inline std::vector<double> candidate_heights(const CompositeG& g, double cap, int count) {
    const int ns = 2000;
    const double lo = cap * 1e-4;
    std::vector<double> ts(ns + 1), ratio(ns + 1);
    for (int i = 0; i <= ns; ++i) {
        ts[i] = lo * std::pow(cap / lo, static_cast<double>(i) / ns);
        ratio[i] = g.G(ts[i]) / (ts[i] * ts[i]);
    }
    std::vector<std::pair<double, double>> peaks;  // (ratio, t)
    for (int i = 1; i < ns; ++i)
        if (ratio[i] >= ratio[i - 1] && ratio[i] >= ratio[i + 1])
            peaks.emplace_back(ratio[i], ts[i]);
    peaks.emplace_back(ratio[0], ts[0]);
    peaks.emplace_back(ratio[ns], ts[ns]);
    std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    std::vector<double> out;
    out.push_back(cap);  // deepest feasible plateau, always a candidate
    for (const auto& [r, t] : peaks) {
        if (static_cast<int>(out.size()) > count) break;
        bool close = false;
        for (double o : out) close = close || std::abs(o - t) < 0.05 * cap;
        if (!close) out.push_back(t);
    }
    return out;
}

inline std::vector<double> effective_radii(const LadderOptions& opts, double L) {
    std::vector<double> radii = opts.bump_radii;
    if (radii.empty()) radii = {0.2 * L, 0.3 * L, 0.45 * L, 0.5 * L};
    std::vector<double> ok;
    for (double r : radii)
        if (r > 0.0 && 2.0 * r <= L) ok.push_back(r);
    if (ok.empty()) throw std::invalid_argument("no admissible bump radius (need 2R <= L)");
    return ok;
}

}  // namespace detail

inline LadderResult run_ladder(const NonlinearitySpec& spec, Construction cons,
                               const DiscreteOperator& op, LadderDirection direction,
                               int K, const LadderOptions& opts) {
    enforce_family_gate(spec);
    auto composite = std::make_shared<const CompositeG>(compose_g(spec, cons));
    const double L = op.grid.half_width;
    double lo = opts.search_lo, hi = opts.search_hi;
    if (lo <= 0.0 || hi <= lo) {
        // Scales where the box constraint is active at every rung (so rung
        // minimizers differ) and the rung energies are well separated.
        if (direction == LadderDirection::origin) {
            lo = 9e-4;
            hi = 5e-3;
        } else {
            lo = 1.0;
            hi = 40.0;
        }
    }
    TruncationLadder ladder =
        scan_sign_ladder(*composite, direction, lo, hi, K, opts.samples_per_decade);

    LadderResult result;
    result.direction = direction;
    result.grid = op.grid;
    result.s = op.s;
    result.mu = composite->mu();
    result.ladder = ladder;
    result.composite = composite;

    const std::vector<double> radii = detail::effective_radii(opts, L);
    result.C_meas = bump_energy_constant(op.grid, op.A, radii.front());

    const int n = op.grid.n_interior;
    NodalVector prev;
    double slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        const auto& [delta, eta] = ladder.rungs[k];
        auto gk = std::make_shared<const TruncatedG>(composite, eta);
        EnergyModel model{op.grid, op.A, op.Mc, composite->mu(), gk, op.C1};
        BoxConstraint box{eta};

        std::vector<std::pair<std::string, NodalVector>> starts;
        starts.emplace_back("a-zero", NodalVector::Zero(n));
        if (prev.size() == n) {
            starts.emplace_back("b-warm", project(prev, box));
            // the previous minimizer is a critical point of this rung's model too
            // (the truncations agree below its sup); rescaling it to the new rung
            // amplitude escapes that basin
            const double prev_delta = ladder.rungs[k - 1].first;
            if (prev_delta > 0.0)
                starts.emplace_back("b-warm-scaled",
                                    project(prev * (delta / prev_delta), box));
        }
        const std::vector<double> heights =
            detail::candidate_heights(*composite, 0.995 * eta, opts.peak_candidates);
        double certificate = std::numeric_limits<double>::infinity();
        int hi_idx = 0;
        for (double zeta : heights) {
            int ri = 0;
            for (double R : radii) {
                NodalVector z = build_bump(op.grid, BumpSpec{R, zeta, 0.0});
                certificate = std::min(certificate, energy(model, z));
                starts.emplace_back("c-bump-" + std::to_string(hi_idx) + "-" +
                                        std::to_string(ri),
                                    std::move(z));
                ++ri;
            }
            ++hi_idx;
        }
        // the plateau capped at delta is also a natural candidate
        {
            int ri = 0;
            for (double R : radii) {
                NodalVector z = build_bump(op.grid, BumpSpec{R, 0.995 * delta, 0.0});
                certificate = std::min(certificate, energy(model, z));
                starts.emplace_back("d-bump-delta-" + std::to_string(ri), std::move(z));
                ++ri;
            }
        }
        for (auto& st : random_starts(n, box, opts.solver.random_starts,
                                      opts.solver.rng_seed + 1000ull * (k + 1)))
            starts.emplace_back("e-" + st.first, std::move(st.second));

        std::vector<SolutionRecord> all;
        SolutionRecord best = minimize_in_box(model, box, starts, opts.solver, &all);

        RungRecord rung;
        rung.k = k + 1;
        rung.delta = delta;
        rung.eta = eta;
        rung.sol = best;
        rung.certificate = certificate;
        rung.residual = residual_norm(model, best);
        const BoxMembership bm =
            check_box_membership(best, delta, opts.delta_tol_factor * eta);
        rung.box_ok = bm.inside;
        rung.box_margin = bm.margin;
        rung.lower_bound_value = lower_bound(model);
        rung.min_iterate_energy = best.min_iterate_energy;
        for (const auto& r : all)
            rung.min_iterate_energy = std::min(rung.min_iterate_energy, r.min_iterate_energy);
        slack = std::min(slack, rung.min_iterate_energy - rung.lower_bound_value);
        // largest |lambda| under which g stays nonpositive on this rung
        double cap = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 1000; ++i) {
            const double t = delta + (eta - delta) * i / 1000.0;
            cap = std::min(cap, -composite->g(t) / std::pow(t, spec.p));
        }
        rung.lambda_cap = cap;
        result.rungs.push_back(std::move(rung));
        prev = best.u;
    }
    result.bound_slack = slack;

    // verdicts
    LadderVerdicts& v = result.verdicts;
    v.ordering = true;
    v.negativity = true;
    v.box = true;
    v.linf_trend = true;
    v.xnorm_trend = true;
    v.certificate = true;
    for (int k = 0; k < K; ++k) {
        const RungRecord& r = result.rungs[k];
        v.box = v.box && r.box_ok;
        v.certificate = v.certificate && r.sol.energy_value <= r.certificate;
        if (direction == LadderDirection::origin) v.negativity = v.negativity && r.sol.energy_value < 0.0;
        if (k == 0) continue;
        const RungRecord& pr = result.rungs[k - 1];
        if (direction == LadderDirection::origin) {
            v.ordering = v.ordering && pr.sol.energy_value < r.sol.energy_value;
            v.linf_trend = v.linf_trend && r.sol.linf < pr.sol.linf;
            v.xnorm_trend = v.xnorm_trend && r.sol.xnorm < pr.sol.xnorm;
        } else {
            v.ordering = v.ordering && pr.sol.energy_value > r.sol.energy_value;
            v.linf_trend = v.linf_trend && r.sol.linf > pr.sol.linf;
        }
    }
    if (direction == LadderDirection::infinity_)
        v.negativity = result.rungs.back().sol.energy_value < 0.0;
    std::vector<SolutionRecord> sols;
    for (const auto& r : result.rungs) sols.push_back(r.sol);
    double eta_max = 0.0;
    for (const auto& [d, e] : ladder.rungs) eta_max = std::max(eta_max, e);
    v.distinct = static_cast<int>(
                     distinctness(sols, opts.sep_factor * eta_max).representatives.size()) == K;
    return result;
}

inline LadderResult run_origin_ladder(const NonlinearitySpec& spec, Construction cons,
                                      const DiscreteOperator& op, int K,
                                      const LadderOptions& opts) {
    return run_ladder(spec, cons, op, LadderDirection::origin, K, opts);
}

inline LadderResult run_infinity_ladder(const NonlinearitySpec& spec, Construction cons,
                                        const DiscreteOperator& op, int K,
                                        const LadderOptions& opts) {
    return run_ladder(spec, cons, op, LadderDirection::infinity_, K, opts);
}

struct WindowEstimate {
    std::vector<double> theta;       // K+1 separators
    std::vector<double> alpha;       // per rung
    std::vector<double> beta;        // per rung
    std::vector<double> lambda_cap;  // per rung
    std::vector<double> lambda_tilde;  // cumulative min, per k
};

/// Per-rung window quantities from a lambda = 0 ladder. Separator convention:
/// origin chain  theta_k < E_k <= Z_k < theta_{k+1} < 0 with theta_{k+1} the
/// midpoint of (Z_k, E_{k+1}) and E_{K+1} := 0; infinity chain is mirrored with
/// theta_i descending and delta^(p+1) denominators.
inline WindowEstimate estimate_lambda_window(LadderResult& result, double p) {
    const int K = static_cast<int>(result.rungs.size());
    WindowEstimate w;
    std::vector<double> E(K), Z(K);
    for (int k = 0; k < K; ++k) {
        E[k] = result.rungs[k].sol.energy_value;
        Z[k] = result.rungs[k].certificate;
        if (!(E[k] <= Z[k]))
            throw std::logic_error("window estimate: minimizer energy above its certificate");
    }
    const bool origin = result.direction == LadderDirection::origin;
    for (int k = 0; k < K; ++k) {
        const double next = k + 1 < K ? E[k + 1] : 0.0;
        if (origin) {
            if (!(Z[k] < next))
                throw std::logic_error(
                    "window estimate: energies not strictly ordered (certificate of rung " +
                    std::to_string(k + 1) + " reaches the next rung)");
        } else {
            const double prev = k == 0 ? 0.0 : E[k - 1];
            if (!(Z[k] < prev))
                throw std::logic_error(
                    "window estimate: energies not strictly ordered (certificate of rung " +
                    std::to_string(k + 1) + " reaches the previous rung)");
        }
    }
    w.theta.resize(K + 1);
    if (origin) {
        for (int k = 1; k <= K; ++k) {
            const double next = k < K ? E[k] : 0.0;
            w.theta[k] = 0.5 * (Z[k - 1] + next);
        }
        w.theta[0] = E[0] - (w.theta[1] - E[0]);
    } else {
        // theta[0] is the separator closest to zero, then descending
        for (int k = 0; k < K; ++k) {
            const double prev = k == 0 ? 0.0 : E[k - 1];
            w.theta[k] = 0.5 * (Z[k] + prev);
        }
        w.theta[K] = E[K - 1] - (w.theta[K - 1] - E[K - 1]);
    }
    for (int k = 0; k < K; ++k) {
        RungRecord& r = result.rungs[k];
        double denom;
        if (origin) {
            double lp = 0.0;
            for (int i = 0; i < r.sol.u.size(); ++i)
                lp += std::pow(std::max(0.0, r.sol.u[i]), p);
            denom = result.grid.spacing * lp;  // lumped L^p quadrature, to the p-th power
            r.lp_p = denom;
        } else {
            denom = std::pow(r.delta, p + 1.0);
            r.lp_p = denom;
        }
        if (!(denom > 0.0)) throw std::logic_error("window estimate: zero denominator");
        if (origin) {
            w.alpha.push_back((p + 1.0) * (w.theta[k + 1] - Z[k]) / denom);
            w.beta.push_back((p + 1.0) * (E[k] - w.theta[k]) / denom);
        } else {
            w.alpha.push_back((p + 1.0) * (w.theta[k] - Z[k]) / denom);
            w.beta.push_back((p + 1.0) * (E[k] - w.theta[k + 1]) / denom);
        }
        w.lambda_cap.push_back(result.rungs[k].lambda_cap);
    }
    double cur = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        cur = std::min({cur, w.lambda_cap[k], w.alpha[k], w.beta[k]});
        w.lambda_tilde.push_back(cur);
    }
    return w;
}

struct SweepRow {
    double lambda = 0.0;
    bool ran_ok = false;
    std::string error;
    int distinct_count = 0;
    bool ordering_ok = false;
    std::vector<double> energies;
    std::vector<double> linfs;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool has_window = false;
    WindowEstimate window;        // from the lambda = 0 run, when window_p > 0
    double lambda_tilde_K = 0.0;  // last entry of window.lambda_tilde
    bool window_covered = false;  // count >= K at every |lambda| <= lambda_tilde_K
};

inline SweepResult lambda_sweep(const NonlinearitySpec& spec, Construction cons,
                                const DiscreteOperator& op, LadderDirection direction,
                                int K, const std::vector<double>& lambdas,
                                const LadderOptions& opts, double window_p = 0.0) {
    SweepResult sweep;
    for (double lam : lambdas) {
        SweepRow row;
        row.lambda = lam;
        NonlinearitySpec s2 = spec;
        s2.lambda = lam;
        try {
            LadderResult res = run_ladder(s2, cons, op, direction, K, opts);
            row.ran_ok = true;
            std::vector<SolutionRecord> sols;
            for (const auto& r : res.rungs) {
                sols.push_back(r.sol);
                row.energies.push_back(r.sol.energy_value);
                row.linfs.push_back(r.sol.linf);
            }
            double eta_max = 0.0;
            for (const auto& [d, e] : res.ladder.rungs) eta_max = std::max(eta_max, e);
            row.distinct_count = static_cast<int>(
                distinctness(sols, opts.sep_factor * eta_max).representatives.size());
            row.ordering_ok = res.verdicts.ordering;
            if (lam == 0.0 && window_p > 0.0) {
                sweep.window = estimate_lambda_window(res, window_p);
                sweep.lambda_tilde_K = sweep.window.lambda_tilde.back();
                sweep.has_window = true;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        sweep.rows.push_back(std::move(row));
    }
    sweep.window_covered = true;
    for (const auto& row : sweep.rows) {
        if (sweep.lambda_tilde_K > 0.0 && std::abs(row.lambda) <= sweep.lambda_tilde_K + 1e-15)
            sweep.window_covered =
                sweep.window_covered && row.ran_ok && row.distinct_count >= K && row.ordering_ok;
    }
    return sweep;
}

struct NormClaimVerdict {
    bool ok = false;
    int shift = -1;  // rungs dropped from the front before the claims hold
};

/// Origin: ||u_i||_X < 1/i and ||u_i||_inf < 1/i after dropping the first `shift`
/// rungs; infinity: ||u_i||_inf > i-1 likewise. Reports the smallest such shift.
inline NormClaimVerdict verify_norm_claims(const LadderResult& result) {
    const int K = static_cast<int>(result.rungs.size());
    for (int shift = 0; shift < K; ++shift) {
        bool ok = true;
        for (int i = 1; i + shift <= K; ++i) {
            const RungRecord& r = result.rungs[i + shift - 1];
            if (result.direction == LadderDirection::origin)
                ok = ok && r.sol.xnorm < 1.0 / i && r.sol.linf < 1.0 / i;
            else
                ok = ok && r.sol.linf > i - 1.0;
        }
        if (ok) return NormClaimVerdict{true, shift};
    }
    return NormClaimVerdict{false, -1};
}

}  // namespace oscilap
