#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oscilap/energy.hpp"
#include "oscilap/errors.hpp"
#include "oscilap/grid.hpp"

namespace oscilap {

struct BoxConstraint {
    double eta;  // feasible set is the nodal box [0, eta]^n
};

inline NodalVector project(const NodalVector& u, const BoxConstraint& box) {
    return u.cwiseMax(0.0).cwiseMin(box.eta);
}

struct SolverOptions {
    double tol = 1e-8;  // projected-gradient tolerance, scaled by sqrt(n)
    int max_iter = 50000;
    int random_starts = 3;
    std::uint64_t rng_seed = 12345;
    int nonmonotone_memory = 10;
};

struct SolutionRecord {
    NodalVector u;
    double energy_value = 0.0;
    double pg_norm = 0.0;
    double linf = 0.0;
    double xnorm = 0.0;  // sqrt(u' A u)
    double eta = 0.0;
    bool delta_ok = false;
    double delta_margin = 0.0;
    int iterations = 0;
    std::string start_label;
    bool converged = false;
    double min_iterate_energy = 0.0;  // instrumentation for the coercivity bound
};

struct MinimizeFailure : NonConvergenceError {
    MinimizeFailure(const std::string& what, SolutionRecord best)
        : NonConvergenceError(what), best_partial(std::move(best)) {}
    SolutionRecord best_partial;
};

// Platform-stable uniform(0,1) from raw mt19937_64 output.
inline double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

namespace detail {

inline double pg_norm_at(const EnergyModel& m, const BoxConstraint& box,
                         const NodalVector& u, const NodalVector& g) {
    return (u - project(u - g, box)).norm();
}

inline SolutionRecord run_single_start(const EnergyModel& m, const BoxConstraint& box,
                                       NodalVector u, const std::string& label,
                                       const SolverOptions& opts) {
    const double tol = opts.tol * std::sqrt(static_cast<double>(u.size()));
    u = project(u, box);
    NodalVector g = gradient(m, u);
    double e = energy(m, u);
    double min_e = e;
    std::deque<double> recent{e};
    double alpha = 1.0;
    const double alpha_min = 1e-10, alpha_max = 1e10;

    SolutionRecord rec;
    rec.start_label = label;
    rec.eta = box.eta;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const double pg = pg_norm_at(m, box, u, g);
        if (pg <= tol) {
            rec.converged = true;
            rec.pg_norm = pg;
            break;
        }
        NodalVector d = project(u - alpha * g, box) - u;
        const double gd = g.dot(d);
        if (d.norm() == 0.0 || gd >= 0.0) {
            // projection arc gives no descent at this step length; shrink and retry
            alpha = std::max(alpha_min, 0.1 * alpha);
            d = project(u - alpha * g, box) - u;
            if (d.norm() == 0.0) {
                rec.converged = true;  // stationary within rounding
                rec.pg_norm = pg;
                break;
            }
        }
        const double e_ref = *std::max_element(recent.begin(), recent.end());
        double lam = 1.0;
        NodalVector u_new;
        double e_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            u_new = u + lam * d;
            e_new = energy(m, u_new);
            if (e_new <= e_ref + 1e-4 * lam * g.dot(d)) {
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if (!accepted) {
            u_new = u + lam * d;  // smallest trial step; keeps the iteration alive
            e_new = energy(m, u_new);
        }
        NodalVector g_new = gradient(m, u_new);
        const NodalVector s = u_new - u, y = g_new - g;
        const double sy = s.dot(y);
        alpha = sy > 1e-30 ? std::clamp(s.dot(s) / sy, alpha_min, alpha_max) : alpha_max;
        u = std::move(u_new);
        g = std::move(g_new);
        e = e_new;
        min_e = std::min(min_e, e);
        recent.push_back(e);
        if (static_cast<int>(recent.size()) > opts.nonmonotone_memory) recent.pop_front();
    }
    rec.u = u;
    rec.energy_value = energy(m, u);
    rec.pg_norm = pg_norm_at(m, box, u, gradient(m, u));
    rec.linf = linf_norm(u);
    rec.xnorm = std::sqrt(std::max(0.0, u.dot(m.A * u)));
    rec.iterations = it;
    rec.min_iterate_energy = std::min(min_e, rec.energy_value);
    if (!rec.converged) rec.converged = rec.pg_norm <= tol;
    return rec;
}

}  // namespace detail

/// Multistart projected spectral-gradient minimization over the box [0, eta]^n.
/// Deterministic: starts are processed in order and ties are broken by energy,
/// then L-infinity norm, then start label.
inline SolutionRecord minimize_in_box(const EnergyModel& m, const BoxConstraint& box,
                                      const std::vector<std::pair<std::string, NodalVector>>& starts,
                                      const SolverOptions& opts,
                                      std::vector<SolutionRecord>* all_records = nullptr) {
    if (starts.empty()) throw std::invalid_argument("minimize_in_box: no starts");
    bool have_best = false;
    SolutionRecord best, best_partial;
    double best_partial_pg = std::numeric_limits<double>::infinity();
    for (const auto& [label, u0] : starts) {
        SolutionRecord rec = detail::run_single_start(m, box, u0, label, opts);
        if (all_records) all_records->push_back(rec);
        if (!rec.converged) {
            if (rec.pg_norm < best_partial_pg) {
                best_partial_pg = rec.pg_norm;
                best_partial = rec;
            }
            continue;
        }
        if (!have_best) {
            best = rec;
            have_best = true;
            continue;
        }
        const double de = rec.energy_value - best.energy_value;
        bool better = de < -1e-12;
        if (std::abs(de) <= 1e-12) {
            if (rec.linf < best.linf - 1e-15)
                better = true;
            else if (std::abs(rec.linf - best.linf) <= 1e-15 &&
                     rec.start_label < best.start_label)
                better = true;
        }
        if (better) best = rec;
    }
    if (!have_best)
        throw MinimizeFailure("minimize_in_box: no start converged within max_iter (best pg norm " +
                                  std::to_string(best_partial_pg) + ")",
                              best_partial);
    return best;
}

/// Random feasible start vectors from a platform-stable generator.
inline std::vector<std::pair<std::string, NodalVector>> random_starts(
    int n, const BoxConstraint& box, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::string, NodalVector>> out;
    for (int k = 0; k < count; ++k) {
        NodalVector u(n);
        for (int i = 0; i < n; ++i) u[i] = box.eta * u01(rng);
        out.emplace_back("random-" + std::to_string(k), std::move(u));
    }
    return out;
}

struct BoxMembership {
    bool inside;
    double margin;  // delta - max_i u_i
};

inline BoxMembership check_box_membership(const SolutionRecord& rec, double delta,
                                          double tol) {
    if (!(delta < rec.eta))
        throw std::invalid_argument("check_box_membership: delta must be below eta");
    const double mx = rec.u.size() ? rec.u.maxCoeff() : 0.0;
    return BoxMembership{mx <= delta + tol, delta - mx};
}

/// KKT residual: gradient norm over strictly interior nodes plus sign violations
/// at active nodes (gradient must be >= 0 at the lower bound, <= 0 at the upper).
inline double residual_norm(const EnergyModel& m, const SolutionRecord& rec) {
    const NodalVector g = gradient(m, rec.u);
    double acc = 0.0;
    for (int i = 0; i < rec.u.size(); ++i) {
        if (rec.u[i] <= 0.0) {
            acc += std::min(g[i], 0.0) * std::min(g[i], 0.0);
        } else if (rec.u[i] >= rec.eta) {
            acc += std::max(g[i], 0.0) * std::max(g[i], 0.0);
        } else {
            acc += g[i] * g[i];
        }
    }
    return std::sqrt(acc);
}

struct DistinctnessGrouping {
    std::vector<int> group_of;         // per input record
    std::vector<int> representatives;  // lowest-energy record index per group
};

inline DistinctnessGrouping distinctness(const std::vector<SolutionRecord>& records,
                                         double sep) {
    const int n = static_cast<int>(records.size());
    DistinctnessGrouping out;
    out.group_of.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        for (int gi = 0; gi < static_cast<int>(out.representatives.size()); ++gi) {
            const auto& rep = records[out.representatives[gi]];
            if (linf_norm(records[i].u - rep.u) < sep) {
                out.group_of[i] = gi;
                if (records[i].energy_value < rep.energy_value)
                    out.representatives[gi] = i;
                break;
            }
        }
        if (out.group_of[i] < 0) {
            out.group_of[i] = static_cast<int>(out.representatives.size());
            out.representatives.push_back(i);
        }
    }
    return out;
}

}  // namespace oscilap
