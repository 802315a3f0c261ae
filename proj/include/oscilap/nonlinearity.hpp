#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oscilap/errors.hpp"
#include "oscilap/quadrature.hpp"

namespace oscilap {

enum class Family { origin_oscillatory, infinity_oscillatory, custom_table };

enum class Construction {
    linear_shift_origin,    // g = lam0_tilde*u + f(u),            mu = lam0_tilde - lambda
    power_shift_origin,     // g = lambda*u^p + lam0*u + f(u),     mu = lam0
    linear_shift_infinity,  // g = lam_inf_hat*u + f(u),           mu = lam_inf_hat - lambda
    power_shift_infinity,   // g = lambda*u^p + lam_inf*u + f(u),  mu = lam_inf
    two_powers,             // g = lambda*u^p + mu_q*u^q + mu_lin*u + f(u), mu = mu_lin
    perturbed,              // g = mu_lin*u + f(u) + eps*f2(u),    mu = mu_lin
};

struct NonlinearitySpec {
    Family family = Family::origin_oscillatory;
    double alpha = 0.5;
    double beta = 1.0;
    double a = 0.5;
    std::vector<std::pair<double, double>> table;  // custom_table samples (t, f(t))

    // composite coefficients
    double lambda = 0.0;
    double p = 1.0;
    double mu_lin = 0.1;  // the added linear coefficient of the chosen construction
    double q = 1.0;
    double mu_q = 0.0;
    double eps = 0.0;
    std::shared_ptr<NonlinearitySpec> second;  // perturbing base for `perturbed`
};

/// Parameter gates of the two example families; call when hypothesis enforcement
/// is wanted (the evaluators themselves accept any finite parameters).
inline void enforce_family_gate(const NonlinearitySpec& s) {
    if (s.family == Family::origin_oscillatory) {
        if (!(0.0 < s.alpha && s.alpha < 1.0 && 1.0 < s.alpha + s.beta && 0.0 < s.a &&
              s.a < 1.0))
            throw std::invalid_argument(
                "origin family requires 0 < alpha < 1 < alpha+beta and 0 < a < 1");
    } else if (s.family == Family::infinity_oscillatory) {
        if (!(s.alpha > 1.0 && std::abs(s.alpha - s.beta) < 1.0 && 0.0 < s.a && s.a < 1.0))
            throw std::invalid_argument(
                "infinity family requires alpha > 1, |alpha-beta| < 1 and 0 < a < 1");
    }
}

inline NonlinearitySpec load_table_spec(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open nonlinearity table: " + csv_path);
    NonlinearitySpec spec;
    spec.family = Family::custom_table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double t, v;
        if (ls >> t >> v) spec.table.emplace_back(t, v);
    }
    if (spec.table.size() < 2)
        throw ConfigError("nonlinearity table needs at least 2 samples: " + csv_path);
    std::sort(spec.table.begin(), spec.table.end());
    return spec;
}

namespace detail {

// Asymptotic value of int_0^eps tau^gamma sin(tau^-beta) dtau (and the cos analog)
// by repeated integration by parts; `bound` is the discarded-remainder bound.
struct AsympResult {
    double value;
    double bound;
};

inline AsympResult asymp_cos_integral(double eps, double gamma, double beta, int depth);

inline AsympResult asymp_sin_integral(double eps, double gamma, double beta, int depth) {
    if (depth <= 0) return {0.0, std::pow(eps, gamma + 1.0) / (gamma + 1.0)};
    const double c = (gamma + beta + 1.0) / beta;
    AsympResult inner = asymp_cos_integral(eps, gamma + beta, beta, depth - 1);
    return {std::pow(eps, gamma + beta + 1.0) * std::cos(std::pow(eps, -beta)) / beta -
                c * inner.value,
            c * inner.bound};
}

inline AsympResult asymp_cos_integral(double eps, double gamma, double beta, int depth) {
    if (depth <= 0) return {0.0, std::pow(eps, gamma + 1.0) / (gamma + 1.0)};
    const double c = (gamma + beta + 1.0) / beta;
    AsympResult inner = asymp_sin_integral(eps, gamma + beta, beta, depth - 1);
    return {-std::pow(eps, gamma + beta + 1.0) * std::sin(std::pow(eps, -beta)) / beta +
                c * inner.value,
            c * inner.bound};
}

}  // namespace detail

/// Base nonlinearity with a cached, oscillation-aware antiderivative. The panel
/// ladder is a deterministic function of the spec alone (query order does not
/// change any returned value).
class Nonlinearity {
  public:
    explicit Nonlinearity(NonlinearitySpec spec) : spec_(std::move(spec)) {
        if (spec_.family == Family::custom_table) {
            init_table();
        } else if (spec_.family == Family::origin_oscillatory) {
            init_origin_cut();
            knots_.push_back(t_cut_);
            cum_.push_back(asymp_F(t_cut_));
        } else {
            knots_.push_back(0.0);
            cum_.push_back(0.0);
        }
    }

    const NonlinearitySpec& spec() const { return spec_; }

    double f(double t) const {
        if (t <= 0.0) return 0.0;
        switch (spec_.family) {
            case Family::origin_oscillatory:
                return std::pow(t, spec_.alpha) * (spec_.a + std::sin(std::pow(t, -spec_.beta)));
            case Family::infinity_oscillatory:
                return std::pow(t, spec_.alpha) * (spec_.a + std::sin(std::pow(t, spec_.beta)));
            case Family::custom_table:
                return table_f(t);
        }
        return 0.0;
    }

    double F(double t) const {
        if (t <= 0.0) return 0.0;
        if (spec_.family == Family::custom_table) return table_F(t);
        if (spec_.family == Family::origin_oscillatory && t <= t_cut_) return asymp_F(t);
        extend_to(t);
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
        auto ff = [&](double x) { return f(x); };
        return cum_[i] + gauss_integrate(ff, knots_[i], t, 15);
    }

  private:
    void init_table() {
        table_cum_.resize(spec_.table.size(), 0.0);
        for (std::size_t i = 1; i < spec_.table.size(); ++i) {
            const auto& [t0, v0] = spec_.table[i - 1];
            const auto& [t1, v1] = spec_.table[i];
            table_cum_[i] = table_cum_[i - 1] + 0.5 * (v0 + v1) * (t1 - t0);
        }
    }

    double table_f(double t) const {
        const auto& tb = spec_.table;
        if (t <= tb.front().first) return tb.front().second;
        if (t >= tb.back().first) return tb.back().second;
        auto it = std::upper_bound(tb.begin(), tb.end(), std::make_pair(t, 1e308));
        const std::size_t i = static_cast<std::size_t>(it - tb.begin());
        const double w = (t - tb[i - 1].first) / (tb[i].first - tb[i - 1].first);
        return tb[i - 1].second * (1.0 - w) + tb[i].second * w;
    }

    double table_F(double t) const {
        const auto& tb = spec_.table;
        if (t <= tb.front().first) return tb.front().second * t;
        const double head = tb.front().second * tb.front().first;
        if (t >= tb.back().first)
            return head + table_cum_.back() + tb.back().second * (t - tb.back().first);
        auto it = std::upper_bound(tb.begin(), tb.end(), std::make_pair(t, 1e308));
        const std::size_t i = static_cast<std::size_t>(it - tb.begin());
        const double fm = table_f(t);
        return head + table_cum_[i - 1] + 0.5 * (tb[i - 1].second + fm) * (t - tb[i - 1].first);
    }

    // Largest eps where a depth-10 integration-by-parts expansion of the oscillatory
    // part of F is accurate to ~1e-15 absolute; below it F comes from the expansion.
    void init_origin_cut() {
        double eps = 0.1;
        for (int j = 0; j < 200; ++j) {
            if (detail::asymp_sin_integral(eps, spec_.alpha, spec_.beta, 10).bound <= 1e-15)
                break;
            eps *= 0.5;
        }
        t_cut_ = eps;
    }

    double asymp_F(double t) const {
        return spec_.a * std::pow(t, spec_.alpha + 1.0) / (spec_.alpha + 1.0) +
               detail::asymp_sin_integral(t, spec_.alpha, spec_.beta, 10).value;
    }

    // panel width resolving the local oscillation of the sine factor
    double panel_width(double t) const {
        const double b = spec_.beta;
        double period;
        if (spec_.family == Family::origin_oscillatory)
            period = 2.0 * M_PI * std::pow(t, 1.0 + b) / b;
        else
            period = 2.0 * M_PI * std::pow(std::max(t, 1e-12), 1.0 - b) / b;
        return std::min(0.5 * std::max(t, 2e-3), period / 8.0);
    }

    void extend_to(double t) const {
        auto ff = [&](double x) { return f(x); };
        while (knots_.back() < t) {
            if (knots_.size() > 4000000)
                throw QuadratureError("antiderivative panel budget exhausted at t=" +
                                      std::to_string(knots_.back()));
            const double t0 = knots_.back();
            const double t1 = t0 + panel_width(t0);
            cum_.push_back(cum_.back() + gauss_integrate(ff, t0, t1, 15));
            knots_.push_back(t1);
        }
    }

    NonlinearitySpec spec_;
    double t_cut_ = 0.0;
    mutable std::vector<double> knots_, cum_;
    std::vector<double> table_cum_;
};

/// Composite right-hand side g with the linear part moved to the operator side:
/// solving the shifted problem with (g, mu) is equivalent to the original one.
class CompositeG {
  public:
    CompositeG(std::shared_ptr<const Nonlinearity> base, Construction cons)
        : base_(std::move(base)), cons_(cons) {
        const NonlinearitySpec& s = base_->spec();
        lambda_ = s.lambda;
        p_ = s.p;
        lin_ = s.mu_lin;
        q_ = s.q;
        mu_q_ = s.mu_q;
        eps_ = s.eps;
        switch (cons_) {
            case Construction::linear_shift_origin:
            case Construction::linear_shift_infinity:
                mu_ = lin_ - lambda_;
                lin_eff_ = lin_;
                lambda_eff_ = 0.0;  // the lambda*u term is absorbed into the shift
                if (!(mu_ > 0.0))
                    throw std::invalid_argument(
                        "linear-shift construction requires lambda < linear coefficient "
                        "(shift mu = mu_lin - lambda must be positive)");
                break;
            case Construction::power_shift_origin:
            case Construction::power_shift_infinity:
            case Construction::two_powers:
            case Construction::perturbed:
                mu_ = lin_;
                lin_eff_ = lin_;
                lambda_eff_ = lambda_;
                if (!(mu_ > 0.0))
                    throw std::invalid_argument(
                        "power-shift construction requires a positive linear coefficient "
                        "(shift mu = mu_lin must be positive)");
                break;
        }
        if (cons_ == Construction::linear_shift_origin ||
            cons_ == Construction::linear_shift_infinity) {
            // p plays no role; the problem is linear-in-u plus f
        } else if (!(p_ > 0.0)) {
            throw std::invalid_argument("power p must be positive");
        }
        if (cons_ == Construction::perturbed) {
            if (!base_->spec().second)
                throw std::invalid_argument("perturbed construction needs a second spec");
            second_ = std::make_shared<Nonlinearity>(*base_->spec().second);
        }
    }

    double mu() const { return mu_; }
    const Nonlinearity& base() const { return *base_; }

    double operator()(double t) const { return g(t); }

    double g(double t) const {
        if (t <= 0.0) return 0.0;
        double v = lin_eff_ * t + base_->f(t);
        if (cons_ == Construction::linear_shift_origin ||
            cons_ == Construction::linear_shift_infinity)
            return v;
        if (cons_ == Construction::perturbed) return v + eps_ * second_->f(t);
        v += lambda_eff_ * std::pow(t, p_);
        if (cons_ == Construction::two_powers) v += mu_q_ * std::pow(t, q_);
        return v;
    }

    double G(double t) const {
        if (t <= 0.0) return 0.0;
        double v = 0.5 * lin_eff_ * t * t + base_->F(t);
        if (cons_ == Construction::linear_shift_origin ||
            cons_ == Construction::linear_shift_infinity)
            return v;
        if (cons_ == Construction::perturbed) return v + eps_ * second_->F(t);
        v += lambda_eff_ * std::pow(t, p_ + 1.0) / (p_ + 1.0);
        if (cons_ == Construction::two_powers)
            v += mu_q_ * std::pow(t, q_ + 1.0) / (q_ + 1.0);
        return v;
    }

  private:
    std::shared_ptr<const Nonlinearity> base_;
    std::shared_ptr<const Nonlinearity> second_;
    Construction cons_;
    double lambda_ = 0, p_ = 1, lin_ = 0, q_ = 1, mu_q_ = 0, eps_ = 0;
    double lambda_eff_ = 0, lin_eff_ = 0, mu_ = 0;
};

inline CompositeG compose_g(const NonlinearitySpec& spec, Construction cons) {
    return CompositeG(std::make_shared<Nonlinearity>(spec), cons);
}

/// g_k(t) = g(min(eta, t)) and its antiderivative, linear beyond eta.
class TruncatedG {
  public:
    TruncatedG(std::shared_ptr<const CompositeG> g, double eta)
        : g_(std::move(g)), eta_(eta) {
        if (!(eta > 0.0)) throw std::invalid_argument("truncation level must be positive");
        g_eta_ = g_->g(eta_);
        G_eta_ = g_->G(eta_);
        sup_ = 0.0;
        const int ns = 4096;
        for (int i = 0; i <= ns; ++i)
            sup_ = std::max(sup_, std::abs(g_->g(eta_ * i / ns)));
    }

    double eta() const { return eta_; }
    double mu() const { return g_->mu(); }
    double sup_abs() const { return sup_; }
    const CompositeG& composite() const { return *g_; }

    double g(double t) const {
        if (t <= 0.0) return 0.0;
        return t >= eta_ ? g_eta_ : g_->g(t);
    }

    double G(double t) const {
        if (t <= 0.0) return 0.0;
        return t >= eta_ ? G_eta_ + g_eta_ * (t - eta_) : g_->G(t);
    }

  private:
    std::shared_ptr<const CompositeG> g_;
    double eta_, g_eta_, G_eta_, sup_;
};

inline TruncatedG truncate(std::shared_ptr<const CompositeG> g, double eta) {
    return TruncatedG(std::move(g), eta);
}

enum class LadderDirection { origin, infinity_ };

struct TruncationLadder {
    LadderDirection direction;
    std::vector<std::pair<double, double>> rungs;  // (delta_k, eta_k)
};

/// Maximal closed subintervals of [lo, hi] where g <= 0, detected by log-spaced
/// sign sampling and resolved per connected component, shrunk inward by 1% of
/// their width. Only components containing a sample point are reported, so the
/// sampling density controls how much of the (possibly infinite) sign ladder the
/// scan picks up.
inline std::vector<std::pair<double, double>> negativity_intervals(
    const CompositeG& g, double lo, double hi, int samples_per_decade) {
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("bad search range");
    const double llo = std::log(lo), lhi = std::log(hi);
    const int ns = std::max(16, static_cast<int>(samples_per_decade *
                                                 (lhi - llo) / std::log(10.0)));
    auto neg = [&](double t) { return g.g(t) <= 0.0; };
    auto bisect = [&](double t_out, double t_in) {
        // t_in is inside the negativity set, t_out outside; returns the boundary
        for (int it = 0; it < 100; ++it) {
            const double m = 0.5 * (t_out + t_in);
            (neg(m) ? t_in : t_out) = m;
        }
        return t_in;
    };
    std::vector<double> ts(ns + 1);
    for (int i = 0; i <= ns; ++i) ts[i] = std::exp(llo + (lhi - llo) * i / ns);
    ts.front() = lo;
    ts.back() = hi;
    // Walk a fine log grid from a point inside the negativity set toward t_stop;
    // the first sign change bounds the component boundary, which bisection then
    // resolves. A coarse-sample gap can hide a whole positive stretch, so the
    // boundary must be tracked from the seed's own component outward.
    const int nf = 1024;
    auto boundary = [&](double t_seed, double t_stop) {
        const double lseed = std::log(t_seed), lstop = std::log(t_stop);
        double prev = t_seed;
        for (int i = 1; i <= nf; ++i) {
            const double t = i == nf ? t_stop : std::exp(lseed + (lstop - lseed) * i / nf);
            if (!neg(t)) return bisect(t, prev);
            prev = t;
        }
        return t_stop;
    };
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i <= ns; ++i) {
        if (!neg(ts[i])) continue;
        if (!out.empty() && ts[i] <= out.back().second) continue;  // component seen
        int a = i, b = i;
        while (a > 0 && neg(ts[a - 1])) --a;
        while (b < ns && neg(ts[b + 1])) ++b;
        const double left = a == 0 ? boundary(ts[i], lo) : boundary(ts[i], ts[a - 1]);
        const double right = b == ns ? boundary(ts[i], hi) : boundary(ts[i], ts[b + 1]);
        out.emplace_back(left, right);
    }
    for (auto& [d, e] : out) {
        const double w = e - d;
        d += 0.01 * w;
        e -= 0.01 * w;
    }
    return out;
}

inline TruncationLadder scan_sign_ladder(const CompositeG& g, LadderDirection direction,
                                         double lo, double hi, int K,
                                         int samples_per_decade = 512) {
    if (K < 1) throw std::invalid_argument("ladder depth K must be >= 1");
    auto iv = negativity_intervals(g, lo, hi, samples_per_decade);
    // negativity certificate: g <= 0 at 1000 interior samples of each interval
    for (const auto& [d, e] : iv)
        for (int i = 0; i <= 1000; ++i)
            if (g.g(d + (e - d) * i / 1000.0) > 0.0)
                throw std::logic_error("negativity certificate failed inside a scanned interval");
    if (static_cast<int>(iv.size()) < K)
        throw LadderExhaustedError(static_cast<int>(iv.size()), K);
    TruncationLadder ladder;
    ladder.direction = direction;
    std::sort(iv.begin(), iv.end());
    if (direction == LadderDirection::origin) {
        // K intervals closest to 0, indexed so eta_k decreases
        iv.resize(K);
        std::reverse(iv.begin(), iv.end());
    } else {
        // K largest, delta_k increasing
        iv.erase(iv.begin(), iv.end() - K);
    }
    ladder.rungs = std::move(iv);
    // nesting invariant
    for (int k = 0; k + 1 < K; ++k) {
        const auto& [dk, ek] = ladder.rungs[k];
        const auto& [dn, en] = ladder.rungs[k + 1];
        const bool ok = direction == LadderDirection::origin
                            ? (0 < en && en < dk && dk < ek)
                            : (0 < dk && dk < ek && ek < dn);
        if (!ok) throw std::logic_error("ladder nesting invariant violated");
    }
    return ladder;
}

struct HypothesisReport {
    double max_F_over_t2 = 0.0;
    double min_F_over_t2 = 0.0;
    double max_f_over_t = 0.0;
    double min_f_over_t = 0.0;
    std::vector<double> negative_witnesses;  // scales with f(t) < 0
    bool oscillation_witnessed = false;      // some f(t) < 0 among the scales
    bool growth_witnessed = false;           // max F/t^2 attained at the last scale
};

/// Finite-sample proxies for the limit hypotheses; diagnostics only — limits
/// cannot be certified numerically.
inline HypothesisReport validate_hypotheses(const Nonlinearity& nl,
                                            const std::vector<double>& scales) {
    HypothesisReport rep;
    if (scales.empty()) return rep;
    bool first = true;
    double best_ratio = 0.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const double t = scales[i];
        if (!(t > 0.0)) throw std::invalid_argument("scales must be positive");
        const double r2 = nl.F(t) / (t * t);
        const double r1 = nl.f(t) / t;
        if (first) {
            rep.max_F_over_t2 = rep.min_F_over_t2 = r2;
            rep.max_f_over_t = rep.min_f_over_t = r1;
            first = false;
        } else {
            rep.max_F_over_t2 = std::max(rep.max_F_over_t2, r2);
            rep.min_F_over_t2 = std::min(rep.min_F_over_t2, r2);
            rep.max_f_over_t = std::max(rep.max_f_over_t, r1);
            rep.min_f_over_t = std::min(rep.min_f_over_t, r1);
        }
        if (r2 >= best_ratio || i == 0) {
            best_ratio = r2;
            best_idx = i;
        }
        if (nl.f(t) < 0.0) rep.negative_witnesses.push_back(t);
    }
    rep.oscillation_witnessed = !rep.negative_witnesses.empty();
    rep.growth_witnessed = best_idx == scales.size() - 1;
    return rep;
}

}  // namespace oscilap
