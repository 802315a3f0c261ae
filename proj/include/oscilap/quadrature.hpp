#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oscilap/errors.hpp"

namespace oscilap {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes/weights via Newton iteration on the Legendre polynomial. Cached per order.
inline const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    if (order < 1 || order > 64) throw std::invalid_argument("gauss_legendre: order out of range");

    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[order - 1 - i] = rule.weights[i];
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

/// Fixed-order Gauss on [a, b].
template <class F>
double gauss_integrate(const F& f, double a, double b, int order) {
    const GaussRule& r = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
    return half * sum;
}

/// Adaptive 1D Gauss: bisect until the refined estimate is stable.
template <class F>
double adaptive_integrate(const F& f, double a, double b, int order, double abs_tol,
                          int max_cells, int* cells_used = nullptr) {
    struct Worker {
        const F& f;
        int order;
        int budget;
        int used = 0;
        Worker(const F& f, int order, int budget) : f(f), order(order), budget(budget) {}
        double run(double a, double b, double coarse, double tol, int depth) {
            if (++used > budget)
                throw QuadratureError("adaptive_integrate: cell budget exhausted");
            const double m = 0.5 * (a + b);
            const double left = gauss_integrate(f, a, m, order);
            const double right = gauss_integrate(f, m, b, order);
            const double fine = left + right;
            // The relative floor stops refinement once an interval is resolved to
            // ~7 digits; the depth cap stops fractional-power endpoint behaviour
            // before intervals get so small that evaluating the abscissae loses the
            // distance to the endpoint to roundoff (the abandoned remainder scales
            // like a positive power of the interval width and is negligible).
            const double diff = std::abs(fine - coarse);
            if (depth > 0 && (diff <= tol || diff <= 1e-7 * std::abs(fine) || depth >= 30))
                return fine;
            return run(a, m, left, 0.5 * tol, depth + 1) +
                   run(m, b, right, 0.5 * tol, depth + 1);
        }
    };
    Worker w(f, order, max_cells);
    const double coarse = gauss_integrate(f, a, b, order);
    const double result = w.run(a, b, coarse, abs_tol, 0);
    if (cells_used) *cells_used = w.used;
    return result;
}

}  // namespace oscilap
