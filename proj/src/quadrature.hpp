#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gictmdp/model.hpp"

namespace gictmdp::detail {

/// Gauss-Legendre nodes and weights on [-1, 1], computed once by Newton
/// iteration on the Legendre polynomial.
struct GaussRule {
    std::vector<Real> nodes;
    std::vector<Real> weights;

    explicit GaussRule(int n) {
        nodes.resize(static_cast<size_t>(n));
        weights.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            Real x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                Real p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    Real p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                Real dp = n * (x * p1 - p0) / (x * x - 1.0);
                Real dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            Real p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                Real p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            Real dp = n * (x * p1 - p0) / (x * x - 1.0);
            nodes[static_cast<size_t>(i)] = x;
            weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

using VecIntegrand = std::function<void(Real, Vec&)>;

inline void fixed_quad(const GaussRule& rule, const VecIntegrand& f, Real a, Real b, Vec& out,
                       Vec& scratch) {
    std::fill(out.begin(), out.end(), 0.0);
    const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        f(mid + half * rule.nodes[i], scratch);
        const Real w = half * rule.weights[i];
        for (size_t j = 0; j < out.size(); ++j) out[j] += w * scratch[j];
    }
}

/// Adaptive bisection with an embedded whole-vs-halves error estimate,
/// accumulating into `acc` (sized like the integrand output).
inline void adaptive_quad(const GaussRule& rule, const VecIntegrand& f, Real a, Real b, Real tol,
                          Vec& acc, int depth = 0) {
    const size_t dim = acc.size();
    Vec whole(dim), left(dim), right(dim), scratch(dim);
    fixed_quad(rule, f, a, b, whole, scratch);
    const Real mid = 0.5 * (a + b);
    fixed_quad(rule, f, a, mid, left, scratch);
    fixed_quad(rule, f, mid, b, right, scratch);
    Real err = 0.0;
    for (size_t j = 0; j < dim; ++j) err += std::abs(whole[j] - left[j] - right[j]);
    if (err <= tol || depth >= 40) {
        for (size_t j = 0; j < dim; ++j) acc[j] += left[j] + right[j];
        return;
    }
    adaptive_quad(rule, f, a, mid, 0.5 * tol, acc, depth + 1);
    adaptive_quad(rule, f, mid, b, 0.5 * tol, acc, depth + 1);
}

}  // namespace gictmdp::detail
