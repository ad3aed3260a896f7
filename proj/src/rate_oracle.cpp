#include "fairdag/rate_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace fairdag {

namespace {

// Projection of one block onto {x >= 0, sum x <= 1}.
void project_capped_simplex(const std::vector<double>& y, const std::vector<std::size_t>& idx, double shift,
                            std::vector<double>& out) {
    double positive_sum = 0.0;
    for (auto i : idx) positive_sum += std::max(y[i] - shift, 0.0);
    if (positive_sum <= 1.0) {
        for (auto i : idx) out[i] = std::max(y[i] - shift, 0.0);
        return;
    }
    std::vector<double> v;
    v.reserve(idx.size());
    for (auto i : idx) v.push_back(y[i] - shift);
    std::sort(v.begin(), v.end(), std::greater<>());
    double cumulative = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        cumulative += v[k];
        double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (v[k] - candidate > 0) tau = candidate;
    }
    for (auto i : idx) out[i] = std::max(y[i] - shift - tau, 0.0);
}

}  // namespace

std::vector<double> project_rate_polytope(const std::vector<double>& y,
                                          const std::vector<std::vector<std::size_t>>& blocks, double machines) {
    std::vector<double> out(y.size(), 0.0);
    auto total_at = [&](double mu) {
        double total = 0.0;
        for (const auto& b : blocks) {
            project_capped_simplex(y, b, mu, out);
            for (auto i : b) total += out[i];
        }
        return total;
    };
    if (total_at(0.0) <= machines) return out;
    double lo = 0.0, hi = 1.0;
    while (total_at(hi) > machines) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (total_at(mid) > machines ? lo : hi) = mid;
    }
    total_at(hi);
    return out;
}

OracleRates brute_oracle_rates(const BipartiteRateGraph& g, const std::vector<Rational>& weights, int iterations,
                               double gradient_tol) {
    if (weights.size() != g.right.size()) throw std::invalid_argument("brute_oracle_rates: weight size mismatch");
    const std::size_t E = g.edges.size();
    std::vector<double> w;
    for (const auto& x : weights) w.push_back(to_double(x));
    const double m = g.machines;

    auto right_sums = [&](const std::vector<double>& z) {
        std::vector<double> R(g.right.size(), 0.0);
        for (std::size_t e = 0; e < E; ++e) R[g.edges[e].right] += z[e];
        return R;
    };
    auto objective = [&](const std::vector<double>& z) {
        auto R = right_sums(z);
        double f = 0.0;
        for (std::size_t r = 0; r < R.size(); ++r) {
            if (!(R[r] > 0.0)) return -std::numeric_limits<double>::infinity();
            f += w[r] * std::log(R[r]);
        }
        return f;
    };
    auto gradient = [&](const std::vector<double>& z) {
        auto R = right_sums(z);
        std::vector<double> grad(E);
        for (std::size_t e = 0; e < E; ++e) grad[e] = w[g.edges[e].right] / R[g.edges[e].right];
        return grad;
    };

    std::vector<double> z(E);
    const double per_left = std::min(1.0, m / static_cast<double>(g.left.size()));
    for (std::size_t l = 0; l < g.left.size(); ++l) {
        for (auto e : g.left_edges[l]) z[e] = per_left / static_cast<double>(g.left_edges[l].size());
    }

    OracleRates out;
    double f = objective(z);
    double step = 1.0;
    auto step_to = [&](const std::vector<double>& grad, double s) {
        std::vector<double> y(E);
        for (std::size_t e = 0; e < E; ++e) y[e] = z[e] + s * grad[e];
        return project_rate_polytope(y, g.left_edges, m);
    };
    int it = 0;
    for (; it < iterations; ++it) {
        auto grad = gradient(z);
        auto unit = step_to(grad, 1.0);
        double pg = 0.0;
        for (std::size_t e = 0; e < E; ++e) pg += (unit[e] - z[e]) * (unit[e] - z[e]);
        out.projected_gradient_norm = std::sqrt(pg);
        if (out.projected_gradient_norm < gradient_tol) {
            out.converged = true;
            break;
        }
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            auto cand = step_to(grad, step);
            double ascent = 0.0;
            for (std::size_t e = 0; e < E; ++e) ascent += grad[e] * (cand[e] - z[e]);
            double fc = objective(cand);
            if (fc >= f + 1e-4 * ascent) {
                moved = fc > f || ascent <= 0.0;
                z = std::move(cand);
                f = fc;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    out.iterations = it;
    out.z = z;
    out.R = right_sums(z);
    out.L.assign(g.left.size(), 0.0);
    for (std::size_t e = 0; e < E; ++e) out.L[g.edges[e].left] += z[e];
    out.objective = f;
    return out;
}

}  // namespace fairdag
