#pragma once

#include "fairdag/rate_graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fairdag {

enum class PhaseKind { tight, budget };

struct PhaseRecord {
    Rational end_time;
    PhaseKind kind = PhaseKind::tight;
    std::vector<JobId> removed_right;  // sorted
    std::vector<JobId> removed_left;   // sorted
};

/// Primal and dual solution of the fair-rate program on one snapshot graph.
/// Vectors are parallel to the graph's edges, left, or right vertices.
struct RateSolution {
    std::vector<Rational> z;      // per edge
    std::vector<Rational> L;      // per left vertex
    std::vector<Rational> R;      // per right vertex
    std::vector<Rational> theta;  // per left vertex
    Rational eta;
    std::vector<Rational> nu;     // per edge
    std::vector<PhaseRecord> phases;
    std::vector<std::size_t> left_phase;   // phase that removed each left vertex
    std::vector<std::size_t> right_phase;  // phase that removed each right vertex
};

/// Right-side set J' with |Γ(J')| <= w(J')·T, or none. `weights` is parallel
/// to graph.right. When demands cannot all be routed, returns the
/// source-side certificate of the minimal minimum cut (strictly deficient).
/// Otherwise returns the union of all exactly tight sets if it is non-empty.
std::optional<std::vector<JobId>> find_tight_set(const BipartiteRateGraph& graph,
                                                 const std::vector<Rational>& weights, const Rational& T);

/// Water-filling solution of the program, exact. `weights` parallel to graph.right.
RateSolution solve_rates(const BipartiteRateGraph& graph, const std::vector<Rational>& weights);

/// Σ w_j ln R_j. Throws if some R_j is not positive.
double cp_objective(const std::vector<Rational>& R, const std::vector<Rational>& weights);
double cp_objective(const std::vector<double>& R, const std::vector<Rational>& weights);

std::string rate_solution_json(const BipartiteRateGraph& graph, const RateSolution& sol);

}  // namespace fairdag
