#pragma once

#include "fairdag/instance.hpp"

#include <vector>

namespace fairdag {

struct RateEdge {
    std::size_t left;   // index into BipartiteRateGraph::left
    std::size_t right;  // index into BipartiteRateGraph::right
};

/// Snapshot graph between minimal jobs (left) and waiting jobs (right).
/// An edge joins a minimal job to every waiting job reachable from it,
/// including itself.
struct BipartiteRateGraph {
    std::vector<JobId> left;   // sorted
    std::vector<JobId> right;  // sorted
    std::vector<RateEdge> edges;  // sorted by (left, right)
    /// Fixed DAG path for each edge, parallel to `edges`; empty for self edges.
    std::vector<std::vector<DagEdge>> paths;
    int machines = 1;

    std::vector<std::vector<std::size_t>> left_edges;   // edge ids per left vertex
    std::vector<std::vector<std::size_t>> right_edges;  // edge ids per right vertex

    std::size_t left_index(JobId id) const;
    std::size_t right_index(JobId id) const;
    bool has_left(JobId id) const;
};

/// `waiting` must be non-empty and closed under waiting predecessors.
/// Paths are breadth-first from the minimal job, expanding successors in
/// increasing id order, so each path is shortest and deterministic.
BipartiteRateGraph build_rate_graph(const std::vector<JobId>& waiting, const DagStructure& dag);
BipartiteRateGraph build_rate_graph(const std::vector<JobId>& waiting, const Instance& inst);

}  // namespace fairdag
