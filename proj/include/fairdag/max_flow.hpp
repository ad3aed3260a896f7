#pragma once

#include "fairdag/rational.hpp"

#include <cstddef>
#include <vector>

namespace fairdag {

/// Dinic's algorithm over exact rational capacities. Nodes are dense
/// indices; edges are returned by add_edge for later flow lookups.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t nodes);

    std::size_t add_edge(std::size_t from, std::size_t to, const Rational& capacity);
    Rational run(std::size_t source, std::size_t sink);

    const Rational& flow(std::size_t edge) const { return arcs_[2 * edge].flow; }

    /// Nodes reachable from `source` in the residual graph after run().
    std::vector<bool> residual_reachable_from(std::size_t source) const;
    /// Nodes that can reach `sink` in the residual graph after run().
    std::vector<bool> residual_reaching(std::size_t sink) const;

private:
    struct Arc {
        std::size_t to;
        Rational capacity;
        Rational flow;
    };

    Rational residual(std::size_t arc) const { return arcs_[arc].capacity - arcs_[arc].flow; }
    bool build_levels(std::size_t source, std::size_t sink);
    Rational augment(std::size_t node, std::size_t sink, const Rational& limit);

    std::vector<Arc> arcs_;  // arc 2k is forward edge k, arc 2k+1 its reverse
    std::vector<std::vector<std::size_t>> out_;
    std::vector<int> level_;
    std::vector<std::size_t> cursor_;
};

}  // namespace fairdag
