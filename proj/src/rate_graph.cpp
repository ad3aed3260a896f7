#include "fairdag/rate_graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace fairdag {

namespace {

std::size_t find_sorted(const std::vector<JobId>& ids, JobId id, const char* side) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) {
        throw std::out_of_range(std::string("job ") + std::to_string(id) + " is not on the " + side + " side");
    }
    return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

std::size_t BipartiteRateGraph::left_index(JobId id) const { return find_sorted(left, id, "left"); }
std::size_t BipartiteRateGraph::right_index(JobId id) const { return find_sorted(right, id, "right"); }
bool BipartiteRateGraph::has_left(JobId id) const { return std::binary_search(left.begin(), left.end(), id); }

BipartiteRateGraph build_rate_graph(const std::vector<JobId>& waiting, const DagStructure& dag) {
    if (waiting.empty()) throw std::invalid_argument("build_rate_graph: waiting set is empty");

    BipartiteRateGraph g;
    g.machines = dag.machines();
    g.right = waiting;
    std::sort(g.right.begin(), g.right.end());
    if (std::adjacent_find(g.right.begin(), g.right.end()) != g.right.end()) {
        throw std::invalid_argument("build_rate_graph: duplicate waiting job");
    }

    std::vector<bool> is_waiting(dag.size(), false);
    std::vector<std::size_t> right_of(dag.size(), 0);
    for (std::size_t r = 0; r < g.right.size(); ++r) {
        auto idx = dag.index_of(g.right[r]);
        is_waiting[idx] = true;
        right_of[idx] = r;
    }
    for (JobId id : g.right) {
        auto idx = dag.index_of(id);
        bool minimal = std::none_of(dag.predecessors(idx).begin(), dag.predecessors(idx).end(),
                                    [&](std::size_t p) { return is_waiting[p]; });
        if (minimal) g.left.push_back(id);
    }

    g.left_edges.resize(g.left.size());
    g.right_edges.resize(g.right.size());
    std::vector<std::size_t> parent(dag.size());
    std::vector<bool> seen(dag.size(), false);
    std::vector<std::size_t> visited;
    for (std::size_t l = 0; l < g.left.size(); ++l) {
        const auto root = dag.index_of(g.left[l]);
        visited.clear();
        std::deque<std::size_t> queue{root};
        seen[root] = true;
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            visited.push_back(u);
            for (auto v : dag.successors(u)) {
                if (!is_waiting[v] || seen[v]) continue;
                seen[v] = true;
                parent[v] = u;
                queue.push_back(v);
            }
        }
        std::sort(visited.begin(), visited.end(), [&](auto a, auto b) { return right_of[a] < right_of[b]; });
        for (auto v : visited) {
            const auto e = g.edges.size();
            g.edges.push_back({l, right_of[v]});
            std::vector<DagEdge> path;
            for (auto x = v; x != root; x = parent[x]) path.emplace_back(dag.id(parent[x]), dag.id(x));
            std::reverse(path.begin(), path.end());
            g.paths.push_back(std::move(path));
            g.left_edges[l].push_back(e);
            g.right_edges[right_of[v]].push_back(e);
        }
        for (auto v : visited) seen[v] = false;
    }
    return g;
}

BipartiteRateGraph build_rate_graph(const std::vector<JobId>& waiting, const Instance& inst) {
    return build_rate_graph(waiting, DagStructure(inst));
}

}  // namespace fairdag
