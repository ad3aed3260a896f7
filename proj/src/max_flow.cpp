#include "fairdag/max_flow.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace fairdag {

MaxFlow::MaxFlow(std::size_t nodes) : out_(nodes), level_(nodes), cursor_(nodes) {}

std::size_t MaxFlow::add_edge(std::size_t from, std::size_t to, const Rational& capacity) {
    if (from >= out_.size() || to >= out_.size()) throw std::out_of_range("MaxFlow::add_edge: bad node");
    if (capacity < 0) throw std::invalid_argument("MaxFlow::add_edge: negative capacity");
    const std::size_t id = arcs_.size() / 2;
    out_[from].push_back(arcs_.size());
    arcs_.push_back({to, capacity, 0});
    out_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0, 0});
    return id;
}

bool MaxFlow::build_levels(std::size_t source, std::size_t sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<std::size_t> queue{source};
    level_[source] = 0;
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto a : out_[u]) {
            auto v = arcs_[a].to;
            if (level_[v] < 0 && residual(a) > 0) {
                level_[v] = level_[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return level_[sink] >= 0;
}

Rational MaxFlow::augment(std::size_t node, std::size_t sink, const Rational& limit) {
    if (node == sink) return limit;
    for (auto& i = cursor_[node]; i < out_[node].size(); ++i) {
        const auto a = out_[node][i];
        const auto v = arcs_[a].to;
        if (level_[v] != level_[node] + 1) continue;
        Rational room = residual(a);
        if (room <= 0) continue;
        Rational pushed = augment(v, sink, room < limit ? room : limit);
        if (pushed > 0) {
            arcs_[a].flow += pushed;
            arcs_[a ^ 1].flow -= pushed;
            return pushed;
        }
    }
    level_[node] = -1;  // dead end for this phase
    return 0;
}

Rational MaxFlow::run(std::size_t source, std::size_t sink) {
    Rational total = 0;
    Rational unbounded = 1;
    for (std::size_t a = 0; a < arcs_.size(); a += 2) unbounded += arcs_[a].capacity;
    while (build_levels(source, sink)) {
        std::fill(cursor_.begin(), cursor_.end(), 0);
        for (Rational pushed; (pushed = augment(source, sink, unbounded)) > 0;) total += pushed;
    }
    return total;
}

std::vector<bool> MaxFlow::residual_reachable_from(std::size_t source) const {
    std::vector<bool> seen(out_.size(), false);
    std::vector<std::size_t> stack{source};
    seen[source] = true;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto a : out_[u]) {
            auto v = arcs_[a].to;
            if (!seen[v] && residual(a) > 0) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

std::vector<bool> MaxFlow::residual_reaching(std::size_t sink) const {
    // Walk reverse arcs: u reaches v in the residual iff arc u->v has room.
    std::vector<bool> seen(out_.size(), false);
    std::vector<std::size_t> stack{sink};
    seen[sink] = true;
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto a : out_[v]) {
            auto u = arcs_[a].to;
            if (!seen[u] && residual(a ^ 1) > 0) {
                seen[u] = true;
                stack.push_back(u);
            }
        }
    }
    return seen;
}

}  // namespace fairdag
