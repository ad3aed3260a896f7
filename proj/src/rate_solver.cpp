#include "fairdag/rate_solver.hpp"

#include "fairdag/max_flow.hpp"

#include "json.hpp"

#include <cmath>
#include <stdexcept>

namespace fairdag {

namespace {

constexpr std::size_t kSource = 0;
constexpr std::size_t kSink = 1;

// One max-flow evaluation of the phase subgraph at parameter T:
// source -> right j (w_j T) -> adjacent left (unbounded) -> sink (1).
class FlowProbe {
public:
    FlowProbe(const BipartiteRateGraph& g, const std::vector<Rational>& w, const std::vector<bool>& right_on,
              const std::vector<bool>& left_on, const Rational& T)
        : g_(g), right_on_(right_on), left_on_(left_on), net_(2 + g.right.size() + g.left.size()),
          arc_of_edge_(g.edges.size(), SIZE_MAX) {
        Rational unbounded = 1;
        for (std::size_t r = 0; r < g.right.size(); ++r) {
            if (!right_on[r]) continue;
            demand_ += w[r] * T;
            net_.add_edge(kSource, right_node(r), w[r] * T);
        }
        for (std::size_t l = 0; l < g.left.size(); ++l) {
            if (!left_on[l]) continue;
            unbounded += 1;
            net_.add_edge(left_node(l), kSink, 1);
        }
        unbounded += demand_;
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const auto& edge = g.edges[e];
            if (right_on[edge.right] && left_on[edge.left]) {
                arc_of_edge_[e] = net_.add_edge(right_node(edge.right), left_node(edge.left), unbounded);
            }
        }
        flow_ = net_.run(kSource, kSink);
    }

    bool saturated() const { return flow_ == demand_; }

    /// Right vertices on the source side of the minimal minimum cut.
    std::vector<std::size_t> deficient_set() const {
        auto seen = net_.residual_reachable_from(kSource);
        std::vector<std::size_t> out;
        for (std::size_t r = 0; r < g_.right.size(); ++r) {
            if (right_on_[r] && seen[right_node(r)]) out.push_back(r);
        }
        return out;
    }

    /// Right vertices on the source side of the maximal minimum cut.
    std::vector<std::size_t> maximal_tight_set() const {
        auto reach = net_.residual_reaching(kSink);
        std::vector<std::size_t> out;
        for (std::size_t r = 0; r < g_.right.size(); ++r) {
            if (right_on_[r] && !reach[right_node(r)]) out.push_back(r);
        }
        return out;
    }

    Rational edge_flow(std::size_t e) const {
        return arc_of_edge_[e] == SIZE_MAX ? Rational(0) : net_.flow(arc_of_edge_[e]);
    }

private:
    std::size_t right_node(std::size_t r) const { return 2 + r; }
    std::size_t left_node(std::size_t l) const { return 2 + g_.right.size() + l; }

    const BipartiteRateGraph& g_;
    const std::vector<bool>& right_on_;
    const std::vector<bool>& left_on_;
    MaxFlow net_;
    std::vector<std::size_t> arc_of_edge_;
    Rational demand_ = 0;
    Rational flow_ = 0;
};

std::vector<std::size_t> neighborhood(const BipartiteRateGraph& g, const std::vector<std::size_t>& rights,
                                      const std::vector<bool>& left_on) {
    std::vector<bool> mark(g.left.size(), false);
    for (auto r : rights) {
        for (auto e : g.right_edges[r]) {
            if (left_on[g.edges[e].left]) mark[g.edges[e].left] = true;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < mark.size(); ++l) {
        if (mark[l]) out.push_back(l);
    }
    return out;
}

Rational weight_of(const std::vector<Rational>& w, const std::vector<std::size_t>& rights) {
    Rational total = 0;
    for (auto r : rights) total += w[r];
    return total;
}

void check_inputs(const BipartiteRateGraph& g, const std::vector<Rational>& w) {
    if (w.size() != g.right.size()) throw std::invalid_argument("weights do not match right side of graph");
    for (const auto& x : w) {
        if (x <= 0) throw std::invalid_argument("weights must be positive");
    }
}

}  // namespace

std::optional<std::vector<JobId>> find_tight_set(const BipartiteRateGraph& graph,
                                                 const std::vector<Rational>& weights, const Rational& T) {
    check_inputs(graph, weights);
    if (T <= 0) throw std::invalid_argument("find_tight_set: T must be positive");
    std::vector<bool> right_on(graph.right.size(), true);
    std::vector<bool> left_on(graph.left.size(), true);
    FlowProbe probe(graph, weights, right_on, left_on, T);
    auto set = probe.saturated() ? probe.maximal_tight_set() : probe.deficient_set();
    if (set.empty()) return std::nullopt;
    std::vector<JobId> ids;
    for (auto r : set) ids.push_back(graph.right[r]);
    return ids;
}

RateSolution solve_rates(const BipartiteRateGraph& g, const std::vector<Rational>& w) {
    check_inputs(g, w);
    if (g.right.empty()) throw std::invalid_argument("solve_rates: empty graph");

    RateSolution sol;
    sol.z.assign(g.edges.size(), 0);
    sol.L.assign(g.left.size(), 0);
    sol.R.assign(g.right.size(), 0);
    sol.theta.assign(g.left.size(), 0);
    sol.nu.assign(g.edges.size(), 0);
    sol.left_phase.assign(g.left.size(), SIZE_MAX);
    sol.right_phase.assign(g.right.size(), SIZE_MAX);

    std::vector<bool> right_on(g.right.size(), true);
    std::vector<bool> left_on(g.left.size(), true);
    std::size_t left_active = g.left.size();
    std::size_t left_removed = 0;
    bool ended_on_budget = false;

    while (left_active > 0) {
        std::vector<std::size_t> rights;
        for (std::size_t r = 0; r < g.right.size(); ++r) {
            if (right_on[r]) rights.push_back(r);
        }
        const Rational w_active = weight_of(w, rights);
        const Rational t_full = Rational(static_cast<long>(left_active)) / w_active;
        const Rational t_budget = Rational(g.machines - static_cast<long>(left_removed)) / w_active;

        // Dinkelbach descent onto the smallest neighborhood ratio, capped by
        // the budget time.
        Rational T = t_full < t_budget ? t_full : t_budget;
        std::optional<FlowProbe> probe;
        for (;;) {
            probe.emplace(g, w, right_on, left_on, T);
            if (probe->saturated()) break;
            auto deficient = probe->deficient_set();
            T = Rational(static_cast<long>(neighborhood(g, deficient, left_on).size())) / weight_of(w, deficient);
        }

        PhaseRecord phase;
        phase.end_time = T;
        const std::size_t p = sol.phases.size();
        auto tight = probe->maximal_tight_set();
        if (!tight.empty()) {
            auto gamma = neighborhood(g, tight, left_on);
            if (Rational(static_cast<long>(gamma.size())) != T * weight_of(w, tight)) {
                throw std::logic_error("solve_rates: maximal cut is not tight");
            }
            phase.kind = PhaseKind::tight;
            for (auto r : tight) {
                sol.R[r] = w[r] * T;
                sol.right_phase[r] = p;
                right_on[r] = false;
                phase.removed_right.push_back(g.right[r]);
                for (auto e : g.right_edges[r]) sol.z[e] = probe->edge_flow(e);
            }
            for (auto l : gamma) {
                sol.L[l] = 1;
                sol.left_phase[l] = p;
                left_on[l] = false;
                phase.removed_left.push_back(g.left[l]);
            }
            left_active -= gamma.size();
            left_removed += gamma.size();
            sol.phases.push_back(std::move(phase));
            continue;
        }

        if (T != t_budget) throw std::logic_error("solve_rates: no event at saturated time");
        phase.kind = PhaseKind::budget;
        for (auto r : rights) {
            sol.R[r] = w[r] * T;
            sol.right_phase[r] = p;
            phase.removed_right.push_back(g.right[r]);
            for (auto e : g.right_edges[r]) {
                if (left_on[g.edges[e].left]) sol.z[e] = probe->edge_flow(e);
            }
        }
        for (std::size_t l = 0; l < g.left.size(); ++l) {
            if (!left_on[l]) continue;
            for (auto e : g.left_edges[l]) sol.L[l] += sol.z[e];
            sol.left_phase[l] = p;
            phase.removed_left.push_back(g.left[l]);
        }
        sol.phases.push_back(std::move(phase));
        ended_on_budget = true;
        break;
    }

    sol.eta = ended_on_budget ? Rational(1 / sol.phases.back().end_time) : Rational(0);
    for (std::size_t l = 0; l < g.left.size(); ++l) {
        const auto& ph = sol.phases[sol.left_phase[l]];
        sol.theta[l] = ph.kind == PhaseKind::budget ? Rational(0) : Rational(1 / ph.end_time - sol.eta);
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto& edge = g.edges[e];
        sol.nu[e] = sol.theta[edge.left] + sol.eta - w[edge.right] / sol.R[edge.right];
        if (sol.nu[e] < 0 || (sol.nu[e] > 0 && sol.z[e] != 0)) {
            throw std::logic_error("solve_rates: edge multiplier construction failed");
        }
    }
    return sol;
}

double cp_objective(const std::vector<Rational>& R, const std::vector<Rational>& weights) {
    std::vector<double> r;
    r.reserve(R.size());
    for (const auto& x : R) {
        if (x <= 0) throw std::domain_error("cp_objective: non-positive virtual rate");
        r.push_back(to_double(x));
    }
    return cp_objective(r, weights);
}

double cp_objective(const std::vector<double>& R, const std::vector<Rational>& weights) {
    if (R.size() != weights.size()) throw std::invalid_argument("cp_objective: size mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < R.size(); ++j) {
        if (!(R[j] > 0.0)) throw std::domain_error("cp_objective: non-positive virtual rate");
        total += to_double(weights[j]) * std::log(R[j]);
    }
    return total;
}

std::string rate_solution_json(const BipartiteRateGraph& g, const RateSolution& sol) {
    using nlohmann::json;
    json j;
    j["machines"] = g.machines;
    j["eta"] = to_fraction_string(sol.eta);
    json left = json::array();
    for (std::size_t l = 0; l < g.left.size(); ++l) {
        left.push_back({{"job", g.left[l]}, {"L", to_fraction_string(sol.L[l])},
                        {"theta", to_fraction_string(sol.theta[l])}});
    }
    j["left"] = std::move(left);
    json right = json::array();
    for (std::size_t r = 0; r < g.right.size(); ++r) {
        right.push_back({{"job", g.right[r]}, {"R", to_fraction_string(sol.R[r])}});
    }
    j["right"] = std::move(right);
    json edges = json::array();
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        edges.push_back({{"left", g.left[g.edges[e].left]}, {"right", g.right[g.edges[e].right]},
                         {"z", to_fraction_string(sol.z[e])}, {"nu", to_fraction_string(sol.nu[e])}});
    }
    j["edges"] = std::move(edges);
    json phases = json::array();
    for (const auto& ph : sol.phases) {
        phases.push_back({{"end_time", to_fraction_string(ph.end_time)},
                          {"kind", ph.kind == PhaseKind::tight ? "tight" : "budget"},
                          {"removed_right", ph.removed_right},
                          {"removed_left", ph.removed_left}});
    }
    j["phases"] = std::move(phases);
    return j.dump(1) + "\n";
}

}  // namespace fairdag
