#include "fairdag/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace fairdag {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ct: return "ct";
        case PolicyKind::ft: return "ft";
        case PolicyKind::laps: return "laps";
    }
    return "unknown";
}

std::string to_string(OrderMode mode) {
    return mode == OrderMode::fixed_topological ? "fixed-topological" : "dynamic-completion";
}

Rational PolicyConfig::default_speed() const {
    switch (kind) {
        case PolicyKind::ct: return 2;
        case PolicyKind::ft: return Rational(2 * (1 + epsilon.value_or(0)));
        case PolicyKind::laps: return Rational(1 + 3 * epsilon.value_or(0));
    }
    return 1;
}

void PolicyConfig::validate() const {
    if (kind != PolicyKind::ct) {
        if (!epsilon) throw std::invalid_argument("policy " + to_string(kind) + " requires epsilon");
        if (*epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
    }
    if (speed && *speed <= 0) throw std::invalid_argument("speed must be positive");
}

Rational ScheduleTrace::makespan() const {
    Rational end = 0;
    if (!segments.empty()) end = segments.back().end;
    for (const auto& [id, c] : completions) end = std::max(end, c);
    return end;
}

namespace {

// Component release = earliest release among its jobs.
std::vector<Rational> component_releases(const DagStructure& dag) {
    std::vector<std::optional<Rational>> rel(dag.component_count());
    for (std::size_t i = 0; i < dag.size(); ++i) {
        auto& r = rel[dag.component(i)];
        if (!r || dag.release(i) < *r) r = dag.release(i);
    }
    std::vector<Rational> out;
    for (auto& r : rel) out.push_back(r.value_or(0));
    return out;
}

}  // namespace

std::vector<JobId> laps_order(const std::vector<JobId>& waiting, const DagStructure& dag, OrderMode mode) {
    const auto comp_release = component_releases(dag);
    auto comp_less = [&](std::size_t a, std::size_t b) {
        const auto ca = dag.component(a), cb = dag.component(b);
        if (ca == cb) return false;
        if (comp_release[ca] != comp_release[cb]) return comp_release[ca] < comp_release[cb];
        return ca < cb;
    };

    std::vector<std::size_t> idx;
    for (JobId id : waiting) idx.push_back(dag.index_of(id));
    std::vector<std::size_t> ordered;

    if (mode == OrderMode::fixed_topological) {
        std::vector<std::size_t> pos(dag.size());
        const auto& topo = dag.topological_order();
        for (std::size_t p = 0; p < topo.size(); ++p) pos[topo[p]] = p;
        ordered = idx;
        std::sort(ordered.begin(), ordered.end(), [&](auto a, auto b) {
            if (comp_less(a, b)) return true;
            if (comp_less(b, a)) return false;
            return pos[a] < pos[b];
        });
    } else {
        std::vector<bool> in(dag.size(), false);
        for (auto i : idx) in[i] = true;
        std::vector<std::size_t> indegree(dag.size(), 0);
        for (auto i : idx) {
            for (auto p : dag.predecessors(i)) indegree[i] += in[p] ? 1 : 0;
        }
        auto later = [&](std::size_t a, std::size_t b) {
            if (comp_less(a, b)) return false;
            if (comp_less(b, a)) return true;
            return a > b;
        };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
        for (auto i : idx) {
            if (indegree[i] == 0) ready.push(i);
        }
        while (!ready.empty()) {
            auto u = ready.top();
            ready.pop();
            ordered.push_back(u);
            for (auto v : dag.successors(u)) {
                if (in[v] && --indegree[v] == 0) ready.push(v);
            }
        }
    }

    std::vector<JobId> out;
    for (auto i : ordered) out.push_back(dag.id(i));
    return out;
}

LapsWeights laps_weights(const std::vector<JobId>& waiting, const DagStructure& dag, const Rational& epsilon,
                         OrderMode mode) {
    if (waiting.empty()) throw std::invalid_argument("laps_weights: waiting set is empty");
    if (epsilon <= 0) throw std::invalid_argument("laps_weights: epsilon must be positive");
    LapsWeights out;
    out.order = laps_order(waiting, dag, mode);
    std::vector<Rational> w;
    Rational total = 0;
    for (JobId id : out.order) {
        w.push_back(dag.weight(dag.index_of(id)));
        total += w.back();
    }
    const Rational k = 1 / epsilon;
    out.exact = is_integer(k);
    if (out.exact) {
        const unsigned long power = k.get_num().get_ui();
        const Rational denom = pow_int(total, power);
        Rational prefix = 0;
        Rational prev = 0;
        for (const auto& wj : w) {
            prefix += wj;
            Rational cur = pow_int(prefix, power);
            out.hatw.push_back((cur - prev) / denom);
            prev = cur;
        }
    } else {
        const double kd = to_double(k);
        const double W = to_double(total);
        Rational prefix = 0;
        Rational assigned = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double before = std::pow(to_double(prefix) / W, kd);
            prefix += w[i];
            if (i + 1 == w.size()) {
                out.hatw.push_back(1 - assigned);
            } else {
                const double after = std::pow(to_double(prefix) / W, kd);
                Rational h(after - before);
                out.hatw.push_back(h);
                assigned += h;
            }
        }
    }
    for (const auto& h : out.hatw) {
        if (h <= 0) throw std::logic_error("laps_weights: non-positive weight");
    }
    return out;
}

RatePolicy::RatePolicy(const DagStructure& dag, PolicyConfig config) : dag_(dag), config_(std::move(config)) {
    config_.validate();
}

RateSnapshot RatePolicy::decide(const std::vector<JobId>& waiting) const {
    RateSnapshot snap;
    snap.graph = build_rate_graph(waiting, dag_);
    if (config_.kind == PolicyKind::laps) {
        snap.laps = laps_weights(waiting, dag_, *config_.epsilon, config_.order_mode);
        std::vector<Rational> by_right(snap.graph.right.size());
        for (std::size_t i = 0; i < snap.laps->order.size(); ++i) {
            by_right[snap.graph.right_index(snap.laps->order[i])] = snap.laps->hatw[i];
        }
        snap.weights = std::move(by_right);
    } else {
        for (JobId id : snap.graph.right) snap.weights.push_back(dag_.weight(dag_.index_of(id)));
    }
    snap.solution = solve_rates(snap.graph, snap.weights);
    return snap;
}

WorkOracle::WorkOracle(const Instance& inst, const DagStructure& dag) : residual_(dag.size()) {
    for (const auto& job : inst.jobs) residual_[dag.index_of(job.id)] = job.size;
}

void WorkOracle::process(std::size_t index, const Rational& volume) {
    residual_[index] -= volume;
    if (residual_[index] < 0) throw std::logic_error("WorkOracle: job processed past its size");
}

SimulationResult simulate(const Instance& inst, const PolicyConfig& policy) {
    policy.validate();
    if (auto report = validate_instance(inst); !report.ok()) {
        throw std::invalid_argument("simulate: invalid instance: " + report.violations.front().message);
    }
    if (policy.kind != PolicyKind::ct && policy.enforce_no_surprises && !inst.no_surprises) {
        throw IncompatiblePolicy("policy " + to_string(policy.kind) +
                                 " requires every precedence component to share one release date");
    }

    const DagStructure dag(inst);
    const RatePolicy rate_policy(dag, policy);
    WorkOracle oracle(inst, dag);
    const Rational speed = policy.effective_speed();
    const std::size_t n = dag.size();

    SimulationResult result;
    auto& trace = result.trace;
    trace.speed = speed;
    trace.machines = inst.machines;

    std::vector<std::size_t> by_release(n);
    for (std::size_t i = 0; i < n; ++i) by_release[i] = i;
    std::stable_sort(by_release.begin(), by_release.end(),
                     [&](auto a, auto b) { return dag.release(a) < dag.release(b); });
    std::size_t next_release = 0;

    std::vector<bool> waiting(n, false), completed(n, false), started(n, false);
    std::vector<std::size_t> pending(n);
    for (std::size_t i = 0; i < n; ++i) pending[i] = dag.predecessors(i).size();
    std::size_t waiting_count = 0;

    auto complete = [&](std::size_t i, const Rational& t) {
        waiting[i] = false;
        completed[i] = true;
        --waiting_count;
        trace.completions[dag.id(i)] = t;
        for (auto s : dag.successors(i)) --pending[s];
    };
    auto minimal = [&](std::size_t i) { return waiting[i] && pending[i] == 0; };

    Rational t = 0;
    for (;;) {
        while (next_release < n && dag.release(by_release[next_release]) <= t) {
            auto i = by_release[next_release++];
            waiting[i] = true;
            ++waiting_count;
        }

        // Zero-volume minimal jobs finish now, in topological waves.
        for (std::size_t wave = 0; wave <= n; ++wave) {
            std::vector<std::size_t> done;
            for (std::size_t i = 0; i < n; ++i) {
                if (minimal(i) && oracle.finished(i)) done.push_back(i);
            }
            if (done.empty()) break;
            for (auto i : done) {
                if (!started[i]) {
                    started[i] = true;
                    trace.start_times[dag.id(i)] = t;
                }
                complete(i, t);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (minimal(i) && !started[i]) {
                started[i] = true;
                trace.start_times[dag.id(i)] = t;
            }
        }

        if (waiting_count == 0) {
            if (next_release == n) break;
            const Rational next = dag.release(by_release[next_release]);
            trace.segments.push_back({t, next, {}});
            if (policy.record_history) result.history.emplace_back();
            t = next;
            continue;
        }

        std::vector<JobId> waiting_ids;
        for (std::size_t i = 0; i < n; ++i) {
            if (waiting[i]) waiting_ids.push_back(dag.id(i));
        }
        RateSnapshot snap = rate_policy.decide(waiting_ids);
        const auto& g = snap.graph;

        Segment seg;
        seg.start = t;
        std::optional<Rational> horizon;
        for (std::size_t l = 0; l < g.left.size(); ++l) {
            const Rational& rate = snap.solution.L[l];
            seg.rates.emplace_back(g.left[l], rate);
            if (rate > 0) {
                Rational dt = oracle.time_to_finish(dag.index_of(g.left[l]), rate * speed);
                if (!horizon || dt < *horizon) horizon = dt;
            }
        }
        if (!horizon) throw std::logic_error("simulate: no minimal job received a positive rate");
        Rational t_next = t + *horizon;
        if (next_release < n && dag.release(by_release[next_release]) < t_next) {
            t_next = dag.release(by_release[next_release]);
        }
        const Rational dt = t_next - t;
        for (const auto& [id, rate] : seg.rates) oracle.process(dag.index_of(id), rate * speed * dt);
        seg.end = t_next;

        result.decisions.push_back({std::move(waiting_ids), seg.rates});
        for (const auto& [id, rate] : seg.rates) {
            auto i = dag.index_of(id);
            if (oracle.finished(i)) complete(i, t_next);
        }
        trace.segments.push_back(std::move(seg));
        if (policy.record_history) result.history.emplace_back(std::move(snap));
        t = t_next;
    }
    return result;
}

}  // namespace fairdag
