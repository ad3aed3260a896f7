// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include "fairdag/bounds.hpp"
#include "fairdag/kkt.hpp"
#include "fairdag/rate_oracle.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <iostream>
#include <sstream>

using namespace fairdag;

namespace {

struct Outcome {
    bool passed = true;
    std::ostringstream detail;
    std::vector<std::string> failures;

    void expect(bool condition, const std::string& what) {
        if (condition) return;
        passed = false;
        if (failures.size() < 5) failures.push_back(what);
    }
};

struct RunRecord {
    std::string label;
    const Instance* instance;
    PolicyConfig config;
    SimulationResult result;
};

// Everything later criteria re-inspect.
struct Corpus {
    std::vector<std::unique_ptr<Instance>> instances;
    std::vector<RunRecord> runs;
    std::vector<std::pair<BipartiteRateGraph, RateSolution>> solutions;

    const Instance* keep(Instance inst) {
        instances.push_back(std::make_unique<Instance>(std::move(inst)));
        return instances.back().get();
    }
    void add_run(std::string label, const Instance* inst, const PolicyConfig& pc, const SimulationResult& r) {
        for (const auto& h : r.history) {
            if (h) solutions.emplace_back(h->graph, h->solution);
        }
        runs.push_back({std::move(label), inst, pc, r});
    }
};

PolicyConfig config(PolicyKind kind, std::optional<Rational> eps = std::nullopt) {
    PolicyConfig pc;
    pc.kind = kind;
    pc.epsilon = eps;
    pc.record_history = true;
    return pc;
}

// Longest size-weighted chain ending at each job, by memoised recursion over predecessors.
std::map<JobId, Rational> chains_by_recursion(const Instance& inst) {
    std::map<JobId, Rational> size;
    std::map<JobId, std::vector<JobId>> preds;
    for (const auto& j : inst.jobs) size[j.id] = j.size;
    for (const auto& [u, v] : inst.dag.edges) preds[v].push_back(u);
    std::map<JobId, Rational> memo;
    std::function<Rational(JobId)> chain = [&](JobId j) -> Rational {
        if (auto it = memo.find(j); it != memo.end()) return it->second;
        Rational best = 0;
        for (JobId p : preds[j]) best = std::max(best, chain(p));
        return memo[j] = best + size[j];
    };
    for (const auto& j : inst.jobs) chain(j.id);
    return memo;
}

// ---- 1 ---------------------------------------------------------------------

Outcome solver_optimality(Corpus& corpus) {
    Outcome out;
    double worst_gap = -1e300;
    std::size_t max_right = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto s = testing::random_snapshot(10'000 + seed, 12);
        max_right = std::max(max_right, s.graph.right.size());
        const auto sol = solve_rates(s.graph, s.weights);
        const auto oracle = brute_oracle_rates(s.graph, s.weights);
        const double gap = oracle.objective - cp_objective(sol.R, s.weights);
        worst_gap = std::max(worst_gap, gap);
        out.expect(gap <= 1e-5, "seed " + std::to_string(seed) + ": oracle beats solver by " + std::to_string(gap));
        const auto kkt = kkt_audit(s.graph, sol, s.weights, 0.0);
        out.expect(kkt.ok(), "seed " + std::to_string(seed) + ": non-zero KKT residual");
        corpus.solutions.emplace_back(s.graph, sol);
    }
    out.detail << "200 snapshots, up to " << max_right << " right vertices; max oracle-minus-solver objective "
               << format_float(worst_gap) << "; KKT residuals exactly 0";
    return out;
}

// ---- 3 ---------------------------------------------------------------------

Instance unit_jobs(int n, int machines, std::vector<DagEdge> edges = {}) {
    Instance inst;
    inst.machines = machines;
    for (int i = 0; i < n; ++i) inst.jobs.push_back({i, 1, 1, 0});
    inst.dag.edges = std::move(edges);
    return inst;
}

Outcome worked_examples() {
    Outcome out;
    {
        const auto inst = unit_jobs(3, 1, {{0, 1}, {1, 2}});
        const auto g = build_rate_graph({0, 1, 2}, inst);
        const auto sol = solve_rates(g, {1, 1, 1});
        bool ok = sol.L == std::vector<Rational>{1} && sol.eta == 0 && sol.theta[0] == 3;
        for (const auto& r : sol.R) ok = ok && r == Rational(1, 3);
        out.expect(ok, "chain: expected R = 1/3 each, θ = 3, η = 0");
    }
    {
        auto inst = unit_jobs(2, 1);
        inst.jobs[0].weight = 3;
        const auto g = build_rate_graph({0, 1}, inst);
        const auto sol = solve_rates(g, {3, 1});
        const bool ok = sol.R == std::vector<Rational>{Rational(3, 4), Rational(1, 4)} && sol.L == sol.R &&
                        sol.eta == 4 && sol.theta == std::vector<Rational>{0, 0};
        out.expect(ok, "weighted split: expected 3/4, 1/4 with η = 4, θ = 0");
    }
    {
        const auto inst = unit_jobs(3, 2, {{0, 2}});
        const auto g = build_rate_graph({0, 1, 2}, inst);
        const auto sol = solve_rates(g, {1, 1, 1});
        const auto a = g.left_index(0), b = g.left_index(1);
        const bool ok = sol.phases.size() == 2 && sol.phases[0].removed_right == std::vector<JobId>{0, 2} &&
                        sol.phases[0].end_time == Rational(1, 2) && sol.phases[1].removed_right == std::vector<JobId>{1} &&
                        sol.R[g.right_index(0)] == Rational(1, 2) && sol.R[g.right_index(2)] == Rational(1, 2) &&
                        sol.R[g.right_index(1)] == 1 && sol.L[a] == 1 && sol.L[b] == 1 && sol.theta[a] == 2 &&
                        sol.theta[b] == 1 && sol.eta == 0;
        out.expect(ok, "two phases: expected {a,c} at T=1/2 then {b}; θ = (2, 1), η = 0");
    }
    out.detail << "chain, weighted split, two-phase examples exact including θ and η";
    return out;
}

// ---- 4, 5 ------------------------------------------------------------------

struct CtStats {
    std::size_t instances = 0, exhaustive = 0, feasible = 0;
    double worst_ratio = 0, worst_ratio_vs_opt = 0, min_chain_slack = 1e300, worst_dual_slack = -1e300;
};

CtStats ct_corpus(Corpus& corpus, Outcome& competitive, Outcome& feasibility) {
    CtStats st;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance* inst = corpus.keep(testing::random_instance(20'000 + seed, 30, false, {1, 2, 4}));
        const auto pc = config(PolicyKind::ct);
        auto run = simulate(*inst, pc);
        corpus.add_run("ct seed " + std::to_string(seed), inst, pc, run);
        const std::string tag = "seed " + std::to_string(seed);

        const auto cert = build_ct_duals(*inst, run);
        const auto feas = check_ct_dual_feasibility(*inst, cert, 1e-9);
        feasibility.expect(feas.ok(), tag + ": " + feas.find("dual_constraint")->first_violation);
        st.feasible += feas.ok();
        st.worst_dual_slack = std::max(st.worst_dual_slack, feas.find("dual_constraint")->worst);

        Rational chain = 0, release = 0;
        const auto chains = chains_by_recursion(*inst);
        for (const auto& j : inst->jobs) {
            chain += j.weight * chains.at(j.id);
            release += j.weight * j.release;
        }
        const Rational dual = dual_objective(cert);
        const Rational cost_a = objective(run.trace, *inst, ObjectiveKind::completion);
        const Rational cost_b = objective(slow_down(run.trace, 2), *inst, ObjectiveKind::completion);
        const Rational lb = std::max({dual, chain, release});
        competitive.expect(cost_b <= 10 * lb, tag + ": cost(B) exceeds 10x the lower bound");
        st.worst_ratio = std::max(st.worst_ratio, to_double(cost_b) / to_double(lb));
        const double chain_slack = to_double(2 * dual + chain + 2 * release - cost_a);
        competitive.expect(chain_slack >= -1e-9, tag + ": cost(A) chain inequality slack " + std::to_string(chain_slack));
        st.min_chain_slack = std::min(st.min_chain_slack, chain_slack);

        if (inst->jobs.size() <= 8) {
            const auto opt = exhaustive_opt(*inst, ObjectiveKind::completion);
            competitive.expect(opt.has_value(), tag + ": exhaustive search unavailable");
            if (opt) {
                ++st.exhaustive;
                const double r = to_double(cost_b) / to_double(*opt);
                st.worst_ratio_vs_opt = std::max(st.worst_ratio_vs_opt, r);
                competitive.expect(r <= 10, tag + ": cost(B)/opt = " + std::to_string(r));
            }
        }
        const auto report = competitive_report(*inst, {{pc, run}});
        competitive.expect(report.ok(), tag + ": competitive report checks fail");
        ++st.instances;
    }
    return st;
}

// ---- 6 ---------------------------------------------------------------------

Outcome flow_bounds(Corpus& corpus) {
    Outcome out;
    const Rational eps(1, 2);
    std::size_t nice_evals = 0, segment_evals = 0;
    double worst_flow_gap[2] = {-1e300, -1e300};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Instance* inst = corpus.keep(testing::random_instance(30'000 + seed, 30, true, {1, 2, 4}));
        for (auto [kind, mode, slot] : {std::tuple{PolicyKind::ft, DualMode::ft, 0}, std::tuple{PolicyKind::laps, DualMode::laps, 1}}) {
            const auto pc = config(kind, eps);
            const auto run = simulate(*inst, pc);
            corpus.add_run(to_string(kind) + " seed " + std::to_string(seed), inst, pc, run);
            const auto audit = flow_dual_audit(*inst, run, mode, eps, 1e-9);
            for (const auto& c : audit.checks) {
                out.expect(c.passed, to_string(kind) + " seed " + std::to_string(seed) + ": " + c.name + " " + c.first_violation);
                if (c.name == "nice_eta_lower") nice_evals += c.evaluated;
                if (c.name == "post_start_bound") segment_evals += c.evaluated;
            }
            const auto* bound = audit.find("flow_bound");
            if (bound && bound->evaluated) worst_flow_gap[slot] = std::max(worst_flow_gap[slot], bound->worst);
        }
    }
    out.detail << "100 instances x {ft at speed 3, laps at speed 5/2}; " << segment_evals
               << " per-segment bound evaluations, " << nice_evals << " nice-segment evaluations; worst "
               << "flow minus bound: ft " << format_float(worst_flow_gap[0]) << ", laps "
               << format_float(worst_flow_gap[1]);
    return out;
}

// ---- 7 ---------------------------------------------------------------------

Outcome lower_bound_experiment(Corpus& corpus) {
    Outcome out;
    std::vector<double> ratios;
    for (int n : {10, 20, 40}) {
        auto scenario = gen_star_adversary(n, 1);
        const Instance* inst = corpus.keep(std::move(scenario.instance));
        PolicyConfig pc;
        pc.kind = PolicyKind::ft;
        pc.epsilon = Rational(1, 2);
        pc.speed = 1;
        pc.enforce_no_surprises = false;
        const auto run = simulate(*inst, pc);
        corpus.add_run("star n=" + std::to_string(n), inst, pc, run);
        const double ratio = to_double(objective(run.trace, *inst, ObjectiveKind::flow)) / to_double(scenario.opt_flow);
        out.detail << (ratios.empty() ? "" : ", ") << "n=" << n << " ratio " << format_float(ratio);
        ratios.push_back(ratio);
    }
    out.expect(ratios[0] < ratios[1] && ratios[1] < ratios[2], "ratio not strictly increasing in n");
    out.expect(ratios[2] / ratios[0] >= 2, "ratio(40)/ratio(10) below 2");
    out.detail << "; ratio(40)/ratio(10) = " << format_float(ratios[2] / ratios[0]);
    return out;
}

// ---- 2 ---------------------------------------------------------------------

Outcome saturation_property(const Corpus& corpus) {
    Outcome out;
    std::size_t undersubscribed = 0;
    for (const auto& [g, sol] : corpus.solutions) {
        Rational total = 0;
        for (const auto& l : sol.L) total += l;
        if (total >= g.machines) continue;
        ++undersubscribed;
        for (const auto& l : sol.L) out.expect(l == 1, "machine budget slack while a minimal job runs below rate 1");
    }
    out.detail << corpus.solutions.size() << " solver outputs, " << undersubscribed
               << " with spare capacity, all of those at rate 1 everywhere";
    return out;
}

// ---- 8 ---------------------------------------------------------------------

// Pieces of one job never overlap in time and sum to its rate.
bool slots_well_formed(const std::vector<std::pair<JobId, Rational>>& rates, int machines) {
    const auto slots = realize_slots(rates, machines);
    if (static_cast<int>(slots.size()) > machines) return false;
    std::map<JobId, std::vector<SlotPiece>> by_job;
    for (const auto& machine : slots) {
        for (const auto& p : machine) {
            if (p.start < 0 || p.end > 1 || p.start >= p.end) return false;
            by_job[p.job].push_back(p);
        }
    }
    for (const auto& [job, rate] : rates) {
        const auto& pieces = by_job[job];
        Rational total = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            total += pieces[i].end - pieces[i].start;
            for (std::size_t k = i + 1; k < pieces.size(); ++k) {
                if (pieces[i].start < pieces[k].end && pieces[k].start < pieces[i].end) return false;
            }
        }
        if (total != rate) return false;
    }
    return true;
}

// Decisions up to and including the first one whose segment ends with a completion.
std::size_t observable_prefix(const SimulationResult& r) {
    std::set<Rational> completion_times;
    for (const auto& [id, t] : r.trace.completions) completion_times.insert(t);
    std::size_t k = 0;
    for (const auto& seg : r.trace.segments) {
        if (seg.rates.empty()) continue;
        ++k;
        if (completion_times.count(seg.end)) break;
    }
    return k;
}

Outcome engine_validity(const Corpus& corpus) {
    Outcome out;
    std::size_t segments = 0, clairvoyance_runs = 0;
    for (const auto& run : corpus.runs) {
        const auto report = validate_trace(*run.instance, run.result.trace);
        std::string why;
        for (const auto& c : report.checks) {
            if (!c.passed) why = c.name + ": " + c.first_violation;
        }
        out.expect(report.ok(), run.label + " " + why);
        for (const auto& seg : run.result.trace.segments) {
            ++segments;
            out.expect(slots_well_formed(seg.rates, run.instance->machines), run.label + ": slot packing overlaps");
        }
        if (run.instance->jobs.size() > 100) continue;

        auto doubled = *run.instance;
        for (auto& j : doubled.jobs) j.size *= 2;
        auto pc = run.config;
        pc.record_history = false;
        const auto other = simulate(doubled, pc);
        const std::size_t k = observable_prefix(run.result);
        bool same = other.decisions.size() >= k;
        for (std::size_t i = 0; same && i < k; ++i) same = other.decisions[i] == run.result.decisions[i];
        out.expect(same, run.label + ": decisions differ before any completion is observable");
        ++clairvoyance_runs;
    }
    out.detail << corpus.runs.size() << " traces valid, " << segments << " segments packed without overlap, "
               << clairvoyance_runs << " size-doubling replays with identical decision prefixes";
    return out;
}

void print(int number, const std::string& title, const Outcome& o, double seconds, double budget) {
    const bool in_time = seconds <= budget;
    std::cout << "criterion " << number << " [" << title << "]: " << (o.passed && in_time ? "PASS" : "FAIL") << "  ("
              << o.detail.str() << "; " << format_float(seconds) << " s of " << budget << " s)\n";
    if (!in_time) std::cout << "    over the time budget\n";
    for (const auto& f : o.failures) std::cout << "    " << f << "\n";
}

double since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main() {
    Corpus corpus;
    bool all = true;
    auto report = [&](int n, const std::string& title, const Outcome& o, double seconds, double budget) {
        print(n, title, o, seconds, budget);
        all = all && o.passed && seconds <= budget;
    };

    auto t = std::chrono::steady_clock::now();
    const auto c1 = solver_optimality(corpus);
    const double t1 = since(t);

    t = std::chrono::steady_clock::now();
    const auto c3 = worked_examples();
    const double t3 = since(t);

    t = std::chrono::steady_clock::now();
    Outcome c4, c5;
    const auto st = ct_corpus(corpus, c4, c5);
    const double t4 = since(t);
    c4.detail << st.instances << " instances; worst cost(B)/LB " << format_float(st.worst_ratio)
              << ", min chain slack " << format_float(st.min_chain_slack) << "; " << st.exhaustive
              << " exhaustive optima, worst cost(B)/opt " << format_float(st.worst_ratio_vs_opt);
    c5.detail << st.feasible << "/" << st.instances << " certificates feasible, worst constraint slack "
              << format_float(st.worst_dual_slack);

    t = std::chrono::steady_clock::now();
    const auto c6 = flow_bounds(corpus);
    const double t6 = since(t);

    t = std::chrono::steady_clock::now();
    const auto c7 = lower_bound_experiment(corpus);
    const double t7 = since(t);

    t = std::chrono::steady_clock::now();
    const auto c2 = saturation_property(corpus);
    const double t2 = since(t);

    t = std::chrono::steady_clock::now();
    const auto c8 = engine_validity(corpus);
    const double t8 = since(t);

    report(1, "solver optimality", c1, t1, 30);
    report(2, "spare capacity implies full rates", c2, t2, 10);
    report(3, "worked examples", c3, t3, 10);
    report(4, "completion-time competitiveness", c4, t4, 120);
    report(5, "completion-time dual feasibility", c5, t4, 120);
    report(6, "flow-time bounds", c6, t6, 180);
    report(7, "lower-bound experiment", c7, t7, 60);
    report(8, "engine validity", c8, t8, 180);
    std::cout << (all ? "all criteria pass" : "some criteria fail") << "\n";
    return all ? 0 : 1;
}
