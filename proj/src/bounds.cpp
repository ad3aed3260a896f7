#include "fairdag/bounds.hpp"

#include "json.hpp"

#include <bit>
#include <cmath>
#include <functional>

namespace fairdag {

Rational chain_lb(const Instance& inst) {
    const auto chains = compute_chains(inst);
    Rational total = 0;
    for (const auto& j : inst.jobs) total += j.weight * chains.at(j.id);
    return total;
}

Rational release_lb(const Instance& inst, ObjectiveKind kind) {
    Rational total = 0;
    if (kind == ObjectiveKind::flow) return total;
    for (const auto& j : inst.jobs) total += j.weight * j.release;
    return total;
}

std::optional<Rational> exhaustive_opt(const Instance& inst, ObjectiveKind kind, std::size_t job_limit) {
    if (inst.jobs.size() > job_limit || inst.jobs.size() > 16) return std::nullopt;
    const DagStructure dag(inst);
    const std::size_t n = dag.size();
    std::vector<int> size(n), release(n);
    std::vector<Rational> weight(n);
    double states = 1;
    int horizon = 0;
    for (const auto& j : inst.jobs) {
        if (!is_integer(j.size) || !is_integer(j.release)) return std::nullopt;
        if (j.size > 64 || j.release > 64) return std::nullopt;
        const auto i = dag.index_of(j.id);
        size[i] = static_cast<int>(j.size.get_num().get_si());
        release[i] = static_cast<int>(j.release.get_num().get_si());
        weight[i] = j.weight;
        states *= size[i] + 1;
        horizon = std::max(horizon, release[i]);
    }
    if (states * (horizon + 1) > 2e6) return std::nullopt;

    using Key = std::pair<int, std::vector<int>>;
    std::map<Key, Rational> memo;
    const auto& topo = dag.topological_order();

    // Σ_t w(unfinished at t) over unit steps equals Σ w C.
    std::function<Rational(int, const std::vector<int>&)> best = [&](int t, const std::vector<int>& rem) -> Rational {
        const Key key{std::min(t, horizon), rem};
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::vector<bool> done(n, false);
        for (auto v : topo) {
            bool ready = release[v] <= t;
            for (auto u : dag.predecessors(v)) ready = ready && done[u];
            done[v] = ready && rem[v] == 0;
        }
        Rational unfinished = 0;
        std::vector<std::size_t> avail;
        for (std::size_t v = 0; v < n; ++v) {
            if (done[v]) continue;
            unfinished += weight[v];
            bool ready = release[v] <= t;
            for (auto u : dag.predecessors(v)) ready = ready && done[u];
            if (ready) avail.push_back(v);
        }
        Rational value = 0;
        if (unfinished != 0) {
            const std::size_t pick = std::min<std::size_t>(static_cast<std::size_t>(inst.machines), avail.size());
            std::optional<Rational> choice;
            for (unsigned mask = 0; mask < (1u << avail.size()); ++mask) {
                if (static_cast<std::size_t>(std::popcount(mask)) != pick) continue;
                auto next = rem;
                for (std::size_t b = 0; b < avail.size(); ++b) {
                    if (mask & (1u << b)) --next[avail[b]];
                }
                Rational v = best(t + 1, next);
                if (!choice || v < *choice) choice = v;
            }
            value = unfinished + *choice;
        }
        memo.emplace(key, value);
        return value;
    };
    Rational opt = best(0, size);
    if (kind == ObjectiveKind::flow) opt -= release_lb(inst, ObjectiveKind::completion);
    return opt;
}

namespace {

nlohmann::json rational_json(const Rational& r) {
    return {{"exact", to_fraction_string(r)}, {"value", format_float(to_double(r))}};
}

void maybe(nlohmann::json& j, const char* key, const std::optional<Rational>& r) {
    j[key] = r ? rational_json(*r) : nlohmann::json(nullptr);
}

}  // namespace

std::string BoundsReport::to_json() const {
    nlohmann::json j;
    j["chain_lb"] = rational_json(chain_lb);
    j["release_lb"] = rational_json(release_lb);
    maybe(j, "exhaustive_completion", exhaustive_completion);
    maybe(j, "exhaustive_flow", exhaustive_flow);
    j["exhaustive_restriction"] = "preemption at integer times";
    j["policies"] = nlohmann::json::array();
    for (const auto& p : policies) {
        nlohmann::json e;
        e["policy"] = p.policy;
        e["objective_kind"] = p.kind == ObjectiveKind::completion ? "completion" : "flow";
        e["objective"] = rational_json(p.objective);
        maybe(e, "dual_lower_bound", p.dual_objective);
        e["dual_feasible"] = p.dual_feasible;
        e["worst_dual_slack"] = format_float(p.worst_dual_slack);
        e["best_lower_bound"] = rational_json(p.best_lower_bound);
        e["ratio"] = format_float(p.ratio);
        e["ratio_vs_opt"] = p.ratio_vs_opt ? nlohmann::json(format_float(*p.ratio_vs_opt)) : nlohmann::json(nullptr);
        maybe(e, "theorem_constant", p.theorem_constant);
        j["policies"].push_back(e);
    }
    j["checks"] = nlohmann::json::parse(checks.to_json());
    j["ok"] = ok();
    return j.dump(1) + "\n";
}

BoundsReport competitive_report(const Instance& inst, const std::vector<PolicyRun>& runs, std::size_t job_limit) {
    if (runs.empty()) throw std::invalid_argument("competitive_report: no runs");
    BoundsReport report;
    report.chain_lb = chain_lb(inst);
    report.release_lb = release_lb(inst);
    report.exhaustive_completion = exhaustive_opt(inst, ObjectiveKind::completion, job_limit);
    report.exhaustive_flow = exhaustive_opt(inst, ObjectiveKind::flow, job_limit);

    CheckBuilder below_opt("lower_bounds_below_opt", 0);
    CheckBuilder doubling("slow_down_doubles_cost", 0);
    CheckBuilder chain("slow_down_cost_chain", 1e-9);
    CheckBuilder ratio_check("ratio_within_constant", 1e-9);
    CheckBuilder dual_ok("dual_certificate_feasible", 0);

    auto ratio_of = [](const Rational& cost, const Rational& lb) {
        return lb > 0 ? to_double(cost) / to_double(lb) : (cost > 0 ? INFINITY : 1.0);
    };
    auto against_opt = [&](PolicyBound& b, const std::optional<Rational>& opt) {
        if (!opt) return;
        b.ratio_vs_opt = ratio_of(b.objective, *opt);
        if (b.kind == ObjectiveKind::completion || inst.no_surprises) below_opt.le(report.chain_lb, *opt, b.policy + " chain");
        if (b.kind == ObjectiveKind::completion) below_opt.le(report.release_lb, *opt, b.policy + " release");
        if (b.dual_objective && b.dual_feasible) below_opt.le(*b.dual_objective, *opt, b.policy + " dual");
    };

    for (const auto& run : runs) {
        if (run.config.kind == PolicyKind::ct) {
            const auto cert = build_ct_duals(inst, run.result);
            const auto feas = check_ct_dual_feasibility(inst, cert);
            const bool feasible = feas.ok();
            dual_ok.require(feasible, "ct");
            const Rational d = dual_objective(cert);
            const Rational cost_a = objective(run.result.trace, inst, ObjectiveKind::completion);
            const Rational cost_b = objective(slow_down(run.result.trace, 2), inst, ObjectiveKind::completion);
            doubling.eq(cost_b, 2 * cost_a, "ct-b");
            chain.le(cost_b, 2 * (2 * d + report.chain_lb + 2 * report.release_lb), "ct-b");

            Rational lb = std::max(report.chain_lb, report.release_lb);
            if (feasible) lb = std::max(lb, d);
            for (const auto& [name, cost] : {std::pair{"ct-a", cost_a}, std::pair{"ct-b", cost_b}}) {
                PolicyBound b;
                b.policy = name;
                b.objective = cost;
                b.dual_objective = d;
                b.dual_feasible = feasible;
                b.worst_dual_slack = feas.find("dual_constraint")->worst;
                b.best_lower_bound = lb;
                b.ratio = ratio_of(cost, lb);
                b.theorem_constant = std::string(name) == "ct-b" ? 10 : 5;
                ratio_check.le(cost, *b.theorem_constant * lb, name);
                against_opt(b, report.exhaustive_completion);
                if (b.ratio_vs_opt) ratio_check.le(*b.ratio_vs_opt, to_double(*b.theorem_constant), std::string(name) + " vs opt");
                report.policies.push_back(b);
            }
        } else {
            const bool laps = run.config.kind == PolicyKind::laps;
            const Rational eps = *run.config.epsilon;
            const auto mode = laps ? DualMode::laps : DualMode::ft;
            const auto cert = build_flow_duals(inst, run.result, mode, eps);
            const auto audit = flow_dual_audit(inst, run.result, cert);
            const auto* relaxed = audit.find("relaxed_dual_constraint");
            PolicyBound b;
            b.policy = to_string(run.config.kind);
            b.kind = ObjectiveKind::flow;
            b.objective = objective(run.result.trace, inst, ObjectiveKind::flow);
            b.dual_feasible = relaxed && relaxed->passed;
            if (relaxed) b.worst_dual_slack = relaxed->worst;
            dual_ok.require(b.dual_feasible, b.policy);
            const Rational d = dual_objective(cert);
            // Scaling that turns the relaxed certificate into a feasible dual.
            b.dual_objective = laps ? Rational(to_double(d) * to_double(eps) / std::exp(1.0)) : Rational(d / 2);
            // A predecessor released earlier may finish before r_j, so chains bound flow only without surprises.
            b.best_lower_bound = inst.no_surprises ? report.chain_lb : Rational(0);
            if (b.dual_feasible) b.best_lower_bound = std::max(b.best_lower_bound, *b.dual_objective);
            if (report.exhaustive_flow) b.best_lower_bound = std::max(b.best_lower_bound, *report.exhaustive_flow);
            b.ratio = ratio_of(b.objective, b.best_lower_bound);
            against_opt(b, report.exhaustive_flow);
            report.policies.push_back(b);
        }
    }
    for (auto* c : {&below_opt, &doubling, &chain, &ratio_check, &dual_ok}) report.checks.checks.push_back(c->finish());
    return report;
}

}  // namespace fairdag
