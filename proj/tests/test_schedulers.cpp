#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fairdag/trace_tools.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace fairdag;

namespace {

JobSpec job(JobId id, Rational size, Rational weight = 1, Rational release = 0) {
    return {id, size, weight, release};
}

PolicyConfig ct() { return PolicyConfig{}; }

PolicyConfig flow(PolicyKind kind, Rational eps, OrderMode mode = OrderMode::fixed_topological) {
    PolicyConfig c;
    c.kind = kind;
    c.epsilon = eps;
    c.order_mode = mode;
    return c;
}

// Fluid processor sharing for independent jobs: each waiting job runs at
// min(1, λ w_j) with λ chosen so the rates fill m, all in doubles.
std::map<JobId, double> fluid_completions(const Instance& inst, double speed) {
    std::map<JobId, double> left, done;
    std::map<JobId, double> weight, release;
    for (const auto& j : inst.jobs) {
        left[j.id] = to_double(j.size);
        weight[j.id] = to_double(j.weight);
        release[j.id] = to_double(j.release);
    }
    double t = 0;
    const double m = inst.machines;
    while (done.size() < inst.jobs.size()) {
        std::vector<JobId> waiting;
        double next_release = INFINITY;
        for (const auto& [id, r] : release) {
            if (done.count(id)) continue;
            if (r <= t + 1e-12) {
                waiting.push_back(id);
            } else {
                next_release = std::min(next_release, r);
            }
        }
        if (waiting.empty()) {
            t = next_release;
            continue;
        }
        std::map<JobId, double> rate;
        if (static_cast<double>(waiting.size()) <= m) {
            for (JobId id : waiting) rate[id] = 1;
        } else {
            double lo = 0, hi = 1e9;
            for (int it = 0; it < 200; ++it) {
                double mid = (lo + hi) / 2, sum = 0;
                for (JobId id : waiting) sum += std::min(1.0, mid * weight[id]);
                (sum > m ? hi : lo) = mid;
            }
            for (JobId id : waiting) rate[id] = std::min(1.0, lo * weight[id]);
        }
        double dt = next_release - t;
        for (JobId id : waiting) dt = std::min(dt, left[id] / (speed * rate[id]));
        for (JobId id : waiting) {
            left[id] -= speed * rate[id] * dt;
            if (left[id] <= 1e-9) done[id] = t + dt;
        }
        t += dt;
    }
    return done;
}

}  // namespace

TEST_CASE("simulate examples") {
    Instance single;
    single.jobs = {job(0, 1)};
    auto r = simulate(single, ct());
    CHECK(r.trace.completions.at(0) == Rational(1, 2));

    Instance chain;
    chain.jobs = {job(0, 1), job(1, 1)};
    chain.dag.edges = {{0, 1}};
    r = simulate(chain, ct());
    CHECK(r.trace.completions.at(0) == Rational(1, 2));
    CHECK(r.trace.completions.at(1) == 1);
    CHECK(objective(r.trace, chain, ObjectiveKind::completion) == Rational(3, 2));

    Instance pair;
    pair.jobs = {job(0, 1), job(1, 1)};
    r = simulate(pair, ct());
    REQUIRE(r.trace.segments.size() == 1);
    CHECK(r.trace.segments[0].rates[0].second == Rational(1, 2));
    CHECK(r.trace.segments[0].rates[1].second == Rational(1, 2));
    CHECK(r.trace.completions.at(0) == 1);
    CHECK(r.trace.completions.at(1) == 1);
}

TEST_CASE("star adversary with two unit jobs: leaves finish with their pivot") {
    auto sc = gen_star_adversary(2, 3);
    auto pc = flow(PolicyKind::ft, Rational(1, 2));
    CHECK_THROWS_AS(simulate(sc.instance, pc), IncompatiblePolicy);
    pc.enforce_no_surprises = false;
    auto r = simulate(sc.instance, pc);
    CHECK(validate_trace(sc.instance, r.trace).ok());
    const Rational pivot_done = r.trace.completions.at(sc.pivot);
    for (const auto& j : sc.instance.jobs) {
        if (j.id >= 2) CHECK(r.trace.completions.at(j.id) == std::max(pivot_done, Rational(1)));
    }
}

TEST_CASE("flow policies refuse instances with surprises") {
    Instance inst;
    inst.jobs = {job(0, 1, 1, 0), job(1, 1, 1, 1)};
    inst.dag.edges = {{0, 1}};
    CHECK_THROWS_AS(simulate(inst, flow(PolicyKind::ft, Rational(1, 2))), IncompatiblePolicy);
    CHECK_THROWS_AS(simulate(inst, flow(PolicyKind::laps, Rational(1, 2))), IncompatiblePolicy);
    CHECK_NOTHROW(simulate(inst, ct()));
    PolicyConfig missing;
    missing.kind = PolicyKind::ft;
    CHECK_THROWS_AS(simulate(inst, missing), std::invalid_argument);
    CHECK(flow(PolicyKind::ft, Rational(1, 2)).effective_speed() == 3);
    CHECK(flow(PolicyKind::laps, Rational(1, 2)).effective_speed() == Rational(5, 2));
}

TEST_CASE("laps weights examples") {
    Instance inst;
    inst.jobs = {job(0, 1, 2), job(1, 1, 1), job(2, 1, 1)};
    inst.no_surprises = true;
    DagStructure dag(inst);

    auto one = laps_weights({1}, dag, Rational(1, 2), OrderMode::fixed_topological);
    CHECK(one.hatw == std::vector<Rational>{1});

    auto two = laps_weights({1, 2}, dag, Rational(1, 2), OrderMode::fixed_topological);
    CHECK(two.order == std::vector<JobId>{1, 2});
    CHECK(two.hatw == std::vector<Rational>{Rational(1, 4), Rational(3, 4)});

    auto heavy = laps_weights({0, 1}, dag, Rational(1, 2), OrderMode::fixed_topological);
    CHECK(heavy.hatw == std::vector<Rational>{Rational(4, 9), Rational(5, 9)});
    CHECK(heavy.exact);
}

TEST_CASE("laps weights sum to one and obey the sandwich, exact and float") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto inst = testing::random_instance(seed, 10, true);
        DagStructure dag(inst);
        std::vector<JobId> all;
        for (const auto& j : inst.jobs) all.push_back(j.id);
        for (Rational eps : {Rational(1, 3), Rational(2, 5)}) {
            for (auto mode : {OrderMode::fixed_topological, OrderMode::dynamic_completion}) {
                auto lw = laps_weights(all, dag, eps, mode);
                CHECK(lw.exact == (eps == Rational(1, 3)));
                Rational sum = 0;
                for (const auto& h : lw.hatw) sum += h;
                CHECK(sum == 1);
                const double k = 1 / to_double(eps);
                double W = 0;
                for (JobId id : lw.order) W += to_double(dag.weight(dag.index_of(id)));
                double before = 0;
                for (std::size_t i = 0; i < lw.order.size(); ++i) {
                    const double w = to_double(dag.weight(dag.index_of(lw.order[i])));
                    const double h = to_double(lw.hatw[i]);
                    CHECK(k * w * std::pow(before, k - 1) / std::pow(W, k) <= h + 1e-12);
                    CHECK(h <= k * w * std::pow(before + w, k - 1) / std::pow(W, k) + 1e-12);
                    before += w;
                }
                // Every job appears after its waiting predecessors.
                std::map<JobId, std::size_t> pos;
                for (std::size_t i = 0; i < lw.order.size(); ++i) pos[lw.order[i]] = i;
                for (const auto& [a, b] : inst.dag.edges) CHECK(pos[a] < pos[b]);
            }
        }
    }
}

TEST_CASE("slow_down examples") {
    Instance chain;
    chain.jobs = {job(0, 1), job(1, 1)};
    chain.dag.edges = {{0, 1}};
    auto a = simulate(chain, ct()).trace;
    auto b = slow_down(a, 2);
    CHECK(b.completions.at(0) == 1);
    CHECK(b.completions.at(1) == 2);
    CHECK(b.speed == 1);
    CHECK(validate_trace(chain, b).ok());
    auto same = slow_down(a, 1);
    CHECK(same.completions == a.completions);
    CHECK(objective(b, chain, ObjectiveKind::completion) == 2 * objective(a, chain, ObjectiveKind::completion));
    CHECK_THROWS_AS(slow_down(a, Rational(1, 2)), std::invalid_argument);
}

TEST_CASE("realize_slots examples") {
    auto slots = realize_slots({{1, Rational(3, 5)}, {2, Rational(3, 5)}, {3, Rational(4, 5)}}, 2);
    REQUIRE(slots.size() == 2);
    REQUIRE(slots[0].size() == 2);
    REQUIRE(slots[1].size() == 2);
    CHECK(slots[0][0].job == 1);
    CHECK(slots[0][0].end == Rational(3, 5));
    CHECK(slots[0][1].job == 2);
    CHECK(slots[0][1].start == Rational(3, 5));
    CHECK(slots[0][1].end == 1);
    CHECK(slots[1][0].job == 2);
    CHECK(slots[1][0].end == Rational(1, 5));
    CHECK(slots[1][1].job == 3);
    CHECK(slots[1][1].start == Rational(1, 5));
    CHECK(slots_disjoint(slots));

    auto full = realize_slots({{0, 1}, {1, 1}}, 2);
    CHECK(full[0].size() == 1);
    CHECK(full[1].size() == 1);
    auto third = realize_slots({{0, Rational(1, 3)}}, 1);
    CHECK(third[0][0].end - third[0][0].start == Rational(1, 3));

    CHECK_THROWS_AS(realize_slots({{0, Rational(3, 2)}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(realize_slots({{0, 1}, {1, 1}, {2, Rational(1, 2)}}, 2), std::invalid_argument);
}

TEST_CASE("objective examples") {
    Instance inst;
    inst.jobs = {job(0, 1), job(1, 1)};
    ScheduleTrace t;
    t.completions = {{0, 1}, {1, 2}};
    CHECK(objective(t, inst, ObjectiveKind::completion) == 3);
    CHECK(objective(t, inst, ObjectiveKind::flow) == 3);
    inst.jobs[1].release = 1;
    CHECK(objective(t, inst, ObjectiveKind::flow) == 2);
    t.completions.erase(1);
    CHECK_THROWS_AS(objective(t, inst, ObjectiveKind::flow), std::invalid_argument);
}

TEST_CASE("validate_trace flags injected faults") {
    Instance chain;
    chain.jobs = {job(0, 1), job(1, 1), job(2, 1)};
    chain.dag.edges = {{0, 1}};
    chain.machines = 1;
    auto good = simulate(chain, ct()).trace;
    REQUIRE(validate_trace(chain, good).ok());

    auto early = good;
    early.segments.front().rates.emplace_back(1, Rational(1, 2));
    auto report = validate_trace(chain, early);
    auto* prec = report.find("precedence");
    REQUIRE(prec);
    CHECK(!prec->passed);
    CHECK(prec->first_violation.find("job 1") != std::string::npos);
    CHECK(prec->first_violation.find("job 0") != std::string::npos);

    auto over = good;
    over.segments.front().rates = {{0, 1}, {2, Rational(1, 2)}};
    report = validate_trace(chain, over);
    CHECK(!report.find("capacity")->passed);
    CHECK(report.find("capacity")->first_violation.find("capacity violation") != std::string::npos);
    CHECK(!report.find("volume")->passed);

    auto gap = good;
    gap.segments.front().end += Rational(1, 8);
    CHECK(!validate_trace(chain, gap).find("segment_tiling")->passed);

    auto incomplete = good;
    incomplete.completions.erase(2);
    CHECK(!validate_trace(chain, incomplete).ok());
}

TEST_CASE("engine properties on random instances") {
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        auto inst = testing::random_instance(seed, 12, seed % 2 == 0);
        std::vector<PolicyConfig> policies{ct()};
        if (inst.no_surprises) {
            policies.push_back(flow(PolicyKind::ft, Rational(1, 2)));
            policies.push_back(flow(PolicyKind::laps, Rational(1, 2)));
            policies.push_back(flow(PolicyKind::laps, Rational(2, 5), OrderMode::dynamic_completion));
        }
        for (auto pc : policies) {
            auto r = simulate(inst, pc);
            auto report = validate_trace(inst, r.trace);
            CHECK_MESSAGE(report.ok(), report.to_json());
            for (const auto& seg : r.trace.segments) {
                if (seg.rates.empty()) continue;
                Rational sum = 0;
                bool below = false;
                for (const auto& [id, rate] : seg.rates) {
                    sum += rate;
                    below = below || rate < 1;
                    CHECK(rate > 0);
                }
                if (below) CHECK(sum == inst.machines);
            }
            auto again = simulate(inst, pc);
            CHECK(again.decisions == r.decisions);
            CHECK(again.trace.completions == r.trace.completions);
        }
    }
}

TEST_CASE("non-clairvoyance: size changes do not alter decisions before they are observable") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto inst = testing::random_instance(seed, 10);
        auto doubled = inst;
        for (auto& j : doubled.jobs) j.size *= 2;
        auto a = simulate(inst, ct());
        auto b = simulate(doubled, ct());
        std::size_t common = 0;
        while (common < a.decisions.size() && common < b.decisions.size() &&
               a.decisions[common].waiting == b.decisions[common].waiting) {
            CHECK(a.decisions[common].rates == b.decisions[common].rates);
            ++common;
        }
        CHECK(common >= 1);

        // Doubling releases as well is a pure time dilation.
        for (auto& j : doubled.jobs) j.release *= 2;
        auto c = simulate(doubled, ct());
        CHECK(c.decisions == a.decisions);
        for (const auto& [id, t] : a.trace.completions) CHECK(c.trace.completions.at(id) == 2 * t);
    }
}

TEST_CASE("independent jobs match a fluid processor-sharing oracle") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto inst = testing::random_instance(seed, 9);
        inst.dag.edges.clear();
        inst.no_surprises = true;
        auto r = simulate(inst, ct());
        auto expected = fluid_completions(inst, 2.0);
        for (const auto& [id, c] : expected) CHECK(to_double(r.trace.completions.at(id)) == doctest::Approx(c).epsilon(1e-7));
    }
}

TEST_CASE("history is parallel to segments when recorded") {
    auto inst = testing::random_instance(5, 10, true);
    auto pc = flow(PolicyKind::laps, Rational(1, 2));
    pc.record_history = true;
    auto r = simulate(inst, pc);
    REQUIRE(r.history.size() == r.trace.segments.size());
    for (std::size_t s = 0; s < r.history.size(); ++s) {
        CHECK(r.history[s].has_value() == !r.trace.segments[s].rates.empty());
        if (r.history[s]) CHECK(r.history[s]->laps.has_value());
    }
}
