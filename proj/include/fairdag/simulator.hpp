#pragma once

#include "fairdag/rate_solver.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fairdag {

enum class PolicyKind { ct, ft, laps };
enum class OrderMode { fixed_topological, dynamic_completion };

std::string to_string(PolicyKind kind);
std::string to_string(OrderMode mode);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::ct;
    std::optional<Rational> epsilon;  // required for ft and laps
    std::optional<Rational> speed;    // overrides the policy default
    OrderMode order_mode = OrderMode::fixed_topological;
    bool enforce_no_surprises = true;
    bool record_history = false;

    /// 2 for ct, 2(1+ε) for ft, 1+3ε for laps.
    Rational default_speed() const;
    Rational effective_speed() const { return speed ? *speed : default_speed(); }
    /// Throws std::invalid_argument on a missing or non-positive ε or speed.
    void validate() const;
};

/// Raised when a policy cannot run on an instance (flow policies need the
/// one-release-per-component property).
class IncompatiblePolicy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordering of the waiting jobs and the derived priority weights.
/// `hatw` is parallel to `order`.
struct LapsWeights {
    std::vector<JobId> order;
    std::vector<Rational> hatw;
    bool exact = true;  // false when 1/ε is not an integer and floats were used
};

/// Components ordered by (release, smallest id); within a component the
/// waiting jobs follow the static smallest-id topological order
/// (fixed_topological) or that order recomputed on the waiting sub-DAG
/// (dynamic_completion).
std::vector<JobId> laps_order(const std::vector<JobId>& waiting, const DagStructure& dag, OrderMode mode);

/// ŵ_j = (W(≤j)^k − W(<j)^k) / W^k with k = 1/ε, W the waiting weight.
LapsWeights laps_weights(const std::vector<JobId>& waiting, const DagStructure& dag, const Rational& epsilon,
                         OrderMode mode);

struct Segment {
    Rational start;
    Rational end;
    std::vector<std::pair<JobId, Rational>> rates;  // minimal jobs, sorted by id
};

struct ScheduleTrace {
    std::vector<Segment> segments;
    Rational speed = 1;
    int machines = 1;
    std::map<JobId, Rational> completions;
    std::map<JobId, Rational> start_times;

    Rational makespan() const;
};

/// Everything the policy computed for one segment.
struct RateSnapshot {
    BipartiteRateGraph graph;
    std::vector<Rational> weights;  // policy weights, parallel to graph.right
    RateSolution solution;
    std::optional<LapsWeights> laps;
};

/// One rate decision as seen from outside: the waiting set and the rates.
struct Decision {
    std::vector<JobId> waiting;
    std::vector<std::pair<JobId, Rational>> rates;

    bool operator==(const Decision&) const = default;
};

struct SimulationResult {
    ScheduleTrace trace;
    /// Parallel to trace.segments when history is recorded; empty entries
    /// mark idle segments.
    std::vector<std::optional<RateSnapshot>> history;
    std::vector<Decision> decisions;
};

/// Rate policy. Constructed from the precedence structure only, so it has no
/// path to job sizes.
class RatePolicy {
public:
    RatePolicy(const DagStructure& dag, PolicyConfig config);

    RateSnapshot decide(const std::vector<JobId>& waiting) const;

private:
    const DagStructure& dag_;
    PolicyConfig config_;
};

/// Holds the residual processing volumes. Answers only whether a job is
/// done and how long it runs at a rate before finishing.
class WorkOracle {
public:
    explicit WorkOracle(const Instance& inst, const DagStructure& dag);

    bool finished(std::size_t index) const { return residual_[index] == 0; }
    Rational time_to_finish(std::size_t index, const Rational& volume_rate) const {
        return residual_[index] / volume_rate;
    }
    void process(std::size_t index, const Rational& volume);

private:
    std::vector<Rational> residual_;
};

SimulationResult simulate(const Instance& inst, const PolicyConfig& policy);

}  // namespace fairdag
