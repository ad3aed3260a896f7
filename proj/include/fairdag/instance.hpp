#pragma once

#include "fairdag/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairdag {

struct JobSpec {
    JobId id = 0;
    Rational size;     // processing volume
    Rational weight;   // strictly positive
    Rational release;  // non-negative

    bool operator==(const JobSpec&) const = default;
};

using DagEdge = std::pair<JobId, JobId>;  // (predecessor, successor)

struct PrecedenceDag {
    std::vector<DagEdge> edges;

    bool operator==(const PrecedenceDag&) const = default;
};

struct Instance {
    std::vector<JobSpec> jobs;
    PrecedenceDag dag;
    int machines = 1;
    bool no_surprises = false;
    bool allow_zero_size = false;

    bool operator==(const Instance&) const = default;
};

/// Sorts jobs by id and edges lexicographically.
Instance canonicalize(Instance inst);

enum class ViolationKind {
    machines,
    duplicate_job,
    negative_size,
    zero_size,
    nonpositive_weight,
    negative_release,
    unknown_job,
    self_loop,
    duplicate_edge,
    cycle,
    release_order,
    component_release,
};

std::string to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool has(ViolationKind kind) const;
};

ValidationReport validate_instance(const Instance& inst);

/// Index-based view of the precedence structure. Carries job ids, release
/// dates, and weights but never sizes; the rate policy only ever sees this.
class DagStructure {
public:
    explicit DagStructure(const Instance& inst);

    std::size_t size() const { return ids_.size(); }
    JobId id(std::size_t index) const { return ids_[index]; }
    std::size_t index_of(JobId id) const;
    bool contains(JobId id) const { return index_.count(id) != 0; }

    const std::vector<std::size_t>& successors(std::size_t index) const { return succ_[index]; }
    const std::vector<std::size_t>& predecessors(std::size_t index) const { return pred_[index]; }
    const Rational& weight(std::size_t index) const { return weight_[index]; }
    const Rational& release(std::size_t index) const { return release_[index]; }

    /// Kahn order, smallest id first among ready jobs. Empty if cyclic.
    const std::vector<std::size_t>& topological_order() const { return topo_; }
    bool acyclic() const { return topo_.size() == ids_.size(); }

    /// Weakly connected component of each job; components are numbered by
    /// their smallest job id.
    std::size_t component(std::size_t index) const { return component_[index]; }
    std::size_t component_count() const { return component_count_; }

    int machines() const { return machines_; }

private:
    std::vector<JobId> ids_;
    std::unordered_map<JobId, std::size_t> index_;
    std::vector<std::vector<std::size_t>> succ_;
    std::vector<std::vector<std::size_t>> pred_;
    std::vector<Rational> weight_;
    std::vector<Rational> release_;
    std::vector<std::size_t> topo_;
    std::vector<std::size_t> component_;
    std::size_t component_count_ = 0;
    int machines_ = 1;
};

/// chain_j: largest total size over precedence chains ending at j.
using ChainTable = std::map<JobId, Rational>;

/// Throws std::invalid_argument if the DAG has a cycle or dangling edge.
ChainTable compute_chains(const Instance& inst);

enum class ReleaseMode {
    zero,           // every job released at 0
    per_component,  // one release per weakly connected component
    monotone,       // successors released no earlier than predecessors
};

struct GenParams {
    int jobs = 10;
    int layers = 1;
    double density = 0.0;
    int size_min = 1;
    int size_max = 4;
    int weight_min = 1;
    int weight_max = 4;
    int machines = 1;
    ReleaseMode release_mode = ReleaseMode::zero;
    int release_max = 0;  // upper bound for drawn integer releases / increments
    bool allow_zero_size = false;
};

/// Layered random DAG; deterministic in (params, seed).
Instance gen_random_dag(const GenParams& params, std::uint64_t seed);

struct AdversarialScenario {
    Instance instance;
    JobId pivot = 0;
    int n = 0;
    /// Offline optimum of total flow time: pivot first on [0,1], stage-two
    /// jobs finish at time 1, the rest run back to back.
    Rational opt_flow;
};

/// n unit jobs at time 0 on one machine; n^3 zero-size jobs released at 1
/// that all depend on a seeded random pivot.
AdversarialScenario gen_star_adversary(int n, std::uint64_t seed);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

std::string serialize_instance(const Instance& inst);
Instance parse_instance(const std::string& text);

}  // namespace fairdag
