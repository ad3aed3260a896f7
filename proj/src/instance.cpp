#include "fairdag/instance.hpp"

#include "json.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <set>

namespace fairdag {

Instance canonicalize(Instance inst) {
    std::sort(inst.jobs.begin(), inst.jobs.end(),
              [](const JobSpec& a, const JobSpec& b) { return a.id < b.id; });
    std::sort(inst.dag.edges.begin(), inst.dag.edges.end());
    for (auto& job : inst.jobs) {
        job.size.canonicalize();
        job.weight.canonicalize();
        job.release.canonicalize();
    }
    return inst;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::machines: return "machines";
        case ViolationKind::duplicate_job: return "duplicate job";
        case ViolationKind::negative_size: return "negative size";
        case ViolationKind::zero_size: return "zero size";
        case ViolationKind::nonpositive_weight: return "nonpositive weight";
        case ViolationKind::negative_release: return "negative release";
        case ViolationKind::unknown_job: return "unknown job";
        case ViolationKind::self_loop: return "self loop";
        case ViolationKind::duplicate_edge: return "duplicate edge";
        case ViolationKind::cycle: return "cycle";
        case ViolationKind::release_order: return "release order";
        case ViolationKind::component_release: return "component release";
    }
    return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_instance(const Instance& inst) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::string msg) {
        report.violations.push_back({kind, std::move(msg)});
    };

    if (inst.machines < 1) add(ViolationKind::machines, "machines must be >= 1");

    std::map<JobId, const JobSpec*> by_id;
    for (const auto& job : inst.jobs) {
        const auto label = "job " + std::to_string(job.id);
        if (!by_id.emplace(job.id, &job).second) add(ViolationKind::duplicate_job, label + " listed twice");
        if (job.size < 0) add(ViolationKind::negative_size, label + " has negative size");
        if (job.size == 0 && !inst.allow_zero_size) {
            add(ViolationKind::zero_size, label + " has zero size but allow_zero_size is false");
        }
        if (job.weight <= 0) add(ViolationKind::nonpositive_weight, label + " has non-positive weight");
        if (job.release < 0) add(ViolationKind::negative_release, label + " has negative release");
    }

    std::set<DagEdge> seen;
    std::map<JobId, std::vector<JobId>> succ;
    bool edges_resolved = true;
    for (const auto& [pred, next] : inst.dag.edges) {
        const auto label = "edge (" + std::to_string(pred) + "," + std::to_string(next) + ")";
        bool known = true;
        for (JobId endpoint : {pred, next}) {
            if (!by_id.count(endpoint)) {
                add(ViolationKind::unknown_job, label + " references unknown job " + std::to_string(endpoint));
                known = false;
            }
        }
        if (pred == next) {
            add(ViolationKind::self_loop, label + " is a self loop");
            known = false;
        }
        if (!seen.insert({pred, next}).second) {
            add(ViolationKind::duplicate_edge, label + " appears twice");
            continue;
        }
        if (!known) {
            edges_resolved = false;
            continue;
        }
        succ[pred].push_back(next);
        if (by_id[pred]->release > by_id[next]->release) {
            add(ViolationKind::release_order, label + " violates release order");
        }
    }

    // Cycle detection by Kahn's algorithm over the resolvable edges.
    std::map<JobId, int> indegree;
    for (const auto& [id, job] : by_id) indegree[id] = 0;
    for (const auto& [pred, nexts] : succ) {
        for (JobId n : nexts) ++indegree[n];
    }
    std::vector<JobId> ready;
    for (const auto& [id, d] : indegree) {
        if (d == 0) ready.push_back(id);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        JobId u = ready.back();
        ready.pop_back();
        ++visited;
        if (auto it = succ.find(u); it != succ.end()) {
            for (JobId v : it->second) {
                if (--indegree[v] == 0) ready.push_back(v);
            }
        }
    }
    if (visited != by_id.size()) add(ViolationKind::cycle, "precedence graph contains a cycle");

    if (inst.no_surprises && edges_resolved && report.ok()) {
        DagStructure dag(inst);
        std::vector<std::optional<Rational>> comp_release(dag.component_count());
        for (std::size_t i = 0; i < dag.size(); ++i) {
            auto& r = comp_release[dag.component(i)];
            if (!r) {
                r = dag.release(i);
            } else if (*r != dag.release(i)) {
                add(ViolationKind::component_release,
                    "component of job " + std::to_string(dag.id(i)) + " has more than one release date");
                r = dag.release(i);
            }
        }
    }
    return report;
}

DagStructure::DagStructure(const Instance& inst) : machines_(inst.machines) {
    std::vector<const JobSpec*> jobs;
    jobs.reserve(inst.jobs.size());
    for (const auto& job : inst.jobs) jobs.push_back(&job);
    std::sort(jobs.begin(), jobs.end(), [](auto* a, auto* b) { return a->id < b->id; });

    for (const auto* job : jobs) {
        index_.emplace(job->id, ids_.size());
        ids_.push_back(job->id);
        weight_.push_back(job->weight);
        release_.push_back(job->release);
    }
    succ_.resize(ids_.size());
    pred_.resize(ids_.size());
    for (const auto& [pred, next] : inst.dag.edges) {
        auto p = index_.find(pred);
        auto n = index_.find(next);
        if (p == index_.end() || n == index_.end()) {
            throw std::invalid_argument("edge references unknown job");
        }
        succ_[p->second].push_back(n->second);
        pred_[n->second].push_back(p->second);
    }
    for (auto& s : succ_) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    for (auto& p : pred_) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }

    std::vector<std::size_t> indegree(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) indegree[i] = pred_[i].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (indegree[i] == 0) ready.push(i);
    }
    while (!ready.empty()) {
        auto u = ready.top();
        ready.pop();
        topo_.push_back(u);
        for (auto v : succ_[u]) {
            if (--indegree[v] == 0) ready.push(v);
        }
    }

    // Union-find for weak components; index order equals id order, so the
    // smallest root index is the smallest id.
    std::vector<std::size_t> parent(ids_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t u = 0; u < ids_.size(); ++u) {
        for (auto v : succ_[u]) {
            auto a = find(u), b = find(v);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    component_.resize(ids_.size());
    std::vector<std::size_t> label(ids_.size(), SIZE_MAX);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        auto root = find(i);
        if (label[root] == SIZE_MAX) label[root] = component_count_++;
        component_[i] = label[root];
    }
}

std::size_t DagStructure::index_of(JobId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("unknown job id " + std::to_string(id));
    return it->second;
}

ChainTable compute_chains(const Instance& inst) {
    DagStructure dag(inst);
    if (!dag.acyclic()) throw std::invalid_argument("compute_chains: precedence graph contains a cycle");
    std::vector<Rational> size(dag.size());
    for (const auto& job : inst.jobs) size[dag.index_of(job.id)] = job.size;

    std::vector<Rational> chain(dag.size());
    for (auto u : dag.topological_order()) {
        Rational best = 0;
        for (auto p : dag.predecessors(u)) best = std::max(best, chain[p]);
        chain[u] = best + size[u];
    }
    ChainTable table;
    for (std::size_t i = 0; i < dag.size(); ++i) table.emplace(dag.id(i), chain[i]);
    return table;
}

Instance gen_random_dag(const GenParams& params, std::uint64_t seed) {
    if (params.jobs <= 0) throw std::invalid_argument("gen_random_dag: job count must be positive");
    if (!(params.density >= 0.0 && params.density <= 1.0)) {
        throw std::invalid_argument("gen_random_dag: density must lie in [0,1]");
    }
    if (params.layers <= 0) throw std::invalid_argument("gen_random_dag: layer count must be positive");
    if (params.machines < 1) throw std::invalid_argument("gen_random_dag: machines must be >= 1");
    if (params.size_min < 0 || params.size_max < params.size_min) {
        throw std::invalid_argument("gen_random_dag: bad size range");
    }
    if (params.size_min == 0 && !params.allow_zero_size) {
        throw std::invalid_argument("gen_random_dag: zero sizes require allow_zero_size");
    }
    if (params.weight_min < 1 || params.weight_max < params.weight_min) {
        throw std::invalid_argument("gen_random_dag: bad weight range");
    }

    std::mt19937_64 rng(seed);
    auto draw = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    Instance inst;
    inst.machines = params.machines;
    inst.allow_zero_size = params.allow_zero_size;
    inst.no_surprises = params.release_mode != ReleaseMode::monotone;

    const int n = params.jobs;
    const int layers = std::min(params.layers, n);
    std::vector<int> layer(n);
    for (int i = 0; i < n; ++i) {
        layer[i] = static_cast<int>(static_cast<long long>(i) * layers / n);
        inst.jobs.push_back({i, Rational(draw(params.size_min, params.size_max)),
                             Rational(draw(params.weight_min, params.weight_max)), Rational(0)});
    }
    std::bernoulli_distribution coin(params.density);
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (layer[u] < layer[v] && coin(rng)) inst.dag.edges.emplace_back(u, v);
        }
    }

    switch (params.release_mode) {
        case ReleaseMode::zero:
            break;
        case ReleaseMode::per_component: {
            DagStructure dag(inst);
            std::vector<int> comp_release(dag.component_count());
            for (auto& r : comp_release) r = draw(0, params.release_max);
            for (auto& job : inst.jobs) job.release = comp_release[dag.component(dag.index_of(job.id))];
            break;
        }
        case ReleaseMode::monotone: {
            DagStructure dag(inst);
            for (auto u : dag.topological_order()) {
                Rational base = 0;
                for (auto p : dag.predecessors(u)) base = std::max(base, inst.jobs[p].release);
                inst.jobs[u].release = base + draw(0, params.release_max);
            }
            break;
        }
    }
    return inst;
}

AdversarialScenario gen_star_adversary(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_star_adversary: n must be >= 2");
    std::mt19937_64 rng(seed);
    AdversarialScenario sc;
    sc.n = n;
    sc.pivot = std::uniform_int_distribution<JobId>(0, n - 1)(rng);

    auto& inst = sc.instance;
    inst.machines = 1;
    inst.allow_zero_size = true;
    inst.no_surprises = false;
    const JobId leaves = static_cast<JobId>(n) * n * n;
    inst.jobs.reserve(n + leaves);
    inst.dag.edges.reserve(leaves);
    for (JobId i = 0; i < n; ++i) inst.jobs.push_back({i, Rational(1), Rational(1), Rational(0)});
    for (JobId k = 0; k < leaves; ++k) {
        inst.jobs.push_back({n + k, Rational(0), Rational(1), Rational(1)});
        inst.dag.edges.emplace_back(sc.pivot, n + k);
    }
    sc.opt_flow = Rational(n) * (n + 1) / 2;
    return sc;
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where, "missing field '" + key + "'");
    return *it;
}

Rational require_rational(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) throw ParseError(where + "." + key, "expected a \"num/den\" string");
    try {
        return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(where + "." + key, e.what());
    }
}

}  // namespace

std::string serialize_instance(const Instance& raw) {
    const Instance inst = canonicalize(raw);
    json j;
    j["machines"] = inst.machines;
    j["no_surprises"] = inst.no_surprises;
    j["allow_zero_size"] = inst.allow_zero_size;
    json jobs = json::array();
    for (const auto& job : inst.jobs) {
        jobs.push_back({{"id", job.id},
                        {"size", to_fraction_string(job.size)},
                        {"weight", to_fraction_string(job.weight)},
                        {"release", to_fraction_string(job.release)}});
    }
    j["jobs"] = std::move(jobs);
    json edges = json::array();
    for (const auto& [a, b] : inst.dag.edges) edges.push_back({a, b});
    j["edges"] = std::move(edges);
    return j.dump(1) + "\n";
}

Instance parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("byte " + std::to_string(e.byte), e.what());
    }
    const std::string root = "$";
    Instance inst;
    const auto& machines = require(j, "machines", root);
    if (!machines.is_number_integer()) throw ParseError("$.machines", "expected an integer");
    inst.machines = machines.get<int>();
    const auto& ns = require(j, "no_surprises", root);
    if (!ns.is_boolean()) throw ParseError("$.no_surprises", "expected a boolean");
    inst.no_surprises = ns.get<bool>();
    const auto& az = require(j, "allow_zero_size", root);
    if (!az.is_boolean()) throw ParseError("$.allow_zero_size", "expected a boolean");
    inst.allow_zero_size = az.get<bool>();

    const auto& jobs = require(j, "jobs", root);
    if (!jobs.is_array()) throw ParseError("$.jobs", "expected an array");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto where = "$.jobs[" + std::to_string(i) + "]";
        const auto& entry = jobs[i];
        const auto& id = require(entry, "id", where);
        if (!id.is_number_integer()) throw ParseError(where + ".id", "expected an integer");
        inst.jobs.push_back({id.get<JobId>(), require_rational(entry, "size", where),
                             require_rational(entry, "weight", where), require_rational(entry, "release", where)});
    }
    const auto& edges = require(j, "edges", root);
    if (!edges.is_array()) throw ParseError("$.edges", "expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
            throw ParseError("$.edges[" + std::to_string(i) + "]", "expected [pred, succ] integer pair");
        }
        inst.dag.edges.emplace_back(e[0].get<JobId>(), e[1].get<JobId>());
    }
    return inst;
}

}  // namespace fairdag
