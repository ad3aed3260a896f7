#include "fairdag/bounds.hpp"
#include "fairdag/io.hpp"
#include "fairdag/kkt.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace fairdag;
using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 2, incompatible = 3, empty_input = 4, audit_failed = 5 };

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

fs::path default_out_dir() {
    const char* env = std::getenv("FAIRDAG_OUT");
    return env && *env ? fs::path(env) : fs::path(".");
}

json exact_json(const Rational& r) { return {{"exact", to_fraction_string(r)}, {"value", format_float(to_double(r))}}; }

Rational parse_positive(const std::string& text, const std::string& what) {
    Rational r;
    try {
        r = parse_rational(text);
    } catch (const std::exception&) {
        throw CliError(usage, what + " must be a rational number, got '" + text + "'");
    }
    if (r <= 0) throw CliError(usage, what + " must be positive");
    return r;
}

Instance load_instance(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw CliError(usage, e.what());
    }
    try {
        return parse_instance(text);
    } catch (const ParseError& e) {
        throw CliError(usage, path.string() + ": " + e.what());
    }
}

fs::path sidecar_path(const fs::path& instance) {
    auto p = instance;
    p += ".scenario.json";
    return p;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
    std::string kind = "random";
    GenParams params;
    std::string release_mode = "zero";
    int n = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_generate(const GenerateArgs& a) {
    if (!a.seed) throw CliError(usage, "--seed is required for generated instances");
    Instance inst;
    std::optional<AdversarialScenario> scenario;
    try {
        if (a.kind == "random") {
            GenParams p = a.params;
            if (a.release_mode == "zero") {
                p.release_mode = ReleaseMode::zero;
            } else if (a.release_mode == "per-component") {
                p.release_mode = ReleaseMode::per_component;
            } else if (a.release_mode == "monotone") {
                p.release_mode = ReleaseMode::monotone;
            } else {
                throw CliError(usage, "unknown --release-mode " + a.release_mode);
            }
            inst = gen_random_dag(p, *a.seed);
        } else if (a.kind == "star") {
            scenario = gen_star_adversary(a.n, *a.seed);
            inst = scenario->instance;
        } else {
            throw CliError(usage, "unknown --kind " + a.kind);
        }
    } catch (const std::invalid_argument& e) {
        throw CliError(usage, e.what());
    }
    const std::string text = serialize_instance(inst);
    write_file_atomic(a.out, text);
    if (scenario) {
        json side{{"kind", "star"},
                  {"n", scenario->n},
                  {"pivot", scenario->pivot},
                  {"seed", *a.seed},
                  {"opt_flow", exact_json(scenario->opt_flow)},
                  {"instance_hash", sha256_hex(text)}};
        write_file_atomic(sidecar_path(a.out), side.dump(1) + "\n");
    }
    std::cout << "sha256 " << sha256_hex(text) << "  " << a.out << "  jobs=" << inst.jobs.size() << "\n";
    return ok;
}

// ---- run -----------------------------------------------------------------

struct PolicyArgs {
    std::string policy = "ct";
    std::string epsilon;
    std::string speed;
    std::string order = "fixed-topological";
    bool allow_surprises = false;
};

PolicyConfig policy_from(const PolicyArgs& a) {
    PolicyConfig pc;
    if (a.policy == "ct") {
        pc.kind = PolicyKind::ct;
    } else if (a.policy == "ft") {
        pc.kind = PolicyKind::ft;
    } else if (a.policy == "laps") {
        pc.kind = PolicyKind::laps;
    } else {
        throw CliError(usage, "unknown --policy " + a.policy);
    }
    if (!a.epsilon.empty()) pc.epsilon = parse_positive(a.epsilon, "--epsilon");
    if (pc.kind != PolicyKind::ct && !pc.epsilon) throw CliError(usage, "--epsilon is required for " + a.policy);
    if (!a.speed.empty()) pc.speed = parse_positive(a.speed, "--speed");
    if (a.order == "fixed-topological") {
        pc.order_mode = OrderMode::fixed_topological;
    } else if (a.order == "dynamic-completion") {
        pc.order_mode = OrderMode::dynamic_completion;
    } else {
        throw CliError(usage, "unknown --order " + a.order);
    }
    pc.enforce_no_surprises = !a.allow_surprises;
    return pc;
}

json policy_json(const PolicyConfig& pc) {
    json j{{"kind", to_string(pc.kind)},
           {"speed", to_fraction_string(pc.effective_speed())},
           {"order", to_string(pc.order_mode)},
           {"allow_surprises", !pc.enforce_no_surprises}};
    j["epsilon"] = pc.epsilon ? json(to_fraction_string(*pc.epsilon)) : json(nullptr);
    return j;
}

PolicyConfig policy_from_json(const json& j) {
    PolicyArgs a;
    a.policy = j.at("kind").get<std::string>();
    if (!j.at("epsilon").is_null()) a.epsilon = j.at("epsilon").get<std::string>();
    a.speed = j.at("speed").get<std::string>();
    a.order = j.at("order").get<std::string>();
    a.allow_surprises = j.at("allow_surprises").get<bool>();
    return policy_from(a);
}

SimulationResult run_policy(const Instance& inst, const PolicyConfig& pc) {
    try {
        return simulate(inst, pc);
    } catch (const IncompatiblePolicy& e) {
        throw CliError(incompatible, e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(usage, e.what());
    }
}

int cmd_run(const std::string& instance_path, const PolicyArgs& pa, const std::string& out_arg) {
    const Instance inst = load_instance(instance_path);
    const PolicyConfig pc = policy_from(pa);
    const fs::path out = out_arg.empty() ? default_out_dir() : fs::path(out_arg);
    const auto result = run_policy(inst, pc);
    const auto report = validate_trace(inst, result.trace);

    write_file_atomic(out / "trace.csv", trace_csv(result.trace));
    write_file_atomic(out / "completions.csv", completions_csv(result.trace));

    json obj;
    obj["instance_file"] = fs::absolute(instance_path).lexically_normal().string();
    obj["instance_hash"] = instance_hash(inst);
    obj["policy"] = policy_json(pc);
    obj["trace_valid"] = report.ok();
    obj["segments"] = result.trace.segments.size();
    if (pc.kind == PolicyKind::ct) {
        obj["objective_kind"] = "completion";
        const Rational a = objective(result.trace, inst, ObjectiveKind::completion);
        const Rational b = objective(slow_down(result.trace, 2), inst, ObjectiveKind::completion);
        obj["objectives"] = {{"ct-a", exact_json(a)}, {"ct-b", exact_json(b)}};
    } else {
        obj["objective_kind"] = "flow";
        const Rational flow = objective(result.trace, inst, ObjectiveKind::flow);
        obj["objectives"] = {{to_string(pc.kind), exact_json(flow)}};
        if (fs::exists(sidecar_path(instance_path))) {
            const json side = json::parse(read_file(sidecar_path(instance_path)));
            const Rational opt = parse_rational(side.at("opt_flow").at("exact").get<std::string>());
            obj["adversary"] = {{"n", side.at("n")},
                                {"opt_flow", exact_json(opt)},
                                {"ratio", format_float(to_double(flow) / to_double(opt))}};
        }
    }
    write_file_atomic(out / "objective.json", obj.dump(1) + "\n");
    if (!report.ok()) {
        write_file_atomic(out / "trace_validation.json", report.to_json());
        std::cerr << "trace validation failed; see " << (out / "trace_validation.json").string() << "\n";
        return audit_failed;
    }
    std::cout << obj["objectives"].dump() << "\n";
    return ok;
}

// ---- audit ---------------------------------------------------------------

int cmd_audit(const std::string& instance_path, const std::string& run_dir, const std::vector<std::string>& which,
              const std::string& out_arg) {
    const Instance inst = load_instance(instance_path);
    const fs::path run(run_dir);
    json obj;
    try {
        obj = json::parse(read_file(run / "objective.json"));
    } catch (const std::exception& e) {
        throw CliError(usage, std::string("cannot load run: ") + e.what());
    }
    if (obj.at("instance_hash").get<std::string>() != instance_hash(inst)) {
        throw CliError(incompatible, "instance hash does not match the run; refusing to audit");
    }
    PolicyConfig pc = policy_from_json(obj.at("policy"));
    pc.record_history = true;
    const auto result = run_policy(inst, pc);
    if (trace_csv(result.trace) != read_file(run / "trace.csv")) {
        throw CliError(audit_failed, "replayed trace differs from " + (run / "trace.csv").string());
    }
    const fs::path out = out_arg.empty() ? run : fs::path(out_arg);

    bool all_ok = true;
    bool need_bounds = false;
    for (const auto& w : which) {
        AuditReport report;
        if (w == "kkt") {
            for (std::size_t s = 0; s < result.history.size(); ++s) {
                if (!result.history[s]) continue;
                const auto& snap = *result.history[s];
                for (auto& c : kkt_audit(snap.graph, snap.solution, snap.weights).checks) {
                    auto* existing = const_cast<AuditCheck*>(report.find(c.name));
                    if (!existing) {
                        report.checks.push_back(c);
                        continue;
                    }
                    existing->evaluated += c.evaluated;
                    existing->violations += c.violations;
                    if (!c.passed && existing->passed) existing->first_violation = c.first_violation;
                    existing->passed = existing->passed && c.passed;
                    if (c.evaluated && c.worst > existing->worst) {
                        existing->worst = c.worst;
                        existing->worst_exact = c.worst_exact;
                        existing->worst_at = c.worst_at;
                    }
                }
            }
        } else if (w == "ct-dual") {
            if (pc.kind != PolicyKind::ct) throw CliError(incompatible, "ct-dual needs a ct run");
            const auto cert = build_ct_duals(inst, result);
            report = check_ct_dual_feasibility(inst, cert);
            for (auto& c : ct_structure_audit(inst, result, cert).checks) report.checks.push_back(c);
            need_bounds = true;
        } else if (w == "ft-dual") {
            if (pc.kind == PolicyKind::ct) throw CliError(incompatible, "ft-dual needs an ft or laps run");
            report = flow_dual_audit(inst, result, pc.kind == PolicyKind::laps ? DualMode::laps : DualMode::ft,
                                     *pc.epsilon);
            need_bounds = true;
        } else if (w == "exhaustive") {
            need_bounds = true;
            continue;
        } else {
            throw CliError(usage, "unknown audit " + w);
        }
        write_file_atomic(out / ("audit_" + w + ".json"), report.to_json());
        std::cout << w << ": " << (report.ok() ? "pass" : "FAIL") << "\n";
        all_ok = all_ok && report.ok();
    }
    if (need_bounds) {
        const auto bounds = competitive_report(inst, {{pc, result}});
        json j = json::parse(bounds.to_json());
        j["instance"] = fs::path(instance_path).stem().string();
        write_file_atomic(out / "bounds.json", j.dump(1) + "\n");
        for (const auto& p : bounds.policies) {
            std::cout << p.policy << ": objective " << format_float(to_double(p.objective)) << ", ratio "
                      << format_float(p.ratio);
            if (p.ratio_vs_opt) std::cout << ", vs exhaustive opt " << format_float(*p.ratio_vs_opt);
            std::cout << "\n";
        }
        std::cout << "bounds: " << (bounds.ok() ? "pass" : "FAIL") << "\n";
        all_ok = all_ok && bounds.ok();
    }
    return all_ok ? ok : audit_failed;
}

// ---- report --------------------------------------------------------------

int cmd_report(const std::string& batch, const std::string& out_arg) {
    if (!fs::is_directory(batch)) throw CliError(usage, batch + " is not a directory");
    std::vector<fs::path> bounds_files, objective_files;
    for (const auto& entry : fs::recursive_directory_iterator(batch)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "bounds.json") bounds_files.push_back(entry.path());
        if (entry.path().filename() == "objective.json") objective_files.push_back(entry.path());
    }
    std::sort(bounds_files.begin(), bounds_files.end());
    std::sort(objective_files.begin(), objective_files.end());

    std::ostringstream table;
    table << "instance,policy,objective,chain_lb,release_lb,dual_lb,exhaustive_opt,ratio,ratio_vs_opt,"
             "theorem_constant,worst_dual_slack,pass\n";
    std::size_t rows = 0;
    for (const auto& path : bounds_files) {
        const json j = json::parse(read_file(path));
        const std::string instance = path.parent_path().lexically_relative(batch).string();
        for (const auto& p : j.at("policies")) {
            const bool completion = p.at("objective_kind") == "completion";
            const auto& opt = j.at(completion ? "exhaustive_completion" : "exhaustive_flow");
            auto value = [](const json& v) { return v.is_null() ? std::string() : v.at("value").get<std::string>(); };
            table << instance << "," << p.at("policy").get<std::string>() << "," << value(p.at("objective")) << ","
                  << value(j.at("chain_lb")) << "," << (completion ? value(j.at("release_lb")) : "0") << ","
                  << value(p.at("dual_lower_bound")) << "," << value(opt) << "," << p.at("ratio").get<std::string>()
                  << "," << (p.at("ratio_vs_opt").is_null() ? "" : p.at("ratio_vs_opt").get<std::string>()) << ","
                  << value(p.at("theorem_constant")) << "," << p.at("worst_dual_slack").get<std::string>() << ","
                  << (j.at("ok").get<bool>() ? "pass" : "fail") << "\n";
            ++rows;
        }
    }

    std::vector<std::pair<int, std::string>> curve;
    for (const auto& path : objective_files) {
        const json j = json::parse(read_file(path));
        if (j.contains("adversary")) curve.emplace_back(j["adversary"]["n"].get<int>(), j["adversary"]["ratio"]);
    }
    if (rows == 0 && curve.empty()) {
        std::cerr << "no bounds.json or adversary runs under " << batch << "\n";
        return empty_input;
    }
    const fs::path out = out_arg.empty() ? fs::path(batch) : fs::path(out_arg);
    if (rows) write_file_atomic(out / "summary.csv", table.str());
    if (!curve.empty()) {
        std::sort(curve.begin(), curve.end());
        std::ostringstream c;
        c << "n,ratio,increasing\n";
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const bool up = i == 0 || std::stod(curve[i].second) > std::stod(curve[i - 1].second);
            c << curve[i].first << "," << curve[i].second << "," << (up ? "yes" : "no") << "\n";
        }
        write_file_atomic(out / "adversary_curve.csv", c.str());
    }
    std::cout << rows << " rows, " << curve.size() << " adversary points\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair-rate scheduling of precedence-constrained jobs: generate, run, audit, report."};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "write a canonical instance file and print its hash");
    g->add_option("--kind", gen.kind, "random | star")->capture_default_str();
    g->add_option("--jobs", gen.params.jobs)->capture_default_str();
    g->add_option("--layers", gen.params.layers)->capture_default_str();
    g->add_option("--density", gen.params.density)->capture_default_str();
    g->add_option("--machines", gen.params.machines)->capture_default_str();
    g->add_option("--size-min", gen.params.size_min)->capture_default_str();
    g->add_option("--size-max", gen.params.size_max)->capture_default_str();
    g->add_option("--weight-min", gen.params.weight_min)->capture_default_str();
    g->add_option("--weight-max", gen.params.weight_max)->capture_default_str();
    g->add_option("--release-mode", gen.release_mode, "zero | per-component | monotone")->capture_default_str();
    g->add_option("--release-max", gen.params.release_max)->capture_default_str();
    g->add_flag("--allow-zero-size", gen.params.allow_zero_size);
    g->add_option("--n", gen.n, "star adversary size");
    g->add_option("--seed", gen.seed, "required");
    g->add_option("--out", gen.out)->required();

    std::string run_instance, run_out;
    PolicyArgs pa;
    auto* r = app.add_subcommand("run", "simulate a policy and write trace, completions, objective");
    r->add_option("--instance", run_instance)->required();
    r->add_option("--policy", pa.policy, "ct | ft | laps")->capture_default_str();
    r->add_option("--epsilon", pa.epsilon);
    r->add_option("--speed", pa.speed);
    r->add_option("--order", pa.order, "fixed-topological | dynamic-completion")->capture_default_str();
    r->add_flag("--allow-surprises", pa.allow_surprises, "run flow policies on instances with late releases");
    r->add_option("--out-dir", run_out, "default: $FAIRDAG_OUT or the working directory");

    std::string audit_instance, audit_run, audit_out;
    std::vector<std::string> which;
    auto* a = app.add_subcommand("audit", "replay a run and check the selected certificates");
    a->add_option("--instance", audit_instance)->required();
    a->add_option("--run", audit_run, "directory written by run")->required();
    a->add_option("--which", which, "kkt | ct-dual | ft-dual | exhaustive")->required()->delimiter(',');
    a->add_option("--out-dir", audit_out, "default: the run directory");

    std::string batch, report_out;
    auto* rep = app.add_subcommand("report", "aggregate bounds and adversary runs into CSV tables");
    rep->add_option("--batch", batch)->required();
    rep->add_option("--out-dir", report_out, "default: the batch directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (g->parsed()) return cmd_generate(gen);
        if (r->parsed()) return cmd_run(run_instance, pa, run_out);
        if (a->parsed()) return cmd_audit(audit_instance, audit_run, which, audit_out);
        if (rep->parsed()) return cmd_report(batch, report_out);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return usage;
}
