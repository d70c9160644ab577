#include <CLI11.hpp>

#include "callerkit/artifacts.hpp"
#include "callerkit/callgraph.hpp"
#include "callerkit/config.hpp"
#include "callerkit/ingest.hpp"
#include "callerkit/metrics.hpp"
#include "callerkit/prompt.hpp"
#include "callerkit/variants.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace callerkit;
using nlohmann::json;

namespace {

std::string dump_line(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

struct Pipeline {
    Workspace ws;
    CallGraph graph;
    std::string repo_id;
};

Pipeline analyze_repo(const std::string& repo_dir, const std::string& repo_id) {
    Pipeline p{Workspace(parse_repo_tree(repo_dir)), {}, repo_id};
    p.graph = build_call_graph(p.ws);
    return p;
}

std::string unqualified(const std::string& qname) { return qname.substr(qname.rfind('.') + 1); }

// ---- subcommand payloads ----------------------------------------------------

int cmd_ingest(const RunConfig& cfg, const std::string& manifest_path, const std::string& cache,
               const std::string& today, bool as_json) {
    Manifest manifest = load_manifest(manifest_path);
    RepoFilterConfig filter_cfg;
    filter_cfg.min_stars = cfg.stars_min;
    filter_cfg.recency_months = cfg.recency_months;
    filter_cfg.today = today;
    json report = json::array();
    for (const auto& entry : manifest.entries) {
        json item{{"url", entry.url}, {"split", entry.split}};
        try {
            RepoSnapshot snap = snapshot_repo(entry, cache);
            FilterDecision d = apply_repo_filters(snap, entry, filter_cfg);
            item["accepted"] = d.accept;
            item["content_hash"] = snap.content_hash;
            item["file_count"] = snap.file_count;
            item["root"] = snap.root;
            item["reasons"] = d.reasons;
            item["warnings"] = d.warnings;
        } catch (const Error& e) {
            item["accepted"] = false;
            item["reasons"] = json::array({e.what()});
        }
        report.push_back(item);
    }
    if (as_json) {
        std::cout << report.dump(2) << "\n";
    } else {
        for (const auto& item : report) {
            std::cout << (item["accepted"].get<bool>() ? "accept " : "reject ")
                      << item["url"].get<std::string>();
            for (const auto& r : item["reasons"]) std::cout << "  [" << r.get<std::string>() << "]";
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_extract(const RunConfig& cfg, const std::string& repo, const std::string& out_dir,
                const std::string& repo_id) {
    Pipeline p = analyze_repo(repo, repo_id.empty() ? repo : repo_id);
    fs::create_directories(out_dir);
    write_file(out_dir + "/edges.jsonl", provenance_line(cfg) + export_edges_jsonl(p.graph));
    write_file(out_dir + "/diagnostics.json", export_diagnostics_json(p.graph));
    json meta{{"repo_root", fs::absolute(repo).string()}, {"repo_id", p.repo_id}};
    write_file(out_dir + "/extract.json", meta.dump(2) + "\n");
    std::cout << "nodes " << p.graph.nodes.size() << ", edges " << p.graph.calls_edges.size()
              << ", unresolved " << p.graph.diags.unresolved_sites << ", external "
              << p.graph.diags.external_sites << "\n";
    return 0;
}

int cmd_corpus(const RunConfig& cfg, const std::string& graph_dir, const std::string& split,
               int n_train, bool two_hop, std::uint64_t seed, const std::string& out_path,
               const std::string& manifest_path, const std::string& other_manifest_path,
               bool require_docstring) {
    json meta = json::parse(read_file(graph_dir + "/extract.json"));
    std::string repo_root = meta["repo_root"].get<std::string>();
    std::string repo_id = meta["repo_id"].get<std::string>();

    if (!manifest_path.empty()) {
        Manifest m = load_manifest(manifest_path);
        auto urls = m.urls(split);
        if (std::find(urls.begin(), urls.end(), repo_id) == urls.end())
            throw SchemaError("manifest", repo_id + " is not in the " + split + " split");
        if (!other_manifest_path.empty()) {
            Manifest other = load_manifest(other_manifest_path);
            std::string other_split = split == "train" ? "bench" : "train";
            check_split_disjoint(split == "train" ? urls : other.urls("train"),
                                 split == "train" ? other.urls("bench") : urls);
        }
    }

    Pipeline p = analyze_repo(repo_root, repo_id);
    SelectionPolicy policy;
    policy.require_docstring = require_docstring;
    policy.assertion_density_threshold = cfg.assertion_density;
    RunConfig stamped = cfg;
    stamped.seed = seed;
    CorpusBuild build = build_corpus(p.graph, p.ws, policy, repo_id, n_train, two_hop, seed);
    std::vector<std::string> records;
    records.reserve(build.instances.size());
    for (const auto& inst : build.instances) records.push_back(instance_to_json(inst));
    write_jsonl(out_path, provenance_line(stamped), records);
    std::cout << "instances " << build.instances.size() << ", excluded targets "
              << build.excluded.size() << ", deduped " << build.deduped << "\n";
    return 0;
}

int cmd_stats(const std::string& corpus_path, bool as_json) {
    std::vector<TrainingInstance> instances;
    for (const auto& line : read_jsonl(corpus_path)) instances.push_back(instance_from_json(line));
    LengthStats stats = corpus_stats(instances);
    if (as_json) {
        auto col = [](const LengthColumn& c) {
            return json{{"mean", c.mean},
                        {"median", c.median},
                        {"p90", c.p90},
                        {"p95", c.p95},
                        {"p99", c.p99}};
        };
        std::cout << json{{"task", col(stats.task)},
                          {"target", col(stats.target)},
                          {"total", col(stats.total)}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << format_stats_table(stats);
    }
    return 0;
}

CallerVariant::Kind parse_variant_kind(const std::string& name) {
    if (name == "signature") return CallerVariant::SignatureOnly;
    if (name == "call-site") return CallerVariant::CallSiteOnly;
    if (name == "data-flow") return CallerVariant::DataFlow;
    if (name == "control-flow") return CallerVariant::ControlFlow;
    if (name == "length-matched") return CallerVariant::LengthMatchedIrrelevant;
    if (name == "semantics-preserving") return CallerVariant::SemanticsPreserving;
    if (name == "full") return CallerVariant::Full;
    throw DomainError("unknown variant kind: " + name);
}

int cmd_variants(const RunConfig& cfg, const std::string& corpus_path, const std::string& kind_name,
                 std::uint64_t seed, const std::string& out_path) {
    CallerVariant::Kind kind = parse_variant_kind(kind_name);
    std::vector<TrainingInstance> instances;
    for (const auto& line : read_jsonl(corpus_path)) instances.push_back(instance_from_json(line));

    auto names_for = [](const TrainingInstance& inst, std::size_t i) {
        std::vector<std::string> names{unqualified(inst.target_qname)};
        if (i < inst.caller_call_names.size())
            for (const auto& n : inst.caller_call_names[i]) names.push_back(n);
        return names;
    };

    // pool for the length-matched control: callers of other targets, indexed
    // once up front
    std::vector<LengthPoolEntry> pool;
    if (kind == CallerVariant::LengthMatchedIrrelevant) {
        std::vector<VariantSource> raw;
        for (const auto& inst : instances) {
            for (std::size_t i = 0; i < inst.caller_snippets.size(); ++i) {
                VariantSource s;
                s.caller_id = inst.id + "#c" + std::to_string(i);
                s.text = inst.caller_snippets[i];
                s.target_names = names_for(inst, i);
                raw.push_back(std::move(s));
            }
        }
        pool = build_length_pool(raw);
    }

    std::vector<std::string> records;
    std::size_t skipped = 0;
    for (const auto& inst : instances) {
        VariantSource src;
        src.caller_id = inst.id;
        src.text = inst.caller_snippets.empty() ? "" : inst.caller_snippets[0];
        src.target_names = names_for(inst, 0);
        try {
            CallerVariant v;
            switch (kind) {
            case CallerVariant::SignatureOnly: v = signature_only(src); break;
            case CallerVariant::CallSiteOnly: v = call_site_only(src); break;
            case CallerVariant::DataFlow: v = data_flow_slice(src); break;
            case CallerVariant::ControlFlow: v = control_flow_slice(src); break;
            case CallerVariant::LengthMatchedIrrelevant:
                v = length_matched_irrelevant(src, pool, cfg.length_tolerance);
                break;
            case CallerVariant::SemanticsPreserving:
                v = semantics_preserving_perturb(src, seed);
                break;
            case CallerVariant::Full:
                v.kind = CallerVariant::Full;
                v.text = src.text;
                v.provenance = src.caller_id;
                break;
            }
            json rec{{"id", inst.id},
                     {"kind", kind_name},
                     {"text", v.text},
                     {"fallback_used", v.fallback_used},
                     {"provenance", v.provenance}};
            records.push_back(dump_line(rec));
        } catch (const Error& e) {
            ++skipped;
            json rec{{"id", inst.id}, {"kind", kind_name}, {"skipped", e.what()}};
            records.push_back(dump_line(rec));
        }
    }
    RunConfig stamped = cfg;
    stamped.seed = seed;
    write_jsonl(out_path, provenance_line(stamped), records);
    std::cout << "variants " << records.size() - skipped << ", skipped " << skipped << "\n";
    return 0;
}

int cmd_usage_stats(const std::string& tasks_path) {
    std::vector<UsageEntry> entries;
    for (const auto& line : read_jsonl(tasks_path)) {
        BenchmarkTask task = task_from_json(line);
        for (std::size_t i = 0; i < task.callers.size(); ++i) {
            std::vector<std::string> names{unqualified(task.target_qname)};
            if (i < task.caller_call_names.size())
                for (const auto& n : task.caller_call_names[i]) names.push_back(n);
            VariantSource src{task.task_id, task.callers[i], names};
            try {
                entries.push_back({task.task_id, classify_call_site(src)});
            } catch (const Error&) {
                // callers without a syntactic target call contribute nothing
            }
        }
    }
    std::cout << format_usage_report(entries);
    return 0;
}

int cmd_render(const RunConfig& cfg, const std::string& tasks_path, const std::string& config_name_s,
               const std::string& style, const std::string& n_test_s, const std::string& out_path) {
    PromptConfig pc = parse_prompt_config(config_name_s);
    pc.style = style == "natural" ? PromptConfig::Natural : PromptConfig::Structured;
    pc.n_test = n_test_s == "all" ? 0 : std::stoi(n_test_s);
    std::vector<std::string> records;
    for (const auto& line : read_jsonl(tasks_path)) {
        BenchmarkTask task = task_from_json(line);
        PromptTask pt{task.task_id, task.header, task.docstring, task.callers};
        std::string text = render(pt, pc);
        records.push_back(dump_line(
            json{{"task_id", task.task_id}, {"config", config_name_s + "/" + style}, {"text", text}}));
    }
    write_jsonl(out_path, provenance_line(cfg), records);
    std::cout << "prompts " << records.size() << "\n";
    return 0;
}

int cmd_bench_build(const RunConfig& cfg, const std::string& repo, const std::string& repo_id_arg,
                    const std::string& fragments_dir, const std::string& out_path,
                    const std::string& manifest_path, const std::string& train_manifest_path) {
    std::string repo_id = repo_id_arg.empty() ? repo : repo_id_arg;
    if (!manifest_path.empty()) {
        Manifest m = load_manifest(manifest_path);
        auto bench_urls = m.urls("bench");
        if (std::find(bench_urls.begin(), bench_urls.end(), repo_id) == bench_urls.end())
            throw SchemaError("manifest", repo_id + " is not in the bench split");
        if (!train_manifest_path.empty()) {
            Manifest train = load_manifest(train_manifest_path);
            check_split_disjoint(train.urls("train"), bench_urls);
        }
    }

    Pipeline p = analyze_repo(repo, repo_id);
    SelectionPolicy policy;
    policy.require_docstring = false; // the NL description is optional for tasks
    policy.assertion_density_threshold = cfg.assertion_density;
    TargetSelection sel = select_targets(p.graph, p.ws, policy, repo_id);

    std::vector<std::string> records;
    std::size_t task_no = 0;
    for (const auto& target : sel.targets) {
        BenchmarkTask task;
        task.task_id = "task_" + std::to_string(task_no++);
        task.repo_id = repo_id;
        task.target_qname = target.decl.qname;
        task.header = target.decl.header_text;
        task.body = target.decl.body_text;
        task.docstring = target.decl.docstring.value_or("");
        std::string tname = unqualified(target.decl.qname);

        std::vector<SiteRequirements> site_reqs;
        for (const auto& caller : target.callers) {
            task.callers.push_back(caller.snippet);
            std::vector<std::string> names{tname};
            for (const auto& n : caller.call_names) names.push_back(n);
            task.caller_call_names.push_back(names);
            // one SiteRequirements per call site in this caller
            for (int site = 0;; ++site) {
                CallSiteContext ctx{caller.snippet, caller.module_path, names, site};
                try {
                    auto reqs = extract_requirements(ctx);
                    site_reqs.push_back({caller.module_path + ":" + std::to_string(site), reqs});
                } catch (const NoCallSite&) {
                    break;
                }
            }
        }
        task.patterns = group_usage_patterns(site_reqs);
        task.sketch = behavior_sketch(task.patterns);

        if (!fragments_dir.empty()) {
            // fragment files named <target>__*.py become drivers
            std::vector<fs::path> frags;
            for (const auto& entry : fs::directory_iterator(fragments_dir)) {
                std::string stem = entry.path().stem().string();
                if (stem.rfind(tname + "__", 0) == 0) frags.push_back(entry.path());
            }
            std::sort(frags.begin(), frags.end());
            for (std::size_t i = 0; i < frags.size() && i < 5; ++i) {
                DriverScript d = normalize_driver(read_file(frags[i].string()), task.target_qname,
                                                  {"from candidate import " + tname});
                d.path = "driver_" + std::to_string(i) + ".py";
                // covers derive from the fragment's own use of the target
                std::string wrapped = "def _driver():\n";
                std::istringstream in(read_file(frags[i].string()));
                std::string fl;
                while (std::getline(in, fl)) wrapped += "    " + fl + "\n";
                try {
                    CallSiteContext cctx{wrapped, d.path, {tname}, 0};
                    for (const auto& r : extract_requirements(cctx))
                        d.covered_requirements.push_back(r.id());
                } catch (const Error&) {
                }
                task.drivers.push_back(std::move(d));
            }
        }
        records.push_back(task_to_json(task));
    }
    write_jsonl(out_path, provenance_line(cfg), records);
    std::cout << "tasks " << records.size() << "\n";
    return 0;
}

int cmd_bench_lint(const std::string& tasks_path) {
    bool all_pass = true;
    for (const auto& line : read_jsonl(tasks_path)) {
        BenchmarkTask task = task_from_json(line);
        CoverageReport report = lint_suite(task);
        std::cout << "== " << task.task_id << " (" << task.target_qname << ")\n"
                  << format_coverage_report(report);
        all_pass = all_pass && report.pass();
    }
    return all_pass ? 0 : 1;
}

int cmd_bench_sanity(const RunConfig& cfg, const std::string& tasks_path,
                     const std::string& out_path, const std::string& backend) {
    SandboxConfig sandbox;
    sandbox.backend = backend == "container" ? SandboxConfig::Container : SandboxConfig::Proc;
    sandbox.limits.wall_s = cfg.timeout_s;
    sandbox.limits.mem_mb = cfg.memory_mb;
    std::string work_root = cfg.out_dir + "/sanity_work";
    std::vector<std::string> accepted;
    std::size_t rejected = 0;
    for (const auto& line : read_jsonl(tasks_path)) {
        BenchmarkTask task = task_from_json(line);
        if (task.drivers.empty()) {
            std::cout << task.task_id << ": no drivers, rejected\n";
            ++rejected;
            continue;
        }
        Outcome o = reference_sanity(task, sandbox, work_root);
        if (o.passed()) {
            accepted.push_back(line);
        } else {
            ++rejected;
            std::cout << task.task_id << ": reference failed (" << outcome_name(o.status)
                      << ") " << o.detail << "\n";
        }
    }
    if (!out_path.empty()) write_jsonl(out_path, provenance_line(cfg), accepted);
    std::cout << "accepted " << accepted.size() << ", rejected " << rejected << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& tasks_path, const std::string& candidates_path,
             const std::string& ks_csv, int workers, const std::string& backend, double timeout,
             const std::string& out_path, bool as_json) {
    std::vector<BenchmarkTask> tasks;
    for (const auto& line : read_jsonl(tasks_path)) tasks.push_back(task_from_json(line));
    std::vector<Candidate> candidates;
    for (const auto& line : read_jsonl(candidates_path))
        candidates.push_back(candidate_from_json(line));

    std::vector<int> ks;
    std::stringstream ss(ks_csv);
    std::string part;
    while (std::getline(ss, part, ',')) ks.push_back(std::stoi(part));
    if (ks.empty()) ks = {1, 5};

    SandboxConfig sandbox;
    sandbox.backend = backend == "container" ? SandboxConfig::Container : SandboxConfig::Proc;
    sandbox.limits.wall_s = timeout > 0 ? timeout : cfg.timeout_s;
    sandbox.limits.mem_mb = cfg.memory_mb;

    auto outcomes =
        run_evaluation(tasks, candidates, sandbox, cfg.out_dir + "/eval_work", workers);
    EvalReport report = aggregate_outcomes(outcomes, ks);
    std::string payload = as_json ? report_to_json(report) : format_report_table(report);
    std::cout << payload;
    if (!out_path.empty()) write_file(out_path, report_to_json(report));
    return 0;
}

int cmd_metrics(const RunConfig& cfg, const std::string& pairs_path, const std::string& out_path) {
    std::vector<std::string> records;
    for (const auto& line : read_jsonl(pairs_path)) {
        MetricPair p = pair_from_json(line);
        CodeBleuResult cb = codebleu(p.candidate, p.reference);
        RougeL rl = rouge_l_text(p.candidate, p.reference);
        records.push_back(json{{"id", p.id},
                               {"codebleu", cb.score},
                               {"rouge_l_f1", rl.f1},
                               {"flags", cb.flags}}
                              .dump());
    }
    write_jsonl(out_path, provenance_line(cfg), records);
    std::cout << "scored " << records.size() << " pairs\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"invocation-aware corpus, benchmark and evaluation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flat keys)");
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable reports");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "snapshot repositories from a manifest");
    std::string manifest_path, cache_dir, today;
    ingest->add_option("--manifest", manifest_path, "manifest JSON")->required();
    ingest->add_option("--cache", cache_dir, "snapshot cache root");
    ingest->add_option("--today", today, "reference date for the recency filter (ISO)");

    // extract
    auto* extract = app.add_subcommand("extract", "build the call graph for one repository");
    std::string repo_dir, out_dir, repo_id;
    extract->add_option("--repo", repo_dir, "repository snapshot directory")->required();
    extract->add_option("--out", out_dir, "output directory")->required();
    extract->add_option("--repo-id", repo_id, "repository id recorded in artifacts");

    // corpus
    auto* corpus = app.add_subcommand("corpus", "build training instances");
    std::string graph_dir, split = "train", corpus_out, other_manifest;
    int n_train = 1;
    bool two_hop = false, no_docstring = false;
    std::uint64_t seed = 0;
    corpus->add_option("--graph", graph_dir, "extract output directory")->required();
    corpus->add_option("--split", split, "train|bench membership to assert");
    corpus->add_option("--n-train", n_train, "callers per instance (1|2|3)")
        ->check(CLI::Range(1, 3));
    corpus->add_flag("--two-hop", two_hop, "augment callers with their first caller");
    corpus->add_option("--seed", seed, "sampling seed");
    corpus->add_option("--out", corpus_out, "corpus JSONL path")->required();
    corpus->add_option("--manifest", manifest_path, "manifest holding this repo's split");
    corpus->add_option("--other-manifest", other_manifest, "opposite-split manifest to check");
    corpus->add_flag("--allow-missing-docstring", no_docstring,
                     "keep targets without descriptions");

    // stats
    auto* stats = app.add_subcommand("stats", "token length statistics for a corpus");
    std::string stats_path;
    stats->add_option("corpus", stats_path, "corpus JSONL")->required();

    // variants
    auto* variants = app.add_subcommand("variants", "caller-context variants");
    std::string variants_corpus, kind_name = "full", variants_out;
    variants->add_option("--corpus", variants_corpus, "corpus JSONL")->required();
    variants->add_option("--kind", kind_name,
                         "signature|call-site|data-flow|control-flow|length-matched|"
                         "semantics-preserving|full")
        ->required();
    variants->add_option("--seed", seed, "seed for the perturbation");
    variants->add_option("--out", variants_out, "variants JSONL path")->required();

    // usage-stats
    auto* usage = app.add_subcommand("usage-stats", "call-site structural classification");
    std::string usage_tasks;
    usage->add_option("--bench", usage_tasks, "tasks JSONL")->required();

    // render
    auto* render_cmd = app.add_subcommand("render", "render prompts for tasks");
    std::string render_tasks, render_config = "header+caller+nl", render_style = "structured",
                n_test = "1", render_out;
    render_cmd->add_option("--tasks", render_tasks, "tasks JSONL")->required();
    render_cmd->add_option("--config", render_config, "header[+caller][+nl]");
    render_cmd->add_option("--style", render_style, "structured|natural");
    render_cmd->add_option("--n-test", n_test, "1|2|3|all");
    render_cmd->add_option("--out", render_out, "prompts JSONL path")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "benchmark task construction");
    auto* bench_build = bench->add_subcommand("build", "build tasks from a repository");
    std::string bench_repo, bench_out, fragments_dir, train_manifest;
    bench_build->add_option("--repo", bench_repo, "bench-split repository directory")->required();
    bench_build->add_option("--repo-id", repo_id, "repository id");
    bench_build->add_option("--fragments", fragments_dir, "directory of test fragments");
    bench_build->add_option("--out", bench_out, "tasks JSONL path")->required();
    bench_build->add_option("--manifest", manifest_path, "manifest holding the bench split");
    bench_build->add_option("--train-manifest", train_manifest, "train manifest to check");
    auto* bench_lint = bench->add_subcommand("lint", "lint task suites against C1-C3");
    std::string lint_tasks;
    bench_lint->add_option("--tasks", lint_tasks, "tasks JSONL")->required();
    auto* bench_sanity = bench->add_subcommand("sanity", "run drivers on reference bodies");
    std::string sanity_tasks, sanity_out, backend = "proc";
    bench_sanity->add_option("--tasks", sanity_tasks, "tasks JSONL")->required();
    bench_sanity->add_option("--out", sanity_out, "accepted tasks JSONL");
    bench_sanity->add_option("--backend", backend, "proc|container");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate candidates in the sandbox");
    std::string eval_tasks, eval_candidates, ks = "1,5", eval_out;
    int workers = 4;
    double timeout = 0;
    eval_cmd->add_option("--tasks", eval_tasks, "tasks JSONL")->required();
    eval_cmd->add_option("--candidates", eval_candidates, "candidates JSONL")->required();
    eval_cmd->add_option("--k", ks, "comma-separated k values");
    eval_cmd->add_option("--workers", workers, "worker pool size");
    eval_cmd->add_option("--backend", backend, "proc|container");
    eval_cmd->add_option("--timeout", timeout, "wall seconds per driver");
    eval_cmd->add_option("--out", eval_out, "report JSON path");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "similarity scores for candidate pairs");
    std::string pairs_path, scores_out;
    metrics_cmd->add_option("--pairs", pairs_path, "pairs JSONL {id, candidate, reference}")
        ->required();
    metrics_cmd->add_option("--out", scores_out, "scores JSONL path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = apply_env_overrides(load_run_config(config_path));
        if (ingest->parsed())
            return cmd_ingest(cfg, manifest_path, cache_dir.empty() ? cfg.cache_dir : cache_dir,
                              today, as_json);
        if (extract->parsed()) return cmd_extract(cfg, repo_dir, out_dir, repo_id);
        if (corpus->parsed())
            return cmd_corpus(cfg, graph_dir, split, n_train, two_hop, seed, corpus_out,
                              manifest_path, other_manifest, !no_docstring);
        if (stats->parsed()) return cmd_stats(stats_path, as_json);
        if (variants->parsed()) return cmd_variants(cfg, variants_corpus, kind_name, seed, variants_out);
        if (usage->parsed()) return cmd_usage_stats(usage_tasks);
        if (render_cmd->parsed())
            return cmd_render(cfg, render_tasks, render_config, render_style, n_test, render_out);
        if (bench->parsed()) {
            if (bench_build->parsed())
                return cmd_bench_build(cfg, bench_repo, repo_id, fragments_dir, bench_out,
                                       manifest_path, train_manifest);
            if (bench_lint->parsed()) return cmd_bench_lint(lint_tasks);
            if (bench_sanity->parsed()) return cmd_bench_sanity(cfg, sanity_tasks, sanity_out, backend);
            std::cerr << "bench requires a build|lint|sanity subcommand\n";
            return 2;
        }
        if (eval_cmd->parsed())
            return cmd_eval(cfg, eval_tasks, eval_candidates, ks, workers, backend, timeout,
                            eval_out, as_json);
        if (metrics_cmd->parsed()) return cmd_metrics(cfg, pairs_path, scores_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
