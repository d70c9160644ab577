#include "callerkit/corpus.hpp"

#include "callerkit/errors.hpp"
#include "callerkit/tokenize.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <random>
#include <set>

namespace callerkit {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// deterministic bounded draw; std::uniform_int_distribution is not pinned
// across standard libraries
std::size_t bounded(std::mt19937_64& rng, std::size_t n) { return rng() % n; }

bool path_is_testlike(const std::string& module_path) {
    std::string p = "/" + module_path;
    for (char& c : p)
        if (c == '\\') c = '/';
    if (p.find("/tests/") != std::string::npos) return true;
    if (p.find("/test/") != std::string::npos) return true;
    auto slash = p.rfind('/');
    std::string fname = p.substr(slash + 1);
    if (fname.rfind("test_", 0) == 0) return true;
    if (fname.size() > 8 && fname.substr(fname.size() - 8) == "_test.py") return true;
    return false;
}

std::size_t count_statements(const py::Suite& suite, std::size_t& asserts) {
    std::size_t n = 0;
    for (const auto& sp : suite) {
        if (!sp) continue;
        ++n;
        if (sp->kind == py::StmtKind::Assert) ++asserts;
        n += count_statements(sp->body, asserts);
        n += count_statements(sp->orelse, asserts);
        n += count_statements(sp->finally_, asserts);
        for (const auto& h : sp->handlers) n += count_statements(h.body, asserts);
    }
    return n;
}

// body is a docstring plus pass/... stubs, or raises NotImplementedError only
bool is_stub_body(const py::Suite& body) {
    std::size_t meaningful = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const py::Stmt& s = *body[i];
        if (s.kind == py::StmtKind::Pass) continue;
        if (s.kind == py::StmtKind::ExprStmt && !s.exprs.empty() && s.exprs[0] &&
            s.exprs[0]->kind == py::ExprKind::Constant) {
            continue; // docstring or bare literal
        }
        if (s.kind == py::StmtKind::Raise && !s.exprs.empty() && s.exprs[0]) {
            const py::Expr& e = *s.exprs[0];
            std::string name;
            if (e.kind == py::ExprKind::Name) name = e.str;
            if (e.kind == py::ExprKind::Call && !e.elts.empty() && e.elts[0] &&
                e.elts[0]->kind == py::ExprKind::Name)
                name = e.elts[0]->str;
            if (name == "NotImplementedError") continue;
        }
        ++meaningful;
    }
    return meaningful == 0;
}

} // namespace

bool is_test_artifact(const std::string& module_path, const FunctionDecl& decl,
                      double assertion_density_threshold) {
    if (path_is_testlike(module_path)) return true;
    if (decl.name.rfind("test_", 0) == 0) return true;
    py::Module mod = py::parse_module(decl.full_text);
    if (mod.ok() && !mod.body.empty() && mod.body[0]->kind == py::StmtKind::FunctionDef) {
        std::size_t asserts = 0;
        std::size_t stmts = count_statements(mod.body[0]->body, asserts);
        if (stmts > 0 &&
            static_cast<double>(asserts) / static_cast<double>(stmts) >=
                assertion_density_threshold)
            return true;
    }
    return false;
}

TargetSelection select_targets(const CallGraph& graph, const Workspace& ws,
                               const SelectionPolicy& policy, const std::string& repo_id) {
    TargetSelection sel;
    for (const auto& qname : graph.nodes) {
        const FunctionDecl* decl = ws.function(qname);
        const FileFacts* file = ws.file_of_function(qname);
        if (!decl || !file) continue;

        if (is_test_artifact(file->module_path, *decl, policy.assertion_density_threshold)) {
            sel.excluded.push_back({qname, "test artifact"});
            continue;
        }
        if (policy.require_docstring && !decl->docstring) {
            sel.excluded.push_back({qname, "no description"});
            continue;
        }
        if (policy.require_complete) {
            py::Module mod = py::parse_module(decl->full_text);
            if (!mod.ok() || mod.body.empty() ||
                mod.body[0]->kind != py::StmtKind::FunctionDef) {
                sel.excluded.push_back({qname, "not reparseable standalone"});
                continue;
            }
            if (is_stub_body(mod.body[0]->body)) {
                sel.excluded.push_back({qname, "incomplete body"});
                continue;
            }
        }

        auto callers = direct_callers(graph, ws, qname);
        TargetFunction tf;
        tf.decl = *decl;
        tf.module_path = file->module_path;
        tf.repo_id = repo_id;
        for (const auto& ref : callers) {
            if (ref.caller_qname == qname) continue; // a recursive body leaks the answer
            const FileFacts* cf = ws.file_of_function(ref.caller_qname);
            if (!cf || !ref.decl) continue;
            if (is_test_artifact(cf->module_path, *ref.decl, policy.assertion_density_threshold))
                continue;
            CallerContext cc{ref.caller_qname, ref.module_path, ref.decl->start_line,
                             ref.decl->full_text, {}};
            std::set<std::string> names;
            for (const CallSite& site : ref.sites)
                if (!site.func_name.empty()) names.insert(site.func_name);
            cc.call_names.assign(names.begin(), names.end());
            tf.callers.push_back(std::move(cc));
        }
        if (tf.callers.empty()) {
            sel.excluded.push_back({qname, "no external caller"});
            continue;
        }
        sel.targets.push_back(std::move(tf));
    }
    return sel;
}

std::vector<TrainingInstance> expand_instances(const TargetFunction& target, int n_train,
                                               std::uint64_t seed) {
    if (target.callers.empty()) throw NoEligibleCaller(target.decl.qname);
    if (n_train < 1) throw DomainError("n_train must be >= 1");

    std::vector<TrainingInstance> out;
    for (std::size_t i = 0; i < target.callers.size(); ++i) {
        TrainingInstance inst;
        inst.repo_id = target.repo_id;
        inst.target_qname = target.decl.qname;
        inst.header = target.decl.header_text;
        inst.docstring = target.decl.docstring.value_or("");
        inst.body = target.decl.body_text;
        inst.caller_qnames.push_back(target.callers[i].qname);
        inst.caller_snippets.push_back(target.callers[i].snippet);
        inst.caller_call_names.push_back(target.callers[i].call_names);

        if (n_train > 1) {
            std::vector<std::size_t> others;
            for (std::size_t j = 0; j < target.callers.size(); ++j)
                if (j != i) others.push_back(j);
            std::size_t want = static_cast<std::size_t>(n_train - 1);
            if (others.size() < want) {
                want = others.size();
                inst.short_of_callers = true;
            }
            std::seed_seq seq{static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(fnv1a(target.decl.qname)),
                              static_cast<std::uint32_t>(fnv1a(target.decl.qname) >> 32),
                              static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            // partial Fisher-Yates: sample without replacement in draw order
            for (std::size_t k = 0; k < want; ++k) {
                std::size_t pick = k + bounded(rng, others.size() - k);
                std::swap(others[k], others[pick]);
                inst.caller_qnames.push_back(target.callers[others[k]].qname);
                inst.caller_snippets.push_back(target.callers[others[k]].snippet);
                inst.caller_call_names.push_back(target.callers[others[k]].call_names);
            }
        }

        char buf[32];
        std::snprintf(buf, sizeof buf, "%04zu", i);
        inst.id = target.repo_id + ":" + target.decl.qname + ":" + buf;
        finalize_instance(inst);
        out.push_back(std::move(inst));
    }
    return out;
}

TrainingInstance augment_two_hop(TrainingInstance instance, const CallGraph& graph,
                                 const Workspace& ws) {
    if (instance.hop_depth != 1) throw DomainError("two-hop augmentation expects hop_depth=1");
    instance.no_second_hop.assign(instance.caller_snippets.size(), false);
    for (std::size_t i = 0; i < instance.caller_snippets.size(); ++i) {
        const std::string& caller_q = instance.caller_qnames[i];
        auto grandparents = direct_callers(graph, ws, caller_q);
        const CallerRef* chosen = nullptr;
        for (const auto& g : grandparents) {
            if (g.caller_qname == caller_q) continue;                // self loop
            if (g.caller_qname == instance.target_qname) continue;  // would leak the target
            const FileFacts* gf = ws.file_of_function(g.caller_qname);
            if (!gf || !g.decl) continue;
            if (is_test_artifact(gf->module_path, *g.decl)) continue;
            chosen = &g;
            break; // first in (path, line) order
        }
        if (chosen) {
            instance.caller_snippets[i] =
                chosen->decl->full_text + "\n" + instance.caller_snippets[i];
        } else {
            instance.no_second_hop[i] = true;
        }
    }
    instance.hop_depth = 2;
    finalize_instance(instance);
    return instance;
}

std::string serialize_fields(const std::string& header, const std::vector<std::string>& callers,
                             const std::string& docstring) {
    std::string joined;
    for (std::size_t i = 0; i < callers.size(); ++i) {
        if (i) joined += "\n\n";
        joined += callers[i];
    }
    return "<func>\n" + header + "\n<calledby>\n" + joined + "\n<docstring>\n" + docstring + "\n";
}

std::string serialize_instance(const TrainingInstance& instance) {
    return serialize_fields(instance.header, instance.caller_snippets, instance.docstring);
}

SerializedFields parse_serialized(const std::string& text) {
    const std::string kFunc = "<func>\n";
    const std::string kCalledBy = "\n<calledby>\n";
    const std::string kDocstring = "\n<docstring>\n";
    if (text.rfind(kFunc, 0) != 0) throw ParseFailure("missing <func> marker");
    auto cb = text.find(kCalledBy);
    if (cb == std::string::npos) throw ParseFailure("missing <calledby> marker");
    auto ds = text.find(kDocstring, cb + kCalledBy.size() - 1);
    if (ds == std::string::npos) throw ParseFailure("missing <docstring> marker");
    if (text.empty() || text.back() != '\n') throw ParseFailure("missing trailing newline");

    SerializedFields f;
    f.header = text.substr(kFunc.size(), cb - kFunc.size());
    std::string callers = text.substr(cb + kCalledBy.size(), ds - cb - kCalledBy.size());
    f.docstring = text.substr(ds + kDocstring.size(),
                              text.size() - 1 - (ds + kDocstring.size()));
    if (!callers.empty()) {
        // caller snippets are complete functions at column zero; blank lines
        // inside one snippet never precede a column-zero def/async/@ line
        std::size_t start = 0;
        for (std::size_t pos = 0; (pos = callers.find("\n\n", pos)) != std::string::npos;) {
            std::size_t next = pos + 2;
            if (callers.compare(next, 4, "def ") == 0 ||
                callers.compare(next, 6, "async ") == 0 || callers.compare(next, 1, "@") == 0) {
                f.callers.push_back(callers.substr(start, pos - start));
                start = next;
            }
            pos = next;
        }
        f.callers.push_back(callers.substr(start));
    }
    return f;
}

void finalize_instance(TrainingInstance& instance) {
    instance.serialized = serialize_instance(instance);
    instance.task_len = code_token_count(instance.serialized);
    instance.target_len = code_token_count(instance.body);
    instance.total_len = instance.task_len + instance.target_len;
}

namespace {

LengthColumn column_stats(std::vector<std::size_t> vals) {
    std::sort(vals.begin(), vals.end());
    LengthColumn c;
    double sum = 0;
    for (auto v : vals) sum += static_cast<double>(v);
    c.mean = sum / static_cast<double>(vals.size());
    auto rank = [&](double p) {
        std::size_t idx = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(vals.size())));
        if (idx == 0) idx = 1;
        return static_cast<double>(vals[idx - 1]);
    };
    c.median = rank(0.50);
    c.p90 = rank(0.90);
    c.p95 = rank(0.95);
    c.p99 = rank(0.99);
    return c;
}

} // namespace

LengthStats corpus_stats(const std::vector<TrainingInstance>& instances) {
    if (instances.empty()) throw EmptyCorpus("no instances");
    std::vector<std::size_t> task, target, total;
    for (const auto& inst : instances) {
        task.push_back(inst.task_len);
        target.push_back(inst.target_len);
        total.push_back(inst.total_len);
    }
    LengthStats s;
    s.task = column_stats(std::move(task));
    s.target = column_stats(std::move(target));
    s.total = column_stats(std::move(total));
    return s;
}

std::string format_stats_table(const LengthStats& stats) {
    char buf[256];
    std::string out;
    out += "Percentile  Task Length  Target Code Length  Total Length\n";
    auto row = [&](const char* label, double a, double b, double c) {
        std::snprintf(buf, sizeof buf, "%-10s  %11.1f  %18.1f  %12.1f\n", label, a, b, c);
        out += buf;
    };
    row("Mean", stats.task.mean, stats.target.mean, stats.total.mean);
    row("Median", stats.task.median, stats.target.median, stats.total.median);
    row("90%", stats.task.p90, stats.target.p90, stats.total.p90);
    row("95%", stats.task.p95, stats.target.p95, stats.total.p95);
    row("99%", stats.task.p99, stats.target.p99, stats.total.p99);
    return out;
}

CorpusBuild build_corpus(const CallGraph& graph, const Workspace& ws,
                         const SelectionPolicy& policy, const std::string& repo_id,
                         int n_train, bool two_hop, std::uint64_t seed) {
    CorpusBuild build;
    TargetSelection sel = select_targets(graph, ws, policy, repo_id);
    build.excluded = std::move(sel.excluded);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& target : sel.targets) {
        for (auto& inst : expand_instances(target, n_train, seed)) {
            if (two_hop) inst = augment_two_hop(std::move(inst), graph, ws);
            if (!seen.insert({inst.target_qname, inst.serialized}).second) {
                ++build.deduped;
                continue;
            }
            build.instances.push_back(std::move(inst));
        }
    }
    return build;
}

} // namespace callerkit
