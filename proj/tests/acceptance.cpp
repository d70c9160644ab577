// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion also enforces its runtime budget.

#include "callerkit/artifacts.hpp"
#include "callerkit/callgraph.hpp"
#include "callerkit/config.hpp"
#include "callerkit/corpus.hpp"
#include "callerkit/ingest.hpp"
#include "callerkit/metrics.hpp"
#include "callerkit/prompt.hpp"
#include "callerkit/tokenize.hpp"
#include "callerkit/variants.hpp"

#include "support/alpha_oracle.hpp"
#include "support/callgraph_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace callerkit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& s) { g_notes.push_back(s); }

struct Criterion {
    const char* name;
    double budget_s;
    std::function<void()> body;
};

#define REQUIRE_TRUE(cond)                                                          \
    do {                                                                            \
        if (!(cond)) throw std::runtime_error(std::string("check failed: ") + #cond \
                                              + " (line " + std::to_string(__LINE__) + ")"); \
    } while (0)

void run_criterion(int index, const Criterion& c) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
        c.body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && secs > c.budget_s) {
        error = "runtime " + std::to_string(secs) + "s exceeds budget " +
                std::to_string(c.budget_s) + "s";
    }
    if (error.empty()) {
        std::printf("PASS  %2d. %s (%.2fs)\n", index, c.name, secs);
    } else {
        std::printf("FAIL  %2d. %s (%.2fs): %s\n", index, c.name, secs, error.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

std::string fixture(const char* name) { return std::string(FIXTURE_DIR) + "/" + name; }

std::string temp_root(const char* tag) {
    fs::path p = fs::temp_directory_path() / (std::string("ck_accept_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

// ---- criterion 1: call-graph oracle equivalence -----------------------------

void crit_callgraph_oracle() {
    using ck_test::EdgeBag;
    using ck_test::OracleTables;

    struct Case {
        const char* repo;
        OracleTables tables;
    };
    std::vector<Case> cases(3);
    cases[0].repo = "repo_intra";
    cases[1].repo = "repo_imports";
    cases[1].tables.aliases["main"] = {
        {"pkg", "pkg"}, {"tf", "pkg.core.transform"}, {"tl", "pkg.extra.tools"}, {"np", "!numpy"}};
    cases[2].repo = "repo_inherit";
    cases[2].tables.mro["shapes.circle.Circle"] = {"shapes.circle.Circle", "shapes.base.Base",
                                                   "shapes.mix.LogMixin"};
    cases[2].tables.mro["shapes.base.Base"] = {"shapes.base.Base"};
    cases[2].tables.mro["shapes.mix.LogMixin"] = {"shapes.mix.LogMixin"};
    cases[2].tables.aliases["shapes.circle"] = {{"Base", "shapes.base.Base"},
                                                {"LogMixin", "shapes.mix.LogMixin"},
                                                {"Circle", "shapes.circle.Circle"}};
    cases[2].tables.typed_locals["shapes.circle.make"] = {{"c", "shapes.circle.Circle"}};

    for (const auto& c : cases) {
        Workspace ws(parse_repo_tree(fixture(c.repo)));
        CallGraph g = build_call_graph(ws);
        EdgeBag got = ck_test::edge_bag(g);
        EdgeBag expected = ck_test::oracle_edges(ws, c.tables);
        REQUIRE_TRUE(got == expected);
        REQUIRE_TRUE(!g.nodes.empty());
    }
}

// ---- criterion 2: transpose invariant ---------------------------------------

void crit_transpose() {
    std::mt19937 rng(424242);
    for (int iter = 0; iter < 200; ++iter) {
        int nfiles = 1 + static_cast<int>(rng() % 4);
        int nfuncs = 2 + static_cast<int>(rng() % 5);
        std::vector<FileFacts> files;
        for (int fi = 0; fi < nfiles; ++fi) {
            std::string src;
            for (int o = 0; o < fi; ++o) src += "import m" + std::to_string(o) + "\n";
            for (int j = 0; j < nfuncs; ++j) {
                src += "def f" + std::to_string(fi) + "_" + std::to_string(j) + "():\n";
                int ncalls = static_cast<int>(rng() % 4);
                if (ncalls == 0) src += "    pass\n";
                for (int cidx = 0; cidx < ncalls; ++cidx) {
                    int tf = static_cast<int>(rng() % (fi + 1));
                    int tj = static_cast<int>(rng() % nfuncs);
                    std::string name = "f" + std::to_string(tf) + "_" + std::to_string(tj);
                    if (tf == fi) src += "    " + name + "()\n";
                    else src += "    m" + std::to_string(tf) + "." + name + "()\n";
                }
            }
            files.push_back(parse_file(src, "m" + std::to_string(fi) + ".py"));
        }
        Workspace ws(std::move(files));
        CallGraph g = build_call_graph(ws);
        REQUIRE_TRUE(g.calls_edges.size() == g.calledby_edges.size());
        ck_test::EdgeBag calls = ck_test::edge_bag(g);
        ck_test::EdgeBag mirrored;
        for (const auto& e : g.calledby_edges) mirrored.insert({e.callee, e.caller});
        REQUIRE_TRUE(calls == mirrored);
    }
}

// ---- criterion 3: expansion law ---------------------------------------------

TargetFunction synthetic_target(int m, int salt) {
    TargetFunction t;
    t.repo_id = "fixture";
    t.decl.qname = "m.f" + std::to_string(salt);
    t.decl.name = "f" + std::to_string(salt);
    t.decl.header_text = "def f" + std::to_string(salt) + "(x):";
    t.decl.body_text = "return x + " + std::to_string(salt);
    t.decl.full_text = t.decl.header_text + "\n    " + t.decl.body_text;
    t.decl.docstring = "adds";
    for (int i = 0; i < m; ++i) {
        CallerContext c;
        c.qname = "m.g" + std::to_string(i);
        c.module_path = "m.py";
        c.start_line = 10 + i;
        c.snippet = "def g" + std::to_string(i) + "():\n    f" + std::to_string(salt) + "(" +
                    std::to_string(i) + ")";
        t.callers.push_back(std::move(c));
    }
    return t;
}

void crit_expansion_law() {
    std::mt19937 rng(77);
    for (int iter = 0; iter < 100; ++iter) {
        int m = 1 + static_cast<int>(rng() % 6);
        TargetFunction t = synthetic_target(m, iter);
        auto one = expand_instances(t, 1, 5);
        REQUIRE_TRUE(one.size() == static_cast<std::size_t>(m)); // m one-caller instances

        for (int n_train : {2, 3}) {
            auto multi = expand_instances(t, n_train, 99 + iter);
            REQUIRE_TRUE(multi.size() == static_cast<std::size_t>(m));
            for (std::size_t i = 0; i < multi.size(); ++i) {
                const auto& inst = multi[i];
                std::size_t expected =
                    std::min<std::size_t>(n_train, t.callers.size());
                REQUIRE_TRUE(inst.caller_qnames.size() == expected);
                REQUIRE_TRUE(inst.caller_qnames[0] == t.callers[i].qname);
                std::set<std::string> uniq(inst.caller_qnames.begin(), inst.caller_qnames.end());
                REQUIRE_TRUE(uniq.size() == inst.caller_qnames.size()); // distinct
                REQUIRE_TRUE(inst.short_of_callers ==
                             (t.callers.size() < static_cast<std::size_t>(n_train)));
            }
            // two runs, byte-identical serializations
            auto again = expand_instances(t, n_train, 99 + iter);
            REQUIRE_TRUE(again.size() == multi.size());
            for (std::size_t i = 0; i < multi.size(); ++i)
                REQUIRE_TRUE(again[i].serialized == multi[i].serialized);
        }
    }
}

// ---- criterion 4: serialization round-trip ----------------------------------

void crit_serialization_roundtrip() {
    std::mt19937 rng(2024);
    for (int iter = 0; iter < 1000; ++iter) {
        TrainingInstance inst;
        inst.header = "def fn_" + std::to_string(iter) + "(a, b=1):";
        int ncallers = 1 + static_cast<int>(rng() % 3);
        for (int c = 0; c < ncallers; ++c) {
            std::string snippet = "def caller_" + std::to_string(c) + "(v):\n";
            snippet += "    r = fn_" + std::to_string(iter) + "(v)\n";
            if (rng() % 2) snippet += "\n    extra = " + std::to_string(rng() % 10) + "\n";
            snippet += "    return r";
            inst.caller_snippets.push_back(snippet);
        }
        switch (rng() % 3) {
        case 0: inst.docstring = ""; break;
        case 1: inst.docstring = "Single line."; break;
        default: inst.docstring = "Multi line.\n\nWith a blank line."; break;
        }
        std::string text = serialize_instance(inst);

        auto count = [&](const char* m) {
            std::size_t n = 0;
            for (std::size_t p = 0; (p = text.find(m, p)) != std::string::npos; ++p) ++n;
            return n;
        };
        REQUIRE_TRUE(count("<func>") == 1);
        REQUIRE_TRUE(count("<calledby>") == 1);
        REQUIRE_TRUE(count("<docstring>") == 1);
        REQUIRE_TRUE(text.find("<func>") < text.find("<calledby>"));
        REQUIRE_TRUE(text.find("<calledby>") < text.find("<docstring>"));

        SerializedFields fields = parse_serialized(text);
        REQUIRE_TRUE(fields.header == inst.header);
        REQUIRE_TRUE(fields.docstring == inst.docstring);
        REQUIRE_TRUE(fields.callers.size() == inst.caller_snippets.size());
        for (std::size_t i = 0; i < fields.callers.size(); ++i)
            REQUIRE_TRUE(fields.callers[i] == inst.caller_snippets[i]);
    }
}

// ---- criterion 5: variant contracts -----------------------------------------

std::vector<VariantSource> variant_pool() {
    std::vector<VariantSource> pool;
    std::mt19937 rng(555);
    for (int i = 0; i < 50; ++i) {
        std::string name = "caller_" + std::to_string(i);
        std::string text;
        switch (i % 5) {
        case 0: // straight line
            text = "def " + name + "(a):\n    r = f(a)\n    s = r\n    return s\n";
            break;
        case 1: // enclosed in for
            text = "def " + name + "(xs):\n    out = []\n    for x in xs:\n        out.append(f(x))\n    return out\n";
            break;
        case 2: // result feeds an if
            text = "def " + name + "(u):\n    cfg = f(u)\n    if cfg:\n        return cfg\n    return None\n";
            break;
        case 3: // try/except around the call
            text = "def " + name + "():\n    try:\n        return f()\n    except ValueError:\n        return None\n";
            break;
        default: // extra locals for renaming
            text = "def " + name + "(a, b):\n    total = a + b\n    r = f(total)\n    final = r - 1\n    return final\n";
            break;
        }
        // vary the token budget so length matching has spread
        for (int pad = 0; pad < i % 4; ++pad) {
            text.insert(text.rfind("    return"), "    pad_" + std::to_string(pad) + " = " +
                                                      std::to_string(pad) + "\n");
        }
        pool.push_back({name, text, {"f"}});
    }
    return pool;
}

void crit_variant_contracts() {
    auto pool = variant_pool();
    auto contains_call = [](const std::string& t) { return t.find("f(") != std::string::npos; };
    auto lines_of = [](const std::string& t) {
        std::vector<std::string> ls;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= t.size(); ++i) {
            if (i == t.size() || t[i] == '\n') {
                std::string line = t.substr(start, i - start);
                std::size_t b = line.find_first_not_of(" \t");
                if (b != std::string::npos) ls.push_back(line.substr(b));
                start = i + 1;
            }
        }
        return ls;
    };

    int fallbacks = 0;
    for (const auto& src : pool) {
        // call preservation
        REQUIRE_TRUE(!contains_call(signature_only(src).text));
        REQUIRE_TRUE(contains_call(call_site_only(src).text));
        REQUIRE_TRUE(contains_call(data_flow_slice(src).text));
        CallerVariant cf = control_flow_slice(src);
        REQUIRE_TRUE(contains_call(cf.text));
        CallerVariant sp = semantics_preserving_perturb(src, 17);
        REQUIRE_TRUE(contains_call(sp.text));

        // subset property over verbatim lines
        auto caller_lines = lines_of(src.text);
        auto subset = [&](const std::string& text) {
            for (const auto& line : lines_of(text)) {
                bool found = false;
                for (const auto& cl : caller_lines)
                    if (cl == line) found = true;
                if (!found) return false;
            }
            return true;
        };
        REQUIRE_TRUE(subset(data_flow_slice(src).text));
        if (cf.fallback_used) {
            ++fallbacks;
            REQUIRE_TRUE(cf.text == src.text); // fallback equals the full caller
        } else {
            REQUIRE_TRUE(subset(cf.text));
        }

        // alpha soundness via the AST oracle
        std::set<std::string> preserved{"f"};
        std::string a = ck_test::alpha_normalize(src.text, preserved);
        std::string b = ck_test::alpha_normalize(sp.text, preserved);
        REQUIRE_TRUE(!a.empty());
        REQUIRE_TRUE(a == b);

        // length-matched control within tolerance, never calling the target
        std::vector<VariantSource> others;
        for (const auto& cand : pool)
            if (cand.caller_id != src.caller_id) {
                VariantSource stripped = cand;
                // pool entries must not call the target: neutralize the call
                std::string t = stripped.text;
                for (std::size_t p = 0; (p = t.find("f(", p)) != std::string::npos; p += 2)
                    t[p] = 'h';
                stripped.text = t;
                others.push_back(std::move(stripped));
            }
        CallerVariant lm = length_matched_irrelevant(src, others, 0.10);
        double want = static_cast<double>(code_token_count(src.text));
        double got = static_cast<double>(code_token_count(lm.text));
        REQUIRE_TRUE(std::abs(got - want) <= 0.10 * want + 1e-9);
        REQUIRE_TRUE(!contains_call(lm.text));
    }
    // straight-line callers exist in the pool and triggered the fallback
    REQUIRE_TRUE(fallbacks >= 10);
}

// ---- criterion 6: benchmark calculus ----------------------------------------

Requirement mk_req(Requirement::Kind k, const std::string& param = "") {
    Requirement r;
    r.kind = k;
    r.param = param;
    r.evidence = "fixture.py:1";
    return r;
}

void crit_benchmark_calculus() {
    // union identities against brute force on fixture callers
    std::vector<std::string> callers = {
        "def g0(u):\n    cfg = f(u)\n    lang = cfg[\"language\"]\n    return lang\n",
        "def g1(u):\n    cfg = f(u)\n    if cfg:\n        return cfg[\"language\"]\n    return None\n",
        "def g2():\n    r = f()\n    r.save()\n",
        "def g3(x):\n    a, b = f(x)\n    return a + b\n",
    };
    std::vector<SiteRequirements> sites;
    for (std::size_t i = 0; i < callers.size(); ++i) {
        CallSiteContext ctx{callers[i], "m.py", {"f"}, 0};
        sites.push_back({"m.py:" + std::to_string(i), extract_requirements(ctx)});
    }
    auto patterns = group_usage_patterns(sites);
    for (const auto& pat : patterns) {
        std::set<std::string> expected;
        for (auto mi : pat.members)
            for (const auto& r : sites[mi].requirements) expected.insert(r.id());
        std::set<std::string> got;
        for (const auto& r : pat.requirements) got.insert(r.id());
        REQUIRE_TRUE(got == expected); // R(U_j) is the exact member union
    }
    BehaviorSketch sketch = behavior_sketch(patterns);
    std::set<std::string> all_ids, sketch_ids;
    for (const auto& s : sites)
        for (const auto& r : s.requirements) all_ids.insert(r.id());
    for (const auto& r : sketch.requirements) sketch_ids.insert(r.id());
    REQUIRE_TRUE(sketch_ids == all_ids); // B(f) is the union over patterns

    // lint: seeded C1/C2/C3 violations, one of each, then the repaired suite
    BenchmarkTask task;
    task.task_id = "t";
    task.target_qname = "m.f";
    UsagePattern u1, u2;
    u1.id = "U1";
    u1.members = {0};
    u1.requirements = {mk_req(Requirement::ReturnSubscript, "language"),
                       mk_req(Requirement::ArgShape, "1")};
    u2.id = "U2";
    u2.members = {1};
    u2.requirements = {mk_req(Requirement::ReturnMethod, "save")};
    task.patterns = {u1, u2};
    task.sketch = behavior_sketch(task.patterns);

    DriverScript d1;
    d1.path = "driver_0.py";
    d1.text = "assert f(1)[\"language\"] == \"en\"  # evidence: m.py:2\n";
    d1.covered_requirements = {"RETURN_SUBSCRIPT(language)", "ARG_SHAPE(1)"};
    DriverScript d2;
    d2.path = "driver_1.py";
    d2.text = "r = f(1)\nassert r.save() is None\n"; // C3: missing evidence
    d2.covered_requirements = {};                    // C2: RETURN_METHOD uncovered

    task.drivers = {d1, d2};
    CoverageReport seeded = lint_suite(task);
    REQUIRE_TRUE(!seeded.pass());
    REQUIRE_TRUE(seeded.uncovered_patterns == std::vector<std::string>{"U2"}); // C1
    REQUIRE_TRUE(seeded.uncovered_requirements ==
                 std::vector<std::string>{"RETURN_METHOD(save)"}); // C2
    REQUIRE_TRUE(seeded.unannotated_assertions ==
                 std::vector<std::string>{"driver_1.py:2"}); // C3

    task.drivers[1].text = "r = f(1)\nassert r.save() is None  # evidence: m.py:9\n";
    task.drivers[1].covered_requirements = {"RETURN_METHOD(save)"};
    CoverageReport repaired = lint_suite(task);
    REQUIRE_TRUE(repaired.pass());

    // reference sanity rejects a task whose driver contradicts ground truth
    BenchmarkTask real;
    real.task_id = "sanity";
    real.target_qname = "lib.double_it";
    real.header = "def double_it(x):";
    real.body = "\"\"\"Doubles.\"\"\"\n    return x * 2";
    DriverScript good = normalize_driver("assert double_it(3) == 6  # evidence: lib.py:4",
                                         "lib.double_it", {"from candidate import double_it"});
    good.path = "driver_0.py";
    real.drivers = {good};
    SandboxConfig sandbox;
    sandbox.limits.wall_s = 5.0;
    std::string root = temp_root("calculus");
    REQUIRE_TRUE(reference_sanity(real, sandbox, root).passed());

    DriverScript bad = normalize_driver("assert double_it(3) == 7  # evidence: lib.py:4",
                                        "lib.double_it", {"from candidate import double_it"});
    bad.path = "driver_0.py";
    real.drivers = {bad};
    REQUIRE_TRUE(!reference_sanity(real, sandbox, root).passed());
    fs::remove_all(root);
}

// ---- criterion 7: pass@k estimator -------------------------------------------

double pass_at_k_enum(int n, int c, int k) {
    long total = 0, hit = 0;
    std::vector<int> comb(k);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            ++total;
            for (int i = 0; i < k; ++i)
                if (comb[i] < c) {
                    ++hit;
                    return;
                }
            return;
        }
        for (int v = start; v < n; ++v) {
            comb[depth] = v;
            rec(v + 1, depth + 1);
        }
    };
    rec(0, 0);
    return static_cast<double>(hit) / static_cast<double>(total);
}

void crit_pass_at_k() {
    double max_err = 0;
    for (int n = 1; n <= 10; ++n)
        for (int c = 0; c <= n; ++c)
            for (int k = 1; k <= n; ++k)
                max_err = std::max(max_err,
                                   std::abs(pass_at_k(n, c, k) - pass_at_k_enum(n, c, k)));
    REQUIRE_TRUE(max_err < 1e-12);
    REQUIRE_TRUE(std::abs(pass_at_k(5, 2, 3) - 0.9) < 1e-12);
    note("pass@k max enumeration error " + std::to_string(max_err));
}

// ---- criterion 8: harness semantics -----------------------------------------

void crit_harness_semantics() {
    std::string root = temp_root("harness");
    SandboxConfig cfg;
    cfg.limits.wall_s = 10.0; // the pinned default

    // two drivers, candidate passes one and fails the other => fail
    BenchmarkTask task;
    task.task_id = "two_drivers";
    task.target_qname = "lib.add_one";
    task.header = "def add_one(x):";
    task.body = "\"\"\"Adds one.\"\"\"\n    return x + 1";
    DriverScript ok = normalize_driver("assert add_one(1) == 2  # evidence: lib.py:3",
                                       "lib.add_one", {"from candidate import add_one"});
    ok.path = "driver_0.py";
    DriverScript expects_bug = normalize_driver("assert add_one(1) == 5  # evidence: lib.py:4",
                                                "lib.add_one", {"from candidate import add_one"});
    expects_bug.path = "driver_1.py";
    task.drivers = {ok, expects_bug};

    Candidate correct{"two_drivers", 0, "def add_one(x):\n    return x + 1\n"};
    auto outcomes = run_evaluation({task}, {correct}, cfg, root, 2);
    REQUIRE_TRUE(outcomes.size() == 1);
    REQUIRE_TRUE(outcomes[0].outcome.status == OutcomeStatus::Fail);

    // sleep-forever candidate times out at the configured 10 s (+/- 1 s)
    BenchmarkTask solo = task;
    solo.task_id = "sleeper";
    solo.drivers = {ok};
    Candidate sleeper{"sleeper", 0,
                      "import time\n\ndef add_one(x):\n    while True:\n        time.sleep(1)\n"};
    auto slept = run_evaluation({solo}, {sleeper}, cfg, root, 1);
    REQUIRE_TRUE(slept[0].outcome.status == OutcomeStatus::Timeout);
    REQUIRE_TRUE(slept[0].outcome.wall_ms >= 9000);
    REQUIRE_TRUE(slept[0].outcome.wall_ms <= 11000);
    note("timeout killed after " + std::to_string(slept[0].outcome.wall_ms) + " ms");

    // three-task fixture with known outcomes: pass@1 equals the hand mean
    BenchmarkTask a = task, b = task, c = task;
    a.task_id = "ta";
    a.drivers = {ok};
    b.task_id = "tb";
    b.drivers = {ok};
    c.task_id = "tc";
    c.drivers = {ok};
    std::vector<Candidate> cands{
        {"ta", 0, "def add_one(x):\n    return x + 1\n"}, // pass
        {"tb", 0, "def add_one(x):\n    return x - 1\n"}, // fail
        {"tc", 0, "def add_one(x):\n    return 1 + x\n"}, // pass
    };
    auto results = run_evaluation({a, b, c}, cands, cfg, root, 3);
    EvalReport report = aggregate_outcomes(results, {1});
    REQUIRE_TRUE(std::abs(report.aggregate.at(1) - 2.0 / 3.0) < 1e-12);
    fs::remove_all(root);
}

// ---- criterion 9: metrics ----------------------------------------------------

int lcs_exhaustive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    int best = 0;
    for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
        std::vector<std::string> sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask & (1u << i)) sub.push_back(a[i]);
        std::size_t j = 0;
        for (const auto& tok : b)
            if (j < sub.size() && tok == sub[j]) ++j;
        if (j == sub.size()) best = std::max<int>(best, static_cast<int>(sub.size()));
    }
    return best;
}

void crit_metrics() {
    // ROUGE-L equals the exhaustive-subsequence oracle on ALL pairs of token
    // lists over a two-symbol alphabet, both lengths 1..8 (510 x 510 pairs)
    auto subsequence_lcs = [](unsigned cm, int cn, unsigned rm, int rn) {
        int best = 0;
        for (unsigned mask = 0; mask < (1u << cn); ++mask) {
            int size = __builtin_popcount(mask);
            if (size <= best) continue;
            // is the masked candidate a subsequence of the reference?
            int j = 0, taken = 0;
            for (int i = 0; i < cn && j < rn; ++i) {
                if (!(mask & (1u << i))) continue;
                int sym = (cm >> i) & 1;
                while (j < rn && ((rm >> j) & 1) != static_cast<unsigned>(sym)) ++j;
                if (j >= rn) break;
                ++taken;
                ++j;
            }
            if (taken == size) best = size;
        }
        return best;
    };
    const char* alphabet[2] = {"a", "b"};
    for (int cn = 1; cn <= 8; ++cn) {
        for (unsigned cm = 0; cm < (1u << cn); ++cm) {
            std::vector<std::string> cand;
            for (int i = 0; i < cn; ++i) cand.push_back(alphabet[(cm >> i) & 1]);
            for (int rn = 1; rn <= 8; ++rn) {
                for (unsigned rm = 0; rm < (1u << rn); ++rm) {
                    std::vector<std::string> ref;
                    for (int i = 0; i < rn; ++i) ref.push_back(alphabet[(rm >> i) & 1]);
                    int oracle = subsequence_lcs(cm, cn, rm, rn);
                    RougeL r = rouge_l(cand, ref);
                    double p = static_cast<double>(oracle) / cand.size();
                    double rec = static_cast<double>(oracle) / ref.size();
                    double f1 = (p + rec) > 0 ? 2 * p * rec / (p + rec) : 0.0;
                    REQUIRE_TRUE(r.f1 == f1);
                }
            }
        }
    }
    // spot-check the bitmask oracle against the list-based one
    std::mt19937 rng(9);
    for (int iter = 0; iter < 50; ++iter) {
        int cn = 1 + rng() % 8, rn = 1 + rng() % 8;
        unsigned cm = rng() & ((1u << cn) - 1), rm = rng() & ((1u << rn) - 1);
        std::vector<std::string> cand, ref;
        for (int i = 0; i < cn; ++i) cand.push_back(alphabet[(cm >> i) & 1]);
        for (int i = 0; i < rn; ++i) ref.push_back(alphabet[(rm >> i) & 1]);
        REQUIRE_TRUE(subsequence_lcs(cm, cn, rm, rn) == lcs_exhaustive(cand, ref));
    }

    // identity inputs score 1.0 for both metrics
    const char* snippets[] = {"x = 1", "def f(a):\n    if a:\n        return a\n    return 0\n"};
    for (const char* s : snippets) {
        REQUIRE_TRUE(std::abs(codebleu(s, s).score - 1.0) < 1e-6);
        REQUIRE_TRUE(std::abs(rouge_l_text(s, s).f1 - 1.0) < 1e-6);
    }

    // default weights are 0.25 each and sum to 1
    CodeBleuWeights w;
    REQUIRE_TRUE(w.alpha == 0.25 && w.beta == 0.25 && w.gamma == 0.25 && w.delta == 0.25);
    REQUIRE_TRUE(std::abs(w.alpha + w.beta + w.gamma + w.delta - 1.0) < 1e-9);

    // the 5-token pair against its hand-computed oracle
    const double eps = 1e-9;
    double expected_bleu = std::pow(0.8 * 0.5 * (1.0 / 3.0) * eps, 0.25);
    double expected =
        0.25 * expected_bleu + 0.25 * expected_bleu + 0.25 * (3.0 / 6.0) + 0.25 * 1.0;
    CodeBleuResult r = codebleu("x = a + b", "x = a - b");
    REQUIRE_TRUE(std::abs(r.score - expected) < 1e-6);
}

// ---- criterion 10: split safety ----------------------------------------------

void crit_split_safety() {
    std::string root = temp_root("split");
    std::string train_path = root + "/train.json";
    std::string bench_path = root + "/bench.json";
    {
        std::ofstream t(train_path);
        t << R"({"entries": [
            {"url": "repoX", "revision": "abc", "split": "train", "stars": 150, "last_commit_date": "2026-01-01"},
            {"url": "repoY", "revision": "abc", "split": "train", "stars": 150, "last_commit_date": "2026-01-01"}
        ]})";
        std::ofstream b(bench_path);
        b << R"({"entries": [
            {"url": "repoX", "revision": "abc", "split": "bench", "stars": 150, "last_commit_date": "2026-01-01"}
        ]})";
    }
    Manifest train = load_manifest(train_path);
    Manifest bench = load_manifest(bench_path);
    bool threw = false;
    try {
        check_split_disjoint(train.urls("train"), bench.urls("bench"));
    } catch (const SplitOverlapError& e) {
        threw = true;
        REQUIRE_TRUE(e.urls() == std::vector<std::string>{"repoX"});
    }
    REQUIRE_TRUE(threw);

    // a single manifest with one url in both splits is rejected at load
    std::string dual_path = root + "/dual.json";
    {
        std::ofstream d(dual_path);
        d << R"({"entries": [
            {"url": "repoZ", "revision": "abc", "split": "train", "stars": 150, "last_commit_date": "2026-01-01"},
            {"url": "repoZ", "revision": "abc", "split": "bench", "stars": 150, "last_commit_date": "2026-01-01"}
        ]})";
    }
    bool dual_threw = false;
    try {
        load_manifest(dual_path);
    } catch (const SplitOverlapError&) {
        dual_threw = true;
    }
    REQUIRE_TRUE(dual_threw);

#ifdef CALLERKIT_CLI
    // end to end: the bench build aborts with the overlap error and exit 1
    std::string cmd = std::string(CALLERKIT_CLI) + " bench build --repo " + fixture("repo_bench") +
                      " --repo-id repoX --manifest " + bench_path + " --train-manifest " +
                      train_path + " --out " + root + "/tasks.jsonl 2>" + root + "/err.txt";
    int rc = std::system(cmd.c_str());
    REQUIRE_TRUE(WIFEXITED(rc) && WEXITSTATUS(rc) == 1);
    std::ifstream err(root + "/err.txt");
    std::stringstream ss;
    ss << err.rdbuf();
    REQUIRE_TRUE(ss.str().find("split overlap") != std::string::npos);
#endif
    fs::remove_all(root);
}

// ---- criterion 11: classification report --------------------------------------

void crit_classification_report() {
    // designed fixture: 20 call sites with known primary classes across 5 tasks
    std::string enclosed = "def g(xs):\n    for x in xs:\n        f(x)\n";
    std::string feeds = "def g(u):\n    r = f(u)\n    if r:\n        go(r)\n";
    std::string unrelated = "def g(u, flag):\n    r = f(u)\n    if flag:\n        other()\n    return r\n";
    std::string none = "def g(u):\n    r = f(u)\n    return r\n";

    struct Spec {
        const char* task;
        const std::string* text;
    };
    std::vector<Spec> layout = {
        // t1: enclosed, enclosed, feeds, none
        {"t1", &enclosed}, {"t1", &enclosed}, {"t1", &feeds}, {"t1", &none},
        // t2: enclosed x2, unrelated x2
        {"t2", &enclosed}, {"t2", &enclosed}, {"t2", &unrelated}, {"t2", &unrelated},
        // t3: feeds x3, none
        {"t3", &feeds}, {"t3", &feeds}, {"t3", &feeds}, {"t3", &none},
        // t4: none x3, enclosed
        {"t4", &none}, {"t4", &none}, {"t4", &none}, {"t4", &enclosed},
        // t5: unrelated x2, feeds, enclosed
        {"t5", &unrelated}, {"t5", &unrelated}, {"t5", &feeds}, {"t5", &enclosed},
    };
    REQUIRE_TRUE(layout.size() == 20);

    std::vector<UsageEntry> entries;
    for (const auto& item : layout) {
        VariantSource src{"c", *item.text, {"f"}};
        entries.push_back({item.task, classify_call_site(src)});
    }
    // hand counts: enclosed 6/20, feeds 5/20, unrelated 4/20, none 5/20;
    // task hits: enclosed 4/5, feeds 3/5, unrelated 2/5, none 3/5
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& e : entries) ++counts[static_cast<int>(e.cls.primary)];
    REQUIRE_TRUE(counts[0] == 6);
    REQUIRE_TRUE(counts[1] == 5);
    REQUIRE_TRUE(counts[2] == 4);
    REQUIRE_TRUE(counts[3] == 5);

    std::string report = format_usage_report(entries);
    REQUIRE_TRUE(report.find("instances") != std::string::npos);
    REQUIRE_TRUE(report.find("tasks") != std::string::npos);
    auto line_of = [&](const char* label) {
        auto pos = report.find(label);
        REQUIRE_TRUE(pos != std::string::npos);
        auto end = report.find('\n', pos);
        return report.substr(pos, end - pos);
    };
    std::string l0 = line_of("enclosed-by-block");
    REQUIRE_TRUE(l0.find("30.00% instances") != std::string::npos);
    REQUIRE_TRUE(l0.find("80.00% tasks") != std::string::npos);
    std::string l1 = line_of("return-feeds-block");
    REQUIRE_TRUE(l1.find("25.00% instances") != std::string::npos);
    REQUIRE_TRUE(l1.find("60.00% tasks") != std::string::npos);
    std::string l2 = line_of("unrelated-control-only");
    REQUIRE_TRUE(l2.find("20.00% instances") != std::string::npos);
    REQUIRE_TRUE(l2.find("40.00% tasks") != std::string::npos);
    std::string l3 = line_of("no-structured-control");
    REQUIRE_TRUE(l3.find("25.00% instances") != std::string::npos);
    REQUIRE_TRUE(l3.find("60.00% tasks") != std::string::npos);
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"call-graph oracle equivalence on three fixture repos", 5.0, crit_callgraph_oracle},
        {"calls/calledby transpose over 200 random graphs", 10.0, crit_transpose},
        {"expansion law and seeded multi-caller determinism", 5.0, crit_expansion_law},
        {"serialization round-trip over 1000 instances", 5.0, crit_serialization_roundtrip},
        {"variant contracts on a 50-caller pool", 10.0, crit_variant_contracts},
        {"benchmark calculus, lint seeding and reference sanity", 10.0, crit_benchmark_calculus},
        {"pass@k exhaustive equivalence (n <= 10)", 1.0, crit_pass_at_k},
        {"harness all-drivers, timeout and hand-computed mean", 60.0, crit_harness_semantics},
        {"metrics oracles, identity and pinned weights", 30.0, crit_metrics},
        {"repository-level split safety", 1.0, crit_split_safety},
        {"call-site classification on a designed 20-site fixture", 5.0,
         crit_classification_report},
    };
    for (std::size_t i = 0; i < criteria.size(); ++i)
        run_criterion(static_cast<int>(i) + 1, criteria[i]);
    for (const auto& n : g_notes) std::printf("note: %s\n", n.c_str());
    if (g_failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
