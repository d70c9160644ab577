#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "callerkit/corpus.hpp"
#include "callerkit/errors.hpp"

#include <random>

using namespace callerkit;

namespace {

FunctionDecl make_decl(const std::string& qname, const std::string& header,
                       const std::string& body, const char* doc = nullptr) {
    FunctionDecl d;
    d.qname = qname;
    d.name = qname.substr(qname.rfind('.') + 1);
    d.header_text = header;
    d.body_text = body;
    d.full_text = header + "\n    " + body;
    if (doc) d.docstring = doc;
    return d;
}

TargetFunction make_target(int n_callers) {
    TargetFunction t;
    t.repo_id = "fixture";
    t.decl = make_decl("m.f", "def f(x):", "return x + 1", "adds one");
    for (int i = 0; i < n_callers; ++i) {
        CallerContext c;
        c.qname = "m.g" + std::to_string(i);
        c.module_path = "m.py";
        c.start_line = 10 + i;
        c.snippet = "def g" + std::to_string(i) + "():\n    f(" + std::to_string(i) + ")";
        t.callers.push_back(std::move(c));
    }
    return t;
}

} // namespace

TEST_CASE("test artifact detection: paths, names, assertion density") {
    FunctionDecl plain = make_decl("a.util", "def util():", "return 1");
    CHECK(is_test_artifact("a/tests/b.py", plain));
    CHECK(is_test_artifact("test_mod.py", plain));
    CHECK(is_test_artifact("pkg/mod_test.py", plain));
    CHECK(!is_test_artifact("pkg/mod.py", plain));

    FunctionDecl named = make_decl("m.test_parse", "def test_parse():", "return 1");
    CHECK(is_test_artifact("pkg/mod.py", named));

    // 4 asserts out of 10 statements: density 0.4 >= 0.3
    std::string body;
    FunctionDecl dense;
    dense.qname = "m.checker";
    dense.name = "checker";
    dense.header_text = "def checker(x):";
    dense.full_text = "def checker(x):\n";
    for (int i = 0; i < 4; ++i) dense.full_text += "    assert x > " + std::to_string(i) + "\n";
    for (int i = 0; i < 6; ++i) dense.full_text += "    x = x + " + std::to_string(i) + "\n";
    CHECK(is_test_artifact("pkg/mod.py", dense));
    CHECK(!is_test_artifact("pkg/mod.py", dense, 0.5));
}

TEST_CASE("select targets applies docstring, test and caller policies") {
    const char* lib =
        "def plain(x):\n"
        "    return x\n"
        "\n"
        "def documented(x):\n"
        "    \"\"\"Doubles.\"\"\"\n"
        "    return x * 2\n"
        "\n"
        "def lonely(n):\n"
        "    \"\"\"Recursive only.\"\"\"\n"
        "    return lonely(n - 1)\n"
        "\n"
        "def use(x):\n"
        "    \"\"\"Caller.\"\"\"\n"
        "    a = plain(x)\n"
        "    return documented(a)\n";
    const char* tests_file =
        "from lib import documented\n"
        "def test_documented():\n"
        "    assert documented(1) == 2\n";
    std::vector<FileFacts> files;
    files.push_back(parse_file(lib, "lib.py"));
    files.push_back(parse_file(tests_file, "tests/test_lib.py"));
    Workspace ws(std::move(files));
    CallGraph g = build_call_graph(ws);

    SelectionPolicy policy;
    TargetSelection sel = select_targets(g, ws, policy, "repoA");

    std::set<std::string> chosen;
    for (const auto& t : sel.targets) chosen.insert(t.decl.qname);
    CHECK(chosen == std::set<std::string>{"lib.documented"});

    std::map<std::string, std::string> reasons;
    for (const auto& e : sel.excluded) reasons[e.qname] = e.reason;
    CHECK(reasons["lib.plain"] == "no description");
    CHECK(reasons["lib.lonely"] == "no external caller"); // self-call is not a caller
    CHECK(reasons["tests.test_lib.test_documented"] == "test artifact");

    // the test file never appears as a caller of documented
    REQUIRE(sel.targets.size() == 1);
    for (const auto& c : sel.targets[0].callers) CHECK(c.qname == "lib.use");
}

TEST_CASE("expansion: m callers yield m one-caller instances") {
    for (int m = 1; m <= 6; ++m) {
        TargetFunction t = make_target(m);
        auto instances = expand_instances(t, 1, 7);
        CHECK(instances.size() == static_cast<std::size_t>(m));
        for (const auto& inst : instances) {
            CHECK(inst.caller_snippets.size() == 1);
            CHECK(!inst.short_of_callers);
        }
    }
}

TEST_CASE("expansion: n_train>1 keeps original caller plus distinct extras") {
    TargetFunction t = make_target(3);
    auto instances = expand_instances(t, 2, 42);
    REQUIRE(instances.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& inst = instances[i];
        REQUIRE(inst.caller_qnames.size() == 2);
        CHECK(inst.caller_qnames[0] == t.callers[i].qname); // original first
        std::set<std::string> uniq(inst.caller_qnames.begin(), inst.caller_qnames.end());
        CHECK(uniq.size() == 2); // distinct, sampled without replacement
    }

    // seed determinism: byte-identical serializations across runs
    auto again = expand_instances(t, 2, 42);
    REQUIRE(again.size() == instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i)
        CHECK(again[i].serialized == instances[i].serialized);

    auto different = expand_instances(t, 2, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (different[i].serialized != instances[i].serialized) any_diff = true;
    CHECK(any_diff); // a different seed reshuffles at least one sample
}

TEST_CASE("expansion: fewer callers than n_train flags short") {
    TargetFunction t = make_target(2);
    auto instances = expand_instances(t, 3, 1);
    REQUIRE(instances.size() == 2);
    for (const auto& inst : instances) {
        CHECK(inst.caller_qnames.size() == 2); // all available
        CHECK(inst.short_of_callers);
    }
}

TEST_CASE("serialization matches the pinned layout") {
    TrainingInstance inst;
    inst.header = "def f(x):";
    inst.caller_snippets = {"def g():\n    f(1)"};
    inst.docstring = "adds one";
    CHECK(serialize_instance(inst) ==
          "<func>\ndef f(x):\n<calledby>\ndef g():\n    f(1)\n<docstring>\nadds one\n");

    inst.docstring = "";
    std::string s = serialize_instance(inst);
    CHECK(s.substr(s.size() - 13) == "<docstring>\n\n");
}

TEST_CASE("serialization round-trip recovers fields") {
    std::mt19937 rng(99);
    for (int iter = 0; iter < 200; ++iter) {
        TrainingInstance inst;
        inst.header = "def f_" + std::to_string(iter) + "(a, b=2):";
        int ncallers = 1 + static_cast<int>(rng() % 3);
        for (int c = 0; c < ncallers; ++c) {
            std::string snippet = "def caller" + std::to_string(c) + "():\n";
            snippet += "    x = f_" + std::to_string(iter) + "(1)\n";
            if (rng() % 2) snippet += "\n    y = 2\n"; // internal blank line
            snippet += "    return x";
            inst.caller_snippets.push_back(snippet);
        }
        inst.docstring = (rng() % 3) ? "Does things.\nCarefully." : "";
        std::string text = serialize_instance(inst);

        auto fields = parse_serialized(text);
        CHECK(fields.header == inst.header);
        CHECK(fields.docstring == inst.docstring);
        REQUIRE(fields.callers.size() == inst.caller_snippets.size());
        for (std::size_t i = 0; i < fields.callers.size(); ++i)
            CHECK(fields.callers[i] == inst.caller_snippets[i]);

        // marker discipline: each marker exactly once, in order
        auto count = [&](const std::string& m) {
            std::size_t n = 0;
            for (std::size_t p = 0; (p = text.find(m, p)) != std::string::npos; ++p) ++n;
            return n;
        };
        CHECK(count("<func>") == 1);
        CHECK(count("<calledby>") == 1);
        CHECK(count("<docstring>") == 1);
        CHECK(text.find("<func>") < text.find("<calledby>"));
        CHECK(text.find("<calledby>") < text.find("<docstring>"));
    }
}

TEST_CASE("two-hop augmentation prepends first grandparent deterministically") {
    const char* chain =
        "def f():\n"
        "    \"\"\"target\"\"\"\n"
        "    return 1\n"
        "\n"
        "def b():\n"
        "    \"\"\"mid\"\"\"\n"
        "    return f()\n"
        "\n"
        "def a():\n"
        "    \"\"\"top\"\"\"\n"
        "    return b()\n"
        "\n"
        "def a2():\n"
        "    \"\"\"another top\"\"\"\n"
        "    return b()\n";
    std::vector<FileFacts> files;
    files.push_back(parse_file(chain, "chain.py"));
    Workspace ws(std::move(files));
    CallGraph g = build_call_graph(ws);

    SelectionPolicy policy;
    TargetSelection sel = select_targets(g, ws, policy, "r");
    const TargetFunction* f_target = nullptr;
    const TargetFunction* b_target = nullptr;
    for (const auto& t : sel.targets) {
        if (t.decl.qname == "chain.f") f_target = &t;
        if (t.decl.qname == "chain.b") b_target = &t;
    }
    REQUIRE(f_target != nullptr);
    REQUIRE(b_target != nullptr);

    // f's caller is b; b has two grandparents, a wins by line order
    auto instances = expand_instances(*f_target, 1, 5);
    REQUIRE(instances.size() == 1);
    auto two = augment_two_hop(instances[0], g, ws);
    CHECK(two.hop_depth == 2);
    REQUIRE(two.no_second_hop.size() == 1);
    CHECK(!two.no_second_hop[0]);
    CHECK(two.caller_snippets[0].rfind("def a():", 0) == 0); // diamond tie-break
    CHECK(two.caller_snippets[0].find("def b():") != std::string::npos);

    // b's caller a has no incoming edges: unchanged, flagged
    auto binst = expand_instances(*b_target, 1, 5);
    for (auto& inst : binst) {
        auto btwo = augment_two_hop(inst, g, ws);
        REQUIRE(btwo.no_second_hop.size() == 1);
        CHECK(btwo.no_second_hop[0]);
        CHECK(btwo.caller_snippets[0] == inst.caller_snippets[0]);
    }
}

TEST_CASE("corpus stats use ascending nearest-rank percentiles") {
    auto make_inst = [](std::size_t task, std::size_t target) {
        TrainingInstance i;
        i.task_len = task;
        i.target_len = target;
        i.total_len = task + target;
        return i;
    };

    std::vector<TrainingInstance> one{make_inst(5, 2)};
    LengthStats s1 = corpus_stats(one);
    CHECK(s1.task.mean == 5);
    CHECK(s1.task.median == 5);
    CHECK(s1.task.p99 == 5);
    CHECK(s1.target.p95 == 2);

    std::vector<TrainingInstance> two{make_inst(2, 2), make_inst(4, 4)};
    LengthStats s2 = corpus_stats(two);
    CHECK(s2.task.median == 2); // ceil(0.5 * 2) = 1st ascending
    CHECK(s2.task.p90 == 4);    // ceil(0.9 * 2) = 2nd
    CHECK(s2.task.mean == 3.0);

    std::vector<TrainingInstance> same{make_inst(7, 7), make_inst(7, 7), make_inst(7, 7)};
    LengthStats s3 = corpus_stats(same);
    CHECK(s3.task.median == 7);
    CHECK(s3.task.p90 == 7);
    CHECK(s3.task.p99 == 7);

    CHECK_THROWS_AS(corpus_stats({}), EmptyCorpus);
}

TEST_CASE("token counts add up and markers count toward task length") {
    TargetFunction t = make_target(1);
    auto instances = expand_instances(t, 1, 0);
    REQUIRE(instances.size() == 1);
    const auto& inst = instances[0];
    CHECK(inst.total_len == inst.task_len + inst.target_len);
    CHECK(inst.task_len > 0);
    CHECK(inst.target_len > 0);
}

TEST_CASE("build_corpus dedups identical (target, serialization) pairs") {
    // two byte-identical callers collapse to one instance
    const char* src =
        "def f(x):\n"
        "    \"\"\"doc\"\"\"\n"
        "    return x\n"
        "\n"
        "def g():\n"
        "    \"\"\"c1\"\"\"\n"
        "    return f(1)\n";
    std::vector<FileFacts> files;
    files.push_back(parse_file(src, "m.py"));
    Workspace ws(std::move(files));
    CallGraph g = build_call_graph(ws);
    CorpusBuild b = build_corpus(g, ws, SelectionPolicy{}, "r", 1, false, 3);
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& i : b.instances) CHECK(keys.insert({i.target_qname, i.serialized}).second);
}

TEST_CASE("expansion cardinality equals a counting oracle on random fixtures") {
    std::mt19937 rng(1234);
    for (int iter = 0; iter < 50; ++iter) {
        int m = 1 + static_cast<int>(rng() % 6);
        TargetFunction t = make_target(m);
        std::size_t expected = static_cast<std::size_t>(m); // one per caller
        CHECK(expand_instances(t, 1, iter).size() == expected);
    }
}
