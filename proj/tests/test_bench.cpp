#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "callerkit/bench.hpp"

#include <set>

using namespace callerkit;

namespace {

CallSiteContext ctx(const std::string& caller_text, int site = 0) {
    return CallSiteContext{caller_text, "src/caller.py", {"f"}, site};
}

std::set<std::string> req_ids(const std::vector<Requirement>& reqs) {
    std::set<std::string> ids;
    for (const auto& r : reqs) ids.insert(r.id());
    return ids;
}

SiteRequirements site_with(std::vector<Requirement> reqs, const std::string& ref = "p:1") {
    return SiteRequirements{ref, std::move(reqs)};
}

Requirement req(Requirement::Kind k, const std::string& param = "") {
    Requirement r;
    r.kind = k;
    r.param = param;
    r.evidence = "p:1";
    return r;
}

} // namespace

TEST_CASE("requirements: returned-dict subscript plus arg shape") {
    auto reqs = extract_requirements(
        ctx("def g(u):\n    cfg = f(u)\n    lang = cfg[\"language\"]\n    return lang\n"));
    CHECK(req_ids(reqs) ==
          std::set<std::string>{"RETURN_SUBSCRIPT(language)", "ARG_SHAPE(1)"});
    for (const auto& r : reqs) CHECK(r.evidence.rfind("src/caller.py:", 0) == 0);
}

TEST_CASE("requirements: bare call has only the arg shape") {
    auto reqs = extract_requirements(ctx("def g():\n    f()\n"));
    CHECK(req_ids(reqs) == std::set<std::string>{"ARG_SHAPE(0)"});
}

TEST_CASE("requirements: tuple unpacking records arity") {
    auto reqs = extract_requirements(ctx("def g(x):\n    a, b = f(x)\n    return a\n"));
    CHECK(req_ids(reqs) == std::set<std::string>{"RETURN_UNPACKED(2)", "ARG_SHAPE(1)"});
}

TEST_CASE("requirements: method, attribute, iteration, truth, comparison") {
    auto m = extract_requirements(ctx("def g():\n    r = f()\n    r.save()\n"));
    CHECK(m.size() == 2);
    CHECK(req_ids(m).count("RETURN_METHOD(save)") == 1);

    auto a = extract_requirements(ctx("def g():\n    r = f()\n    return r.name\n"));
    CHECK(req_ids(a).count("RETURN_ATTR(name)") == 1);

    auto it = extract_requirements(ctx("def g():\n    for x in f():\n        use(x)\n"));
    CHECK(req_ids(it).count("RETURN_ITERATED") == 1);

    auto t = extract_requirements(ctx("def g():\n    r = f()\n    if r:\n        go()\n"));
    CHECK(req_ids(t).count("RETURN_TRUTH_TEST") == 1);

    auto c = extract_requirements(ctx("def g():\n    r = f()\n    if r == 3:\n        go()\n"));
    CHECK(req_ids(c).count("RETURN_COMPARED(3)") == 1);
}

TEST_CASE("requirements: handled exception around the call") {
    auto reqs = extract_requirements(ctx(
        "def g(u):\n"
        "    try:\n"
        "        r = f(u)\n"
        "    except KeyError:\n"
        "        r = None\n"
        "    return r\n"));
    CHECK(req_ids(reqs).count("RAISES_HANDLED(KeyError)") == 1);

    // a call in the handler itself is not protected by it
    auto in_handler = extract_requirements(ctx(
        "def g(u):\n"
        "    try:\n"
        "        r = other(u)\n"
        "    except KeyError:\n"
        "        r = f(u)\n"
        "    return r\n"));
    CHECK(req_ids(in_handler).count("RAISES_HANDLED(KeyError)") == 0);
}

TEST_CASE("requirements: keyword names appear in the arg shape") {
    auto reqs = extract_requirements(ctx("def g():\n    f(1, 2, mode=\"x\", safe=True)\n"));
    CHECK(req_ids(reqs) == std::set<std::string>{"ARG_SHAPE(2:mode,safe)"});
}

TEST_CASE("requirements: kill ends attribution to the result") {
    auto reqs = extract_requirements(
        ctx("def g():\n    r = f()\n    r = 0\n    r.save()\n"));
    CHECK(req_ids(reqs).count("RETURN_METHOD(save)") == 0);
}

TEST_CASE("grouping: identical subscript sites merge") {
    auto p = group_usage_patterns({
        site_with({req(Requirement::ReturnSubscript, "language"), req(Requirement::ArgShape, "1")}),
        site_with({req(Requirement::ReturnSubscript, "language"), req(Requirement::ArgShape, "1")}),
    });
    REQUIRE(p.size() == 1);
    CHECK(p[0].members.size() == 2);
    CHECK(p[0].id == "U1");
}

TEST_CASE("grouping: conflicting unpack arity separates") {
    auto p = group_usage_patterns({
        site_with({req(Requirement::ReturnUnpacked, "2")}),
        site_with({req(Requirement::ReturnUnpacked, "3")}),
    });
    CHECK(p.size() == 2);
}

TEST_CASE("grouping: spec three-site example yields two patterns") {
    auto p = group_usage_patterns({
        site_with({req(Requirement::ReturnSubscript, "k"), req(Requirement::ArgShape, "1")}),
        site_with({req(Requirement::ReturnSubscript, "k"), req(Requirement::ReturnTruthTest),
                   req(Requirement::ArgShape, "1")}),
        site_with({req(Requirement::ReturnMethod, "save"), req(Requirement::ArgShape, "1")}),
    });
    REQUIRE(p.size() == 2);
    CHECK(p[0].members == std::vector<std::size_t>{0, 1});
    CHECK(p[1].members == std::vector<std::size_t>{2});
}

TEST_CASE("pattern requirements equal the exact member union") {
    std::vector<SiteRequirements> sites{
        site_with({req(Requirement::ReturnSubscript, "a"), req(Requirement::ArgShape, "1")}),
        site_with({req(Requirement::ReturnSubscript, "a"), req(Requirement::ReturnTruthTest)}),
        site_with({req(Requirement::ReturnMethod, "m")}),
        site_with({req(Requirement::ReturnMethod, "m"), req(Requirement::ArgShape, "2")}),
    };
    auto patterns = group_usage_patterns(sites);

    // brute-force union per pattern
    for (const auto& pat : patterns) {
        std::set<std::string> expected;
        for (auto mi : pat.members)
            for (const auto& r : sites[mi].requirements) expected.insert(r.id());
        CHECK(req_ids(pat.requirements) == expected);
    }

    // every site lands in exactly one pattern
    std::set<std::size_t> seen;
    for (const auto& pat : patterns)
        for (auto mi : pat.members) CHECK(seen.insert(mi).second);
    CHECK(seen.size() == sites.size());

    // sketch equals the union over patterns
    BehaviorSketch sketch = behavior_sketch(patterns);
    std::set<std::string> all;
    for (const auto& s : sites)
        for (const auto& r : s.requirements) all.insert(r.id());
    CHECK(req_ids(sketch.requirements) == all);
    std::size_t sum = 0;
    for (const auto& pat : patterns) sum += pat.requirements.size();
    CHECK(sketch.requirements.size() <= sum);
}

TEST_CASE("lint flags C1, C2, C3 and the scenario cap") {
    BenchmarkTask task;
    task.task_id = "t";
    task.target_qname = "m.f";
    UsagePattern u1;
    u1.id = "U1";
    u1.members = {0};
    u1.requirements = {req(Requirement::ReturnSubscript, "k"), req(Requirement::ArgShape, "1")};
    UsagePattern u2;
    u2.id = "U2";
    u2.members = {1};
    u2.requirements = {req(Requirement::ReturnMethod, "save")};
    task.patterns = {u1, u2};
    task.sketch = behavior_sketch(task.patterns);

    DriverScript d1;
    d1.path = "driver_0.py";
    d1.text = "assert f(1)[\"k\"] == 2  # evidence: src/a.py:3\n";
    d1.covered_requirements = {"RETURN_SUBSCRIPT(k)", "ARG_SHAPE(1)"};
    d1.evidence = {"src/a.py:3"};
    task.drivers = {d1};

    // U2 uncovered, RETURN_METHOD uncovered
    CoverageReport r1 = lint_suite(task);
    CHECK(!r1.pass());
    CHECK(r1.uncovered_patterns == std::vector<std::string>{"U2"});
    CHECK(r1.uncovered_requirements == std::vector<std::string>{"RETURN_METHOD(save)"});
    CHECK(r1.unannotated_assertions.empty());

    // add an unannotated assertion: C3 violation with the line number
    DriverScript d2;
    d2.path = "driver_1.py";
    d2.text = "r = f(1)\nassert r.save() is None\n";
    d2.covered_requirements = {"RETURN_METHOD(save)"};
    task.drivers.push_back(d2);
    CoverageReport r2 = lint_suite(task);
    CHECK(r2.uncovered_patterns.empty());
    CHECK(r2.uncovered_requirements.empty());
    CHECK(r2.unannotated_assertions == std::vector<std::string>{"driver_1.py:2"});

    // repair the annotation: lint passes
    task.drivers[1].text = "r = f(1)\nassert r.save() is None  # evidence: src/b.py:9\n";
    CoverageReport r3 = lint_suite(task);
    CHECK(r3.pass());

    // cap: six drivers exceed the five-scenario budget
    for (int i = 0; i < 4; ++i) task.drivers.push_back(task.drivers[0]);
    CHECK(task.drivers.size() == 6);
    CHECK(lint_suite(task).cap_exceeded);
}

TEST_CASE("normalize_driver wraps a fragment into an exit-code script") {
    DriverScript d = normalize_driver("assert f(2) == 4  # evidence: src/m.py:7", "pkg.m.f",
                                      {"from candidate import f"});
    CHECK(d.text.find("import sys") == 0);
    CHECK(d.text.find("from candidate import f") != std::string::npos);
    CHECK(d.text.find("def main():") != std::string::npos);
    CHECK(d.text.find("    assert f(2) == 4") != std::string::npos);
    CHECK(d.text.find("sys.exit(1)") != std::string::npos);
    CHECK(d.text.find("sys.exit(0)") != std::string::npos);
    REQUIRE(d.evidence.size() == 1);
    CHECK(d.evidence[0] == "src/m.py:7");
}

TEST_CASE("normalize_driver rejects free names and missing target calls") {
    try {
        normalize_driver("assert f(fixture_db) == 1", "m.f", {"from candidate import f"});
        FAIL("expected FragmentParseError");
    } catch (const FragmentParseError& e) {
        REQUIRE(e.free_names().size() == 1);
        CHECK(e.free_names()[0] == "fixture_db");
    }
    CHECK_THROWS_AS(normalize_driver("assert g(2) == 4", "m.f", {"from candidate import f"}),
                    NoTargetCall);
    CHECK_THROWS_AS(normalize_driver("assert f(2 == ", "m.f", {}), FragmentParseError);
}

TEST_CASE("synthesized minimal invocations follow the placeholder table") {
    FunctionDecl fd;
    fd.name = "f";
    fd.qname = "m.f";
    fd.params = {{"n", "int", "", ParamInfo::Plain}, {"s", "str", "'a'", ParamInfo::Plain}};
    CHECK(synthesize_minimal_invocation(fd) == "def _use_f():\n    _r = f(0)\n");

    FunctionDecl zero;
    zero.name = "f";
    zero.qname = "m.f";
    CHECK(synthesize_minimal_invocation(zero) == "def _use_f():\n    _r = f()\n");

    FunctionDecl method;
    method.name = "m";
    method.qname = "p.C.m";
    method.is_method = true;
    method.params = {{"self", "", "", ParamInfo::Plain}, {"x", "", "", ParamInfo::Plain}};
    std::string snippet = synthesize_minimal_invocation(method);
    CHECK(snippet.find("obj.m(None)") != std::string::npos);
    CHECK(snippet.find("#") != std::string::npos); // receiver note

    FunctionDecl rich;
    rich.name = "f";
    rich.qname = "m.f";
    rich.params = {{"xs", "list", "", ParamInfo::Plain},
                   {"opts", "dict", "", ParamInfo::Plain},
                   {"flag", "bool", "", ParamInfo::Plain},
                   {"rest", "", "", ParamInfo::Star}};
    CHECK(synthesize_minimal_invocation(rich) ==
          "def _use_f():\n    _r = f([], {}, False)\n");
}
