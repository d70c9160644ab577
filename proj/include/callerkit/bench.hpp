#pragma once

#include "callerkit/facts.hpp"
#include "callerkit/variants.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace callerkit {

struct Requirement {
    enum Kind {
        ReturnSubscript, // param: key
        ReturnAttr,      // param: attribute name
        ReturnMethod,    // param: method name
        ReturnIterated,
        ReturnTruthTest,
        ReturnCompared, // param: literal text
        ReturnUnpacked, // param: arity
        RaisesHandled,  // param: exception name
        ArgShape        // param: "arity[:kw1,kw2]"
    } kind = ArgShape;
    std::string param;
    std::string evidence; // "path:line" of the caller statement

    std::string id() const;
    bool operator<(const Requirement& o) const;
    bool operator==(const Requirement& o) const;
};

// One call site plus enough caller context to derive requirements.
struct CallSiteContext {
    std::string caller_text; // complete caller function
    std::string caller_path; // evidence file
    std::vector<std::string> target_names;
    int site_index = 0; // which target call site within the caller (source order)
};

// Observable semantic requirements induced by this call site: argument shape
// plus subscripts, attributes, method calls, iteration, truth tests,
// comparisons, unpacking and handled exceptions over the result.
std::vector<Requirement> extract_requirements(const CallSiteContext& ctx);

struct UsagePattern {
    std::string id; // "U1", "U2", ...
    std::vector<std::size_t> members;   // indices into the site list
    std::vector<Requirement> requirements; // exact union of member sets
};

struct SiteRequirements {
    std::string site_ref; // "path:line"
    std::vector<Requirement> requirements;
};

// Greedy grouping in site order: a site joins the first compatible pattern
// sharing at least one requirement, else opens a new one.
std::vector<UsagePattern> group_usage_patterns(const std::vector<SiteRequirements>& sites);

struct BehaviorSketch {
    std::vector<Requirement> requirements; // union over patterns, stable order
};

BehaviorSketch behavior_sketch(const std::vector<UsagePattern>& patterns);

struct DriverScript {
    std::string path; // e.g. "driver_0.py"
    std::string text; // main()-style script, exit 0 on success
    std::vector<std::string> covered_requirements; // requirement ids
    std::vector<std::string> evidence;             // "path:line" annotations
};

struct BenchmarkTask {
    std::string task_id;
    std::string repo_id;
    std::string target_qname;
    std::string header;
    std::string body;
    std::string docstring; // doubles as the NL description
    std::vector<std::string> callers;
    std::vector<std::vector<std::string>> caller_call_names; // parallel to callers
    std::vector<UsagePattern> patterns;
    BehaviorSketch sketch;
    std::vector<DriverScript> drivers;
};

struct CoverageReport {
    std::vector<std::string> uncovered_patterns;     // C1 violations
    std::vector<std::string> uncovered_requirements; // C2 violations
    std::vector<std::string> unannotated_assertions; // C3 violations ("driver:line")
    bool cap_exceeded = false;                       // more than five scenarios

    bool pass() const {
        return uncovered_patterns.empty() && uncovered_requirements.empty() &&
               unannotated_assertions.empty() && !cap_exceeded;
    }
};

// C1 usage-pattern coverage, C2 behavior-requirement coverage, C3
// evidence-grounded assertions, and the five-scenario cap.
CoverageReport lint_suite(const BenchmarkTask& task);

// Wraps a test fragment into a self-contained main()-style driver with the
// given imports; exit code 0 on success, 1 on assertion failure.
DriverScript normalize_driver(const std::string& fragment, const std::string& target_qname,
                              const std::vector<std::string>& imports);

// Tiny caller invoking the target with placeholder arguments derived from
// annotations and defaults; methods get a commented, unconstructed receiver.
std::string synthesize_minimal_invocation(const FunctionDecl& decl);

std::string format_coverage_report(const CoverageReport& report);

} // namespace callerkit
