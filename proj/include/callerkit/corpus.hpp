#pragma once

#include "callerkit/callgraph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace callerkit {

struct CallerContext {
    std::string qname;
    std::string module_path;
    int start_line = 0;
    std::string snippet; // complete function text, header included
    std::vector<std::string> call_names; // names this caller invokes the target by
};

struct TargetFunction {
    FunctionDecl decl; // owned copy
    std::string module_path;
    std::string repo_id;
    std::vector<CallerContext> callers; // deterministic (path, line) order
};

struct TrainingInstance {
    std::string id;
    std::string repo_id;
    std::string target_qname;
    std::string header;    // h
    std::string docstring; // d ("" when absent)
    std::string body;      // y, the generation target
    std::vector<std::string> caller_qnames;
    std::vector<std::string> caller_snippets; // c, original caller first
    std::vector<std::vector<std::string>> caller_call_names; // parallel to snippets
    int hop_depth = 1;
    bool short_of_callers = false;
    std::vector<bool> no_second_hop; // parallel to snippets after two-hop
    std::string serialized;          // x
    std::size_t task_len = 0;
    std::size_t target_len = 0;
    std::size_t total_len = 0;
};

struct SelectionPolicy {
    bool require_docstring = true;  // drop description-less functions
    bool require_complete = true;   // drop pass/... stubs
    double assertion_density_threshold = 0.3;
};

struct ExclusionRecord {
    std::string qname;
    std::string reason;
};

struct TargetSelection {
    std::vector<TargetFunction> targets;
    std::vector<ExclusionRecord> excluded;
};

// True for test files (*/tests/*, test_*.py, *_test.py), test_* functions and
// assertion-dense bodies.
bool is_test_artifact(const std::string& module_path, const FunctionDecl& decl,
                      double assertion_density_threshold = 0.3);

// Targets with a docstring (policy-toggleable), a complete body, and at least
// one non-test, non-self caller. Exclusion reasons are recorded per function.
TargetSelection select_targets(const CallGraph& graph, const Workspace& ws,
                               const SelectionPolicy& policy, const std::string& repo_id);

// n_train=1: one instance per caller. n_train>1: each instance keeps its
// original caller and samples (n_train-1) distinct extras, seed-deterministic;
// instances with fewer available callers use all and are flagged short.
std::vector<TrainingInstance> expand_instances(const TargetFunction& target, int n_train,
                                               std::uint64_t seed);

// Prepends the first (path, line)-ordered caller-of-the-caller to each
// snippet; the target itself and test artifacts never serve as second hops.
TrainingInstance augment_two_hop(TrainingInstance instance, const CallGraph& graph,
                                 const Workspace& ws);

// Pinned marker layout shared by training serialization and prompt rendering.
std::string serialize_fields(const std::string& header, const std::vector<std::string>& callers,
                             const std::string& docstring);

std::string serialize_instance(const TrainingInstance& instance);

struct SerializedFields {
    std::string header;
    std::vector<std::string> callers;
    std::string docstring;
};
// Inverse of serialize_instance; throws ParseFailure on malformed layout.
SerializedFields parse_serialized(const std::string& text);

// Recomputes serialized text and token counts in place.
void finalize_instance(TrainingInstance& instance);

struct LengthColumn {
    double mean = 0, median = 0, p90 = 0, p95 = 0, p99 = 0;
};
struct LengthStats {
    LengthColumn task;   // h + c + d + markers
    LengthColumn target; // y
    LengthColumn total;
};

// Nearest-rank percentiles over the shared code tokenizer's counts.
LengthStats corpus_stats(const std::vector<TrainingInstance>& instances);

std::string format_stats_table(const LengthStats& stats);

struct CorpusBuild {
    std::vector<TrainingInstance> instances;
    std::vector<ExclusionRecord> excluded;
    std::size_t deduped = 0;
};

// Full pipeline for one repository: select, expand, optional two-hop,
// serialize, dedup on (target qname, serialized).
CorpusBuild build_corpus(const CallGraph& graph, const Workspace& ws,
                         const SelectionPolicy& policy, const std::string& repo_id,
                         int n_train, bool two_hop, std::uint64_t seed);

} // namespace callerkit
