#pragma once

#include "callerkit/symbols.hpp"

#include <map>
#include <string>
#include <vector>

namespace callerkit {

struct GraphEdge {
    std::string caller;
    std::string callee;
    std::string file; // caller's module path
    int line = 0;
    int col = 0;
    enum Kind { Intra, Inter, Ambiguous } kind = Intra;
    std::size_t site_index = 0; // index into the caller file's calls vector
    std::size_t file_index = 0; // index into the workspace's files vector
};

struct GraphDiagnostics {
    std::size_t resolved_sites = 0;
    std::size_t ambiguous_sites = 0;
    std::size_t external_sites = 0;
    std::size_t unresolved_sites = 0;
    std::size_t invalid_files = 0;
    std::map<std::string, std::size_t> unresolved_reasons;
};

struct CallGraph {
    std::vector<std::string> nodes;        // sorted function qnames
    std::vector<GraphEdge> calls_edges;    // deterministic order
    std::vector<GraphEdge> calledby_edges; // exact transpose, edge for edge
    GraphDiagnostics diags;

    std::map<std::string, std::vector<std::size_t>> out_by_caller;
    std::map<std::string, std::vector<std::size_t>> in_by_callee;

    bool has_node(const std::string& qname) const;
};

// One edge per resolved call site; ambiguous resolutions contribute one edge
// per candidate, flagged Ambiguous. calledby mirrors calls edge-for-edge.
CallGraph build_call_graph(const Workspace& ws);

struct CallerRef {
    std::string caller_qname;
    std::string module_path;
    const FunctionDecl* decl = nullptr; // owned by the workspace
    std::vector<CallSite> sites;        // this caller's sites on the target

    const std::string& snippet() const { return decl->full_text; }
};

// One-hop callers of `target`, ordered by (module path, start line).
// Recursive self-callers are included; corpus policy filters them later.
std::vector<CallerRef> direct_callers(const CallGraph& graph, const Workspace& ws,
                                      const std::string& target);

enum class HitCounting { AllCandidates, FirstCandidate };

// Distinct call-site hit count for a target under the chosen ambiguity mode.
std::size_t call_site_hits(const CallGraph& graph, const std::string& target, HitCounting mode);

// JSON-lines export, one record per edge; byte-identical across runs.
std::string export_edges_jsonl(const CallGraph& graph);
std::string export_diagnostics_json(const CallGraph& graph);

} // namespace callerkit
