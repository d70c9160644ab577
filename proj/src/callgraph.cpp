#include "callerkit/callgraph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

namespace callerkit {

using nlohmann::json;

bool CallGraph::has_node(const std::string& qname) const {
    return std::binary_search(nodes.begin(), nodes.end(), qname);
}

CallGraph build_call_graph(const Workspace& ws) {
    CallGraph g;
    for (const auto& f : ws.files()) {
        if (!f.valid) {
            ++g.diags.invalid_files;
            continue;
        }
        for (const auto& fn : f.functions) g.nodes.push_back(fn.qname);
    }
    std::sort(g.nodes.begin(), g.nodes.end());
    g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());

    const auto& files = ws.files();
    for (std::size_t fi = 0; fi < files.size(); ++fi) {
        const FileFacts& f = files[fi];
        if (!f.valid) continue;
        for (std::size_t si = 0; si < f.calls.size(); ++si) {
            const CallSite& site = f.calls[si];
            Resolution r = ws.resolve_call(site);
            switch (r.kind) {
            case ResolutionKind::External:
                ++g.diags.external_sites;
                break;
            case ResolutionKind::Unresolved:
                ++g.diags.unresolved_sites;
                ++g.diags.unresolved_reasons[r.detail.empty() ? "other" : r.detail];
                break;
            case ResolutionKind::Resolved: {
                ++g.diags.resolved_sites;
                if (r.ambiguous()) ++g.diags.ambiguous_sites;
                for (const auto& callee : r.qnames) {
                    GraphEdge e;
                    e.caller = site.caller_qname;
                    e.callee = callee;
                    e.file = f.module_path;
                    e.line = site.line;
                    e.col = site.col;
                    e.site_index = si;
                    e.file_index = fi;
                    const FileFacts* callee_file = ws.file_of_function(callee);
                    bool inter = !callee_file || callee_file->module_path != f.module_path;
                    e.kind = r.ambiguous() ? GraphEdge::Ambiguous
                                           : (inter ? GraphEdge::Inter : GraphEdge::Intra);
                    g.calls_edges.push_back(std::move(e));
                }
                break;
            }
            }
        }
    }

    std::stable_sort(g.calls_edges.begin(), g.calls_edges.end(),
                     [](const GraphEdge& a, const GraphEdge& b) {
                         return std::tie(a.file, a.line, a.col, a.callee, a.caller) <
                                std::tie(b.file, b.line, b.col, b.callee, b.caller);
                     });

    g.calledby_edges.reserve(g.calls_edges.size());
    for (std::size_t i = 0; i < g.calls_edges.size(); ++i) {
        GraphEdge mirror = g.calls_edges[i];
        std::swap(mirror.caller, mirror.callee);
        g.calledby_edges.push_back(std::move(mirror));
        g.out_by_caller[g.calls_edges[i].caller].push_back(i);
        g.in_by_callee[g.calls_edges[i].callee].push_back(i);
    }
    return g;
}

std::vector<CallerRef> direct_callers(const CallGraph& graph, const Workspace& ws,
                                      const std::string& target) {
    std::vector<CallerRef> out;
    auto it = graph.in_by_callee.find(target);
    if (it == graph.in_by_callee.end()) return out;

    std::map<std::string, CallerRef> by_caller;
    std::set<std::pair<std::string, std::pair<int, int>>> seen_sites;
    for (std::size_t ei : it->second) {
        const GraphEdge& e = graph.calls_edges[ei];
        auto& ref = by_caller[e.caller];
        if (!ref.decl) {
            ref.caller_qname = e.caller;
            ref.decl = ws.function(e.caller);
            const FileFacts* f = ws.file_of_function(e.caller);
            ref.module_path = f ? f->module_path : "";
        }
        const FileFacts& f = ws.files()[e.file_index];
        // candidate fan-out duplicates the site; keep one payload per location
        if (seen_sites.insert({e.caller, {e.line, e.col}}).second)
            ref.sites.push_back(f.calls[e.site_index]);
    }

    for (auto& [q, ref] : by_caller) {
        if (!ref.decl) continue;
        std::sort(ref.sites.begin(), ref.sites.end(), [](const CallSite& a, const CallSite& b) {
            return std::tie(a.line, a.col) < std::tie(b.line, b.col);
        });
        out.push_back(std::move(ref));
    }
    std::sort(out.begin(), out.end(), [](const CallerRef& a, const CallerRef& b) {
        return std::tie(a.module_path, a.decl->start_line) <
               std::tie(b.module_path, b.decl->start_line);
    });
    return out;
}

std::size_t call_site_hits(const CallGraph& graph, const std::string& target, HitCounting mode) {
    auto it = graph.in_by_callee.find(target);
    if (it == graph.in_by_callee.end()) return 0;
    if (mode == HitCounting::AllCandidates) return it->second.size();
    std::set<std::tuple<std::string, int, int>> sites;
    for (std::size_t ei : it->second) {
        const GraphEdge& e = graph.calls_edges[ei];
        sites.insert({e.file, e.line, e.col});
    }
    return sites.size();
}

std::string export_edges_jsonl(const CallGraph& graph) {
    std::string out;
    for (const auto& e : graph.calls_edges) {
        json rec{{"caller", e.caller},
                 {"callee", e.callee},
                 {"file", e.file},
                 {"line", e.line},
                 {"col", e.col},
                 {"kind", e.kind == GraphEdge::Intra ? "intra"
                          : e.kind == GraphEdge::Inter ? "inter"
                                                       : "ambiguous"}};
        out += rec.dump();
        out += "\n";
    }
    return out;
}

std::string export_diagnostics_json(const CallGraph& graph) {
    json reasons = json::object();
    for (const auto& [k, v] : graph.diags.unresolved_reasons) reasons[k] = v;
    json d{{"resolved_sites", graph.diags.resolved_sites},
           {"ambiguous_sites", graph.diags.ambiguous_sites},
           {"external_sites", graph.diags.external_sites},
           {"unresolved_sites", graph.diags.unresolved_sites},
           {"invalid_files", graph.diags.invalid_files},
           {"unresolved_reasons", reasons},
           {"nodes", graph.nodes.size()},
           {"edges", graph.calls_edges.size()}};
    return d.dump(2) + "\n";
}

} // namespace callerkit
