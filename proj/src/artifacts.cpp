#include "callerkit/artifacts.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace callerkit {

using nlohmann::json;

namespace {

// source-derived text is validated UTF-8, but decoded escapes and tool output
// may still surprise; never let serialization throw
std::string dump_line(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

json parse_line(const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw SchemaError("<jsonl>", e.what());
    }
}

Requirement requirement_from_json(const json& j) {
    static const std::map<std::string, Requirement::Kind> kKinds = {
        {"RETURN_SUBSCRIPT", Requirement::ReturnSubscript},
        {"RETURN_ATTR", Requirement::ReturnAttr},
        {"RETURN_METHOD", Requirement::ReturnMethod},
        {"RETURN_ITERATED", Requirement::ReturnIterated},
        {"RETURN_TRUTH_TEST", Requirement::ReturnTruthTest},
        {"RETURN_COMPARED", Requirement::ReturnCompared},
        {"RETURN_UNPACKED", Requirement::ReturnUnpacked},
        {"RAISES_HANDLED", Requirement::RaisesHandled},
        {"ARG_SHAPE", Requirement::ArgShape}};
    Requirement r;
    auto it = kKinds.find(j.value("kind", ""));
    if (it == kKinds.end()) throw SchemaError("requirement.kind", j.value("kind", ""));
    r.kind = it->second;
    r.param = j.value("param", "");
    r.evidence = j.value("evidence", "");
    return r;
}

json requirement_to_json(const Requirement& r) {
    static const char* kNames[] = {"RETURN_SUBSCRIPT", "RETURN_ATTR",     "RETURN_METHOD",
                                   "RETURN_ITERATED",  "RETURN_TRUTH_TEST", "RETURN_COMPARED",
                                   "RETURN_UNPACKED",  "RAISES_HANDLED",  "ARG_SHAPE"};
    return json{{"kind", kNames[static_cast<int>(r.kind)]},
                {"param", r.param},
                {"evidence", r.evidence}};
}

} // namespace

std::string instance_to_json(const TrainingInstance& inst) {
    json j{{"id", inst.id},
           {"repo", inst.repo_id},
           {"target_qname", inst.target_qname},
           {"header", inst.header},
           {"callers", inst.caller_snippets},
           {"caller_qnames", inst.caller_qnames},
           {"docstring", inst.docstring},
           {"body", inst.body},
           {"serialized", inst.serialized},
           {"hop_depth", inst.hop_depth},
           {"short_of_callers", inst.short_of_callers},
           {"token_counts",
            {{"task", inst.task_len}, {"target", inst.target_len}, {"total", inst.total_len}}}};
    if (!inst.caller_call_names.empty()) {
        json names = json::array();
        for (const auto& ns : inst.caller_call_names) names.push_back(ns);
        j["caller_call_names"] = names;
    }
    if (!inst.no_second_hop.empty()) {
        json flags = json::array();
        for (bool b : inst.no_second_hop) flags.push_back(b);
        j["no_second_hop"] = flags;
    }
    return dump_line(j);
}

TrainingInstance instance_from_json(const std::string& line) {
    json j = parse_line(line);
    TrainingInstance inst;
    inst.id = j.value("id", "");
    inst.repo_id = j.value("repo", "");
    inst.target_qname = j.value("target_qname", "");
    inst.header = j.value("header", "");
    inst.docstring = j.value("docstring", "");
    inst.body = j.value("body", "");
    inst.serialized = j.value("serialized", "");
    inst.hop_depth = j.value("hop_depth", 1);
    inst.short_of_callers = j.value("short_of_callers", false);
    if (j.contains("callers"))
        for (const auto& c : j["callers"]) inst.caller_snippets.push_back(c.get<std::string>());
    if (j.contains("caller_qnames"))
        for (const auto& c : j["caller_qnames"]) inst.caller_qnames.push_back(c.get<std::string>());
    if (j.contains("caller_call_names"))
        for (const auto& ns : j["caller_call_names"]) {
            std::vector<std::string> names;
            for (const auto& n : ns) names.push_back(n.get<std::string>());
            inst.caller_call_names.push_back(std::move(names));
        }
    if (j.contains("no_second_hop"))
        for (const auto& b : j["no_second_hop"]) inst.no_second_hop.push_back(b.get<bool>());
    if (j.contains("token_counts")) {
        inst.task_len = j["token_counts"].value("task", 0u);
        inst.target_len = j["token_counts"].value("target", 0u);
        inst.total_len = j["token_counts"].value("total", 0u);
    }
    return inst;
}

std::string task_to_json(const BenchmarkTask& task) {
    json patterns = json::array();
    for (const auto& p : task.patterns) {
        json reqs = json::array();
        for (const auto& r : p.requirements) reqs.push_back(requirement_to_json(r));
        patterns.push_back(json{{"id", p.id}, {"members", p.members}, {"requirements", reqs}});
    }
    json sketch = json::array();
    for (const auto& r : task.sketch.requirements) sketch.push_back(requirement_to_json(r));
    json drivers = json::array();
    for (const auto& d : task.drivers) {
        drivers.push_back(json{{"path", d.path},
                               {"text", d.text},
                               {"covers", d.covered_requirements},
                               {"evidence", d.evidence}});
    }
    json call_names = json::array();
    for (const auto& ns : task.caller_call_names) call_names.push_back(ns);
    json j{{"task_id", task.task_id},
           {"repo", task.repo_id},
           {"caller_call_names", call_names},
           {"target",
            {{"qname", task.target_qname},
             {"header", task.header},
             {"body", task.body},
             {"docstring", task.docstring}}},
           {"callers", task.callers},
           {"patterns", patterns},
           {"sketch", sketch},
           {"drivers", drivers}};
    return dump_line(j);
}

BenchmarkTask task_from_json(const std::string& line) {
    json j = parse_line(line);
    BenchmarkTask t;
    t.task_id = j.value("task_id", "");
    t.repo_id = j.value("repo", "");
    if (j.contains("target")) {
        t.target_qname = j["target"].value("qname", "");
        t.header = j["target"].value("header", "");
        t.body = j["target"].value("body", "");
        t.docstring = j["target"].value("docstring", "");
    }
    if (j.contains("callers"))
        for (const auto& c : j["callers"]) t.callers.push_back(c.get<std::string>());
    if (j.contains("caller_call_names"))
        for (const auto& ns : j["caller_call_names"]) {
            std::vector<std::string> names;
            for (const auto& n : ns) names.push_back(n.get<std::string>());
            t.caller_call_names.push_back(std::move(names));
        }
    if (j.contains("patterns")) {
        for (const auto& p : j["patterns"]) {
            UsagePattern up;
            up.id = p.value("id", "");
            if (p.contains("members"))
                for (const auto& m : p["members"]) up.members.push_back(m.get<std::size_t>());
            if (p.contains("requirements"))
                for (const auto& r : p["requirements"])
                    up.requirements.push_back(requirement_from_json(r));
            t.patterns.push_back(std::move(up));
        }
    }
    if (j.contains("sketch"))
        for (const auto& r : j["sketch"])
            t.sketch.requirements.push_back(requirement_from_json(r));
    if (j.contains("drivers")) {
        for (const auto& d : j["drivers"]) {
            DriverScript ds;
            ds.path = d.value("path", "");
            ds.text = d.value("text", "");
            if (d.contains("covers"))
                for (const auto& c : d["covers"])
                    ds.covered_requirements.push_back(c.get<std::string>());
            if (d.contains("evidence"))
                for (const auto& e : d["evidence"]) ds.evidence.push_back(e.get<std::string>());
            t.drivers.push_back(std::move(ds));
        }
    }
    return t;
}

std::string candidate_to_json(const Candidate& cand) {
    return dump_line(json{{"task_id", cand.task_id},
                          {"sample_index", cand.sample_index},
                          {"code", cand.code}});
}

Candidate candidate_from_json(const std::string& line) {
    json j = parse_line(line);
    Candidate c;
    c.task_id = j.value("task_id", "");
    c.sample_index = j.value("sample_index", 0);
    c.code = j.value("code", "");
    return c;
}

MetricPair pair_from_json(const std::string& line) {
    json j = parse_line(line);
    MetricPair p;
    p.id = j.value("id", "");
    p.candidate = j.value("candidate", "");
    p.reference = j.value("reference", "");
    return p;
}

std::vector<std::string> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.find("\"_provenance\"") != std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

void write_jsonl(const std::string& path, const std::string& provenance,
                 const std::vector<std::string>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << provenance;
    for (const auto& r : records) out << r << "\n";
}

} // namespace callerkit
