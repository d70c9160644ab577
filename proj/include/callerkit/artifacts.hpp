#pragma once

#include "callerkit/bench.hpp"
#include "callerkit/corpus.hpp"
#include "callerkit/evalharness.hpp"

#include <string>
#include <vector>

namespace callerkit {

// JSON-lines serialization for the pipeline artifacts. Readers skip the
// provenance header line; writers expect the caller to prepend it.

std::string instance_to_json(const TrainingInstance& inst);
TrainingInstance instance_from_json(const std::string& line);

std::string task_to_json(const BenchmarkTask& task);
BenchmarkTask task_from_json(const std::string& line);

std::string candidate_to_json(const Candidate& cand);
Candidate candidate_from_json(const std::string& line);

struct MetricPair {
    std::string id;
    std::string candidate;
    std::string reference;
};
MetricPair pair_from_json(const std::string& line);

// Reads all records of a JSON-lines file, skipping the provenance line.
std::vector<std::string> read_jsonl(const std::string& path);

void write_jsonl(const std::string& path, const std::string& provenance,
                 const std::vector<std::string>& records);

} // namespace callerkit
