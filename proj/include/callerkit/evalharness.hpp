#pragma once

#include "callerkit/bench.hpp"

#include <map>
#include <string>
#include <vector>

namespace callerkit {

struct Candidate {
    std::string task_id;
    int sample_index = 0;
    std::string code; // full function, header included
};

struct Limits {
    double wall_s = 10.0;
    std::size_t mem_mb = 512;
    bool no_network = true;
};

struct SandboxConfig {
    enum Backend { Proc, Container } backend = Proc;
    std::string container_image = "python:3.11-slim";
    std::string container_cmd = "docker";
    std::string interpreter = "python3";
    Limits limits;
};

enum class OutcomeStatus { Pass, Fail, Timeout, Crash, SetupError };

struct Outcome {
    OutcomeStatus status = OutcomeStatus::SetupError;
    long wall_ms = 0;
    std::string stdout_tail;
    std::string stderr_tail;
    std::string detail; // setup-error reason / signal name

    bool passed() const { return status == OutcomeStatus::Pass; }
};

const char* outcome_name(OutcomeStatus s);

struct EvalWorkspace {
    std::string dir;
    std::vector<std::string> driver_files; // relative to dir
};

struct SpliceResult {
    bool ok = false;
    EvalWorkspace workspace;
    std::string reason; // setup-error reason when !ok
};

// Isolated directory holding the candidate's definition as candidate.py and
// the task's drivers; the original implementation is absent. Parse failures
// and name mismatches return a setup-error reason instead of a workspace.
SpliceResult splice_candidate(const BenchmarkTask& task, const Candidate& candidate,
                              const std::string& work_root);

// Runs one driver under the configured backend with wall/memory limits and
// network disabled where the platform allows. Raises SandboxUnavailable when
// the backend binary is missing; candidate failures never throw.
Outcome run_driver(const EvalWorkspace& ws, const std::string& driver_file,
                   const SandboxConfig& cfg);

// Unbiased estimator: 1 - C(n-c, k)/C(n, k), in stable product form.
double pass_at_k(int n, int c, int k);

struct CandidateOutcome {
    std::string task_id;
    int sample_index = 0;
    Outcome outcome; // all-drivers conjunction
};

struct TaskResult {
    std::string task_id;
    int n = 0;
    int c = 0;
    std::map<int, double> pass_at; // k -> estimate
};

struct EvalReport {
    std::vector<TaskResult> per_task;
    std::map<int, double> aggregate; // unweighted mean over tasks, in [0,1]
};

// Per-task correct counts and pass@k; ks larger than a task's sample count
// are clamped to it.
EvalReport aggregate_outcomes(const std::vector<CandidateOutcome>& outcomes,
                              const std::vector<int>& ks);

// Bounded worker pool over candidates; drivers run sequentially per
// candidate and each candidate gets its own workspace directory.
std::vector<CandidateOutcome> run_evaluation(const std::vector<BenchmarkTask>& tasks,
                                             const std::vector<Candidate>& candidates,
                                             const SandboxConfig& cfg,
                                             const std::string& work_root, int workers,
                                             bool keep_workspaces = false);

// Rebuilds the reference implementation from header + body text.
std::string reconstruct_function(const std::string& header, const std::string& body);

// Runs the task's drivers against the reference implementation; a task whose
// ground truth fails its own drivers is rejected at build time.
Outcome reference_sanity(const BenchmarkTask& task, const SandboxConfig& cfg,
                         const std::string& work_root);

std::string format_report_table(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

} // namespace callerkit
