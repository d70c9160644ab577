#include "callerkit/evalharness.hpp"

#include "callerkit/pyast.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

namespace callerkit {

namespace fs = std::filesystem;
using nlohmann::json;

const char* outcome_name(OutcomeStatus s) {
    switch (s) {
    case OutcomeStatus::Pass: return "pass";
    case OutcomeStatus::Fail: return "fail";
    case OutcomeStatus::Timeout: return "timeout";
    case OutcomeStatus::Crash: return "crash";
    case OutcomeStatus::SetupError: return "setup_error";
    }
    return "?";
}

namespace {

constexpr std::size_t kTailBytes = 4096;

void append_tail(std::string& tail, const char* data, std::size_t n) {
    tail.append(data, n);
    if (tail.size() > kTailBytes) tail.erase(0, tail.size() - kTailBytes);
}

void write_proc_file(const char* path, const std::string& content) {
    int fd = open(path, O_WRONLY);
    if (fd < 0) return;
    ssize_t ignored = write(fd, content.data(), content.size());
    (void)ignored;
    close(fd);
}

// Detaches the network; tries a plain netns first (privileged), then an
// unprivileged user+net namespace with the caller's uid mapped so file
// access keeps working. Best effort: kernels may deny both.
void disable_network() {
    if (unshare(CLONE_NEWNET) == 0) return;
    uid_t uid = getuid();
    gid_t gid = getgid();
    if (unshare(CLONE_NEWUSER | CLONE_NEWNET) != 0) return;
    write_proc_file("/proc/self/setgroups", "deny");
    write_proc_file("/proc/self/gid_map", "0 " + std::to_string(gid) + " 1");
    write_proc_file("/proc/self/uid_map", "0 " + std::to_string(uid) + " 1");
}

bool on_path(const std::string& cmd) {
    if (cmd.find('/') != std::string::npos) return ::access(cmd.c_str(), X_OK) == 0;
    const char* path = ::getenv("PATH");
    if (!path) return false;
    std::string p(path);
    std::size_t start = 0;
    while (start <= p.size()) {
        std::size_t end = p.find(':', start);
        if (end == std::string::npos) end = p.size();
        std::string dir = p.substr(start, end - start);
        if (!dir.empty() && ::access((dir + "/" + cmd).c_str(), X_OK) == 0) return true;
        start = end + 1;
    }
    return false;
}

} // namespace

SpliceResult splice_candidate(const BenchmarkTask& task, const Candidate& candidate,
                              const std::string& work_root) {
    SpliceResult res;
    py::Module mod = py::parse_module(candidate.code);
    if (!mod.ok()) {
        res.reason = "parse: " + mod.errors[0].message;
        return res;
    }
    const py::Stmt* fn = nullptr;
    for (const auto& sp : mod.body)
        if (sp->kind == py::StmtKind::FunctionDef) {
            fn = sp.get();
            break;
        }
    if (!fn) {
        res.reason = "parse: no function definition";
        return res;
    }
    std::string expected = task.target_qname.substr(task.target_qname.rfind('.') + 1);
    if (fn->name != expected) {
        res.reason = "name mismatch: expected " + expected + ", got " + fn->name;
        return res;
    }

    fs::path dir = fs::path(work_root) / (task.task_id + "_s" + std::to_string(candidate.sample_index));
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "candidate.py", std::ios::binary);
        out << candidate.code;
        if (!candidate.code.empty() && candidate.code.back() != '\n') out << "\n";
    }
    res.workspace.dir = dir.string();
    for (std::size_t i = 0; i < task.drivers.size(); ++i) {
        const auto& d = task.drivers[i];
        std::string fname = d.path.empty() ? ("driver_" + std::to_string(i) + ".py") : d.path;
        std::ofstream out(dir / fname, std::ios::binary);
        out << d.text;
        res.workspace.driver_files.push_back(fname);
    }
    res.ok = true;
    return res;
}

Outcome run_driver(const EvalWorkspace& ws, const std::string& driver_file,
                   const SandboxConfig& cfg) {
    std::vector<std::string> argv;
    if (cfg.backend == SandboxConfig::Container) {
        if (!on_path(cfg.container_cmd))
            throw SandboxUnavailable("container runtime not found: " + cfg.container_cmd);
        argv = {cfg.container_cmd, "run",   "--rm",
                "--network",       "none",  "-v",
                ws.dir + ":/ws",   "-w",    "/ws",
                cfg.container_image, "python3", driver_file};
    } else {
        if (!on_path(cfg.interpreter))
            throw SandboxUnavailable("interpreter not found: " + cfg.interpreter);
        argv = {cfg.interpreter, driver_file};
    }

    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw Error("pipe() failed: " + std::string(std::strerror(errno)));

    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw Error("fork() failed");
    if (pid == 0) {
        setsid(); // own process group so the whole tree can be killed
        // resolve the working directory before dropping into namespaces: the
        // unmapped uid may lack traversal rights on the workspace path
        if (chdir(ws.dir.c_str()) != 0) _exit(127);
        if (cfg.backend == SandboxConfig::Proc) {
            if (cfg.limits.no_network) disable_network();
            rlimit mem{cfg.limits.mem_mb << 20, cfg.limits.mem_mb << 20};
            setrlimit(RLIMIT_AS, &mem);
            rlim_t cpu = static_cast<rlim_t>(cfg.limits.wall_s) + 2;
            rlimit cpu_lim{cpu, cpu + 1};
            setrlimit(RLIMIT_CPU, &cpu_lim);
        }
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        setenv("PYTHONDONTWRITEBYTECODE", "1", 1);
        setenv("PYTHONHASHSEED", "0", 1);
        std::vector<char*> cargv;
        for (auto& a : argv) cargv.push_back(a.data());
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    Outcome outcome;
    bool timed_out = false;
    long limit_ms = static_cast<long>(cfg.limits.wall_s * 1000.0);
    int status = 0;
    for (;;) {
        pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
        int waited = poll(fds, 2, 50);
        if (waited > 0) {
            char buf[4096];
            for (int i = 0; i < 2; ++i) {
                if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
                ssize_t n;
                while ((n = read(fds[i].fd, buf, sizeof buf)) > 0)
                    append_tail(i == 0 ? outcome.stdout_tail : outcome.stderr_tail, buf, n);
            }
        }
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        if (elapsed >= limit_ms) {
            timed_out = true;
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            break;
        }
    }
    // drain remaining output
    char buf[4096];
    ssize_t n;
    while ((n = read(out_pipe[0], buf, sizeof buf)) > 0) append_tail(outcome.stdout_tail, buf, n);
    while ((n = read(err_pipe[0], buf, sizeof buf)) > 0) append_tail(outcome.stderr_tail, buf, n);
    close(out_pipe[0]);
    close(err_pipe[0]);

    outcome.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    if (timed_out) {
        outcome.status = OutcomeStatus::Timeout;
    } else if (WIFEXITED(status)) {
        int code = WEXITSTATUS(status);
        if (code == 0) outcome.status = OutcomeStatus::Pass;
        else if (code == 127) {
            outcome.status = OutcomeStatus::SetupError;
            outcome.detail = "interpreter launch failed";
        } else {
            outcome.status = OutcomeStatus::Fail;
        }
    } else if (WIFSIGNALED(status)) {
        outcome.status = OutcomeStatus::Crash;
        outcome.detail = std::string("signal ") + std::to_string(WTERMSIG(status));
    }
    return outcome;
}

double pass_at_k(int n, int c, int k) {
    if (n < 0 || c < 0 || c > n || k < 1 || k > n)
        throw DomainError("pass@k requires 0 <= c <= n and 1 <= k <= n");
    if (n - c < k) return 1.0;
    double prod = 1.0;
    for (int i = n - c + 1; i <= n; ++i)
        prod *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    return 1.0 - prod;
}

EvalReport aggregate_outcomes(const std::vector<CandidateOutcome>& outcomes,
                              const std::vector<int>& ks) {
    std::map<std::string, std::pair<int, int>> counts; // task -> (n, c)
    for (const auto& co : outcomes) {
        auto& [n, c] = counts[co.task_id];
        ++n;
        if (co.outcome.passed()) ++c;
    }
    EvalReport report;
    for (const auto& [task_id, nc] : counts) {
        TaskResult tr;
        tr.task_id = task_id;
        tr.n = nc.first;
        tr.c = nc.second;
        for (int k : ks) tr.pass_at[k] = pass_at_k(tr.n, tr.c, std::min(k, tr.n));
        report.per_task.push_back(std::move(tr));
    }
    for (int k : ks) {
        double sum = 0;
        for (const auto& tr : report.per_task) sum += tr.pass_at.at(k);
        report.aggregate[k] =
            report.per_task.empty() ? 0.0 : sum / static_cast<double>(report.per_task.size());
    }
    return report;
}

namespace {

Outcome evaluate_one(const BenchmarkTask& task, const Candidate& cand, const SandboxConfig& cfg,
                     const std::string& work_root, bool keep) {
    SpliceResult sp = splice_candidate(task, cand, work_root);
    if (!sp.ok) {
        Outcome o;
        o.status = OutcomeStatus::SetupError;
        o.detail = sp.reason;
        return o;
    }
    Outcome overall;
    overall.status = OutcomeStatus::Pass;
    for (const auto& driver : sp.workspace.driver_files) {
        Outcome o = run_driver(sp.workspace, driver, cfg);
        overall.wall_ms += o.wall_ms;
        if (!o.passed()) {
            o.wall_ms = overall.wall_ms;
            overall = o; // first failing driver decides
            break;
        }
        overall.stdout_tail = o.stdout_tail;
        overall.stderr_tail = o.stderr_tail;
    }
    if (!keep) {
        std::error_code ec;
        fs::remove_all(sp.workspace.dir, ec);
    }
    return overall;
}

} // namespace

std::vector<CandidateOutcome> run_evaluation(const std::vector<BenchmarkTask>& tasks,
                                             const std::vector<Candidate>& candidates,
                                             const SandboxConfig& cfg,
                                             const std::string& work_root, int workers,
                                             bool keep_workspaces) {
    std::map<std::string, const BenchmarkTask*> by_id;
    for (const auto& t : tasks) by_id[t.task_id] = &t;
    fs::create_directories(work_root);

    std::vector<CandidateOutcome> results(candidates.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= candidates.size()) break;
            const Candidate& cand = candidates[i];
            CandidateOutcome co;
            co.task_id = cand.task_id;
            co.sample_index = cand.sample_index;
            auto it = by_id.find(cand.task_id);
            if (it == by_id.end()) {
                co.outcome.status = OutcomeStatus::SetupError;
                co.outcome.detail = "unknown task id";
            } else {
                co.outcome = evaluate_one(*it->second, cand, cfg, work_root, keep_workspaces);
            }
            results[i] = std::move(co);
        }
    };
    int nthreads = std::max(1, workers);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

std::string reconstruct_function(const std::string& header, const std::string& body) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
        if (i == body.size() || body[i] == '\n') {
            lines.push_back(body.substr(start, i - start));
            start = i + 1;
        }
    }
    // the first body line lost its indentation when sliced; continuation
    // lines kept theirs, so the block indent is their minimum
    std::size_t indent = 4;
    bool found = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        std::size_t w = l.find_first_not_of(" \t");
        if (w == std::string::npos) continue;
        if (!found || w < indent) indent = w;
        found = true;
    }
    std::string out = header + "\n" + std::string(indent, ' ');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += "\n";
        out += lines[i];
    }
    if (out.empty() || out.back() != '\n') out += "\n";
    return out;
}

Outcome reference_sanity(const BenchmarkTask& task, const SandboxConfig& cfg,
                         const std::string& work_root) {
    Candidate ref;
    ref.task_id = task.task_id;
    ref.sample_index = -1;
    ref.code = reconstruct_function(task.header, task.body);
    SpliceResult sp = splice_candidate(task, ref, work_root + "/refcheck");
    if (!sp.ok) {
        Outcome o;
        o.status = OutcomeStatus::SetupError;
        o.detail = sp.reason;
        return o;
    }
    Outcome overall;
    overall.status = OutcomeStatus::Pass;
    for (const auto& driver : sp.workspace.driver_files) {
        Outcome o = run_driver(sp.workspace, driver, cfg);
        if (!o.passed()) {
            overall = o;
            break;
        }
    }
    std::error_code ec;
    fs::remove_all(sp.workspace.dir, ec);
    return overall;
}

std::string format_report_table(const EvalReport& report) {
    std::string out = "task                             n    c";
    for (const auto& [k, v] : report.aggregate) out += "   pass@" + std::to_string(k);
    out += "\n";
    char buf[256];
    for (const auto& tr : report.per_task) {
        std::snprintf(buf, sizeof buf, "%-30s %4d %4d", tr.task_id.c_str(), tr.n, tr.c);
        out += buf;
        for (const auto& [k, v] : tr.pass_at) {
            std::snprintf(buf, sizeof buf, " %8.4f", v);
            out += buf;
        }
        out += "\n";
    }
    out += "aggregate:";
    for (const auto& [k, v] : report.aggregate) {
        std::snprintf(buf, sizeof buf, " pass@%d=%.2f%%", k, 100.0 * v);
        out += buf;
    }
    out += "\n";
    return out;
}

std::string report_to_json(const EvalReport& report) {
    json per = json::array();
    for (const auto& tr : report.per_task) {
        json t{{"task_id", tr.task_id}, {"n", tr.n}, {"c", tr.c}};
        for (const auto& [k, v] : tr.pass_at) t["pass@" + std::to_string(k)] = v;
        per.push_back(t);
    }
    json agg = json::object();
    for (const auto& [k, v] : report.aggregate) agg["pass@" + std::to_string(k)] = v;
    json doc{{"per_task", per}, {"aggregate", agg}};
    // driver output tails can carry arbitrary bytes
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

} // namespace callerkit
