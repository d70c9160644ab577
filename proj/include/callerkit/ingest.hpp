#pragma once

#include "callerkit/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace callerkit {

struct ManifestEntry {
    std::string url;
    std::string revision; // pinned commit, or "WORKTREE" for a local directory
    std::string split;    // "train" | "bench"
    long stars = 0;
    std::string last_commit_date; // ISO date YYYY-MM-DD
    std::string domain_tag;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    std::vector<std::string> urls(const std::string& split) const;
};

// Validated manifest; duplicate urls across splits raise SplitOverlapError,
// missing or ill-typed fields raise SchemaError with the field path.
Manifest load_manifest(const std::string& path);
Manifest parse_manifest(const std::string& json_text);

// Raises SplitOverlapError when any repository appears in both sets.
void check_split_disjoint(const std::vector<std::string>& train_urls,
                          const std::vector<std::string>& bench_urls);

struct RepoSnapshot {
    std::string root;         // materialized working tree
    std::string content_hash; // digest over all subject-language file contents
    std::size_t file_count = 0;
    std::size_t module_count = 0;
    std::string url;
    std::string split;
};

struct RepoFilterConfig {
    long min_stars = 100;
    int recency_months = 24;
    std::size_t min_files = 2;
    std::vector<std::string> excluded_domains = {"competitive-programming", "algorithmic",
                                                 "tutorial", "interview-prep"};
    // reference date for the recency window, ISO YYYY-MM-DD; "" = today
    std::string today;
};

struct FilterDecision {
    bool accept = true;
    std::vector<std::string> reasons;  // rejection reasons, enumerable
    std::vector<std::string> warnings; // e.g. flat numbered layout heuristic
};

FilterDecision apply_repo_filters(const RepoSnapshot& snapshot, const ManifestEntry& entry,
                                  const RepoFilterConfig& cfg = {});

// Materializes the entry under <cache>/<hash-prefix>/<repo-name>/. Local
// directories with revision WORKTREE are copied; anything else is cloned at
// the pinned revision via the version-control tool.
RepoSnapshot snapshot_repo(const ManifestEntry& entry, const std::string& cache_root);

// SHA-256 over the sorted relative paths and contents of all .py files.
std::string hash_python_tree(const std::string& root);

std::string sha256_hex(std::string_view data);

} // namespace callerkit
