#pragma once

#include "callerkit/errors.hpp"

#include <cstdint>
#include <string>

namespace callerkit {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat-key JSON configuration with CALLERKIT_* environment overrides.
struct RunConfig {
    std::string cache_dir = "cache";
    std::string out_dir = "out";
    long stars_min = 100;
    int recency_months = 24;
    double assertion_density = 0.3;
    double length_tolerance = 0.10;
    double timeout_s = 10.0;
    std::size_t memory_mb = 512;
    int workers = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

RunConfig load_run_config(const std::string& path); // "" = defaults
RunConfig apply_env_overrides(RunConfig cfg);

// SHA-256 over the canonical (sorted-key) JSON dump of the config.
std::string config_digest(const RunConfig& cfg);

// First line of every artifact: {"_provenance":{tool, version, seed, config}}.
std::string provenance_line(const RunConfig& cfg);

} // namespace callerkit
