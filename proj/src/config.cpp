#include "callerkit/config.hpp"

#include "callerkit/ingest.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace callerkit {

using nlohmann::json;

void RunConfig::validate() const {
    if (stars_min < 0) throw SchemaError("stars_min", "must be non-negative");
    if (recency_months <= 0) throw SchemaError("recency_months", "must be positive");
    if (assertion_density < 0.0 || assertion_density > 1.0)
        throw SchemaError("assertion_density", "must lie in [0, 1]");
    if (length_tolerance < 0.0 || length_tolerance > 1.0)
        throw SchemaError("length_tolerance", "must lie in [0, 1]");
    if (timeout_s <= 0.0) throw SchemaError("timeout_s", "must be positive");
    if (memory_mb < 16) throw SchemaError("memory_mb", "must be at least 16");
    if (workers < 1) throw SchemaError("workers", "must be at least 1");
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path, "config file not found");
    json doc;
    try {
        std::ostringstream ss;
        ss << in.rdbuf();
        doc = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw SchemaError(path, e.what());
    }
    cfg.cache_dir = doc.value("cache_dir", cfg.cache_dir);
    cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    cfg.stars_min = doc.value("stars_min", cfg.stars_min);
    cfg.recency_months = doc.value("recency_months", cfg.recency_months);
    cfg.assertion_density = doc.value("assertion_density", cfg.assertion_density);
    cfg.length_tolerance = doc.value("length_tolerance", cfg.length_tolerance);
    cfg.timeout_s = doc.value("timeout_s", cfg.timeout_s);
    cfg.memory_mb = doc.value("memory_mb", cfg.memory_mb);
    cfg.workers = doc.value("workers", cfg.workers);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

RunConfig apply_env_overrides(RunConfig cfg) {
    auto env = [](const char* key) -> const char* { return std::getenv(key); };
    if (const char* v = env("CALLERKIT_CACHE_DIR")) cfg.cache_dir = v;
    if (const char* v = env("CALLERKIT_OUT_DIR")) cfg.out_dir = v;
    if (const char* v = env("CALLERKIT_STARS_MIN")) cfg.stars_min = std::atol(v);
    if (const char* v = env("CALLERKIT_RECENCY_MONTHS")) cfg.recency_months = std::atoi(v);
    if (const char* v = env("CALLERKIT_ASSERTION_DENSITY")) cfg.assertion_density = std::atof(v);
    if (const char* v = env("CALLERKIT_LENGTH_TOLERANCE")) cfg.length_tolerance = std::atof(v);
    if (const char* v = env("CALLERKIT_TIMEOUT_S")) cfg.timeout_s = std::atof(v);
    if (const char* v = env("CALLERKIT_MEMORY_MB")) cfg.memory_mb = std::atol(v);
    if (const char* v = env("CALLERKIT_WORKERS")) cfg.workers = std::atoi(v);
    if (const char* v = env("CALLERKIT_SEED")) cfg.seed = std::strtoull(v, nullptr, 10);
    cfg.validate();
    return cfg;
}

std::string config_digest(const RunConfig& cfg) {
    json doc{{"assertion_density", cfg.assertion_density},
             {"cache_dir", cfg.cache_dir},
             {"length_tolerance", cfg.length_tolerance},
             {"memory_mb", cfg.memory_mb},
             {"out_dir", cfg.out_dir},
             {"recency_months", cfg.recency_months},
             {"seed", cfg.seed},
             {"stars_min", cfg.stars_min},
             {"timeout_s", cfg.timeout_s},
             {"workers", cfg.workers}};
    return sha256_hex(doc.dump());
}

std::string provenance_line(const RunConfig& cfg) {
    json doc{{"_provenance",
              {{"tool", "callerkit"},
               {"version", kToolVersion},
               {"seed", cfg.seed},
               {"config", config_digest(cfg)}}}};
    return doc.dump() + "\n";
}

} // namespace callerkit
