#include "callerkit/ingest.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace callerkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> Manifest::urls(const std::string& split) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (e.split == split) out.push_back(e.url);
    return out;
}

Manifest parse_manifest(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError("<root>", e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
        throw SchemaError("entries", "expected an array");

    Manifest m;
    std::size_t i = 0;
    for (const auto& item : doc["entries"]) {
        std::string where = "entries[" + std::to_string(i) + "]";
        auto need_string = [&](const char* key) -> std::string {
            if (!item.contains(key) || !item[key].is_string() ||
                item[key].get<std::string>().empty())
                throw SchemaError(where + "." + key);
            return item[key].get<std::string>();
        };
        ManifestEntry e;
        e.url = need_string("url");
        e.revision = need_string("revision");
        e.split = need_string("split");
        if (e.split != "train" && e.split != "bench")
            throw SchemaError(where + ".split", "must be train or bench");
        if (!item.contains("stars") || !item["stars"].is_number_integer())
            throw SchemaError(where + ".stars");
        e.stars = item["stars"].get<long>();
        e.last_commit_date = need_string("last_commit_date");
        e.domain_tag = item.value("domain_tag", "");
        m.entries.push_back(std::move(e));
        ++i;
    }

    std::map<std::string, std::set<std::string>> splits_by_url;
    for (const auto& e : m.entries) splits_by_url[e.url].insert(e.split);
    std::vector<std::string> overlapping;
    for (const auto& [url, splits] : splits_by_url)
        if (splits.size() > 1) overlapping.push_back(url);
    if (!overlapping.empty()) throw SplitOverlapError(std::move(overlapping));
    return m;
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path, "manifest file not found");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

void check_split_disjoint(const std::vector<std::string>& train_urls,
                          const std::vector<std::string>& bench_urls) {
    std::set<std::string> train(train_urls.begin(), train_urls.end());
    std::vector<std::string> shared;
    for (const auto& u : bench_urls)
        if (train.count(u)) shared.push_back(u);
    if (!shared.empty()) throw SplitOverlapError(std::move(shared));
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string hash_python_tree(const std::string& root) {
    std::vector<std::string> rel_paths;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".py") continue;
        rel_paths.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(rel_paths.begin(), rel_paths.end());
    std::string acc;
    for (const auto& rel : rel_paths) {
        std::ifstream in(fs::path(root) / rel, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        acc += rel;
        acc += '\0';
        acc += ss.str();
        acc += '\0';
    }
    return sha256_hex(acc);
}

namespace {

std::size_t count_py_files(const std::string& root) {
    std::size_t n = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().extension() == ".py") ++n;
    return n;
}

// months between two ISO dates, approximate to whole months
int months_between(const std::string& from_iso, const std::string& to_iso) {
    int fy = 0, fm = 0, ty = 0, tm = 0;
    if (std::sscanf(from_iso.c_str(), "%d-%d", &fy, &fm) != 2) return 1 << 20;
    if (std::sscanf(to_iso.c_str(), "%d-%d", &ty, &tm) != 2) return 1 << 20;
    return (ty - fy) * 12 + (tm - fm);
}

std::string today_iso() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday);
    return buf;
}

bool flat_numbered_layout(const std::string& root) {
    // >=80% of files directly in one directory with digit-bearing names
    std::map<std::string, std::size_t> per_dir;
    std::size_t total = 0, numbered = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".py") continue;
        ++total;
        ++per_dir[entry.path().parent_path().generic_string()];
        std::string stem = entry.path().stem().string();
        if (std::any_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; }))
            ++numbered;
    }
    if (total < 5) return false;
    std::size_t biggest = 0;
    for (const auto& [d, n] : per_dir) biggest = std::max(biggest, n);
    return biggest * 10 >= total * 8 && numbered * 10 >= total * 8;
}

void copy_py_tree(const fs::path& from, const fs::path& to) {
    for (const auto& entry : fs::recursive_directory_iterator(from)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".py") continue;
        fs::path rel = fs::relative(entry.path(), from);
        fs::path dst = to / rel;
        fs::create_directories(dst.parent_path());
        fs::copy_file(entry.path(), dst, fs::copy_options::overwrite_existing);
    }
}

} // namespace

FilterDecision apply_repo_filters(const RepoSnapshot& snapshot, const ManifestEntry& entry,
                                  const RepoFilterConfig& cfg) {
    FilterDecision d;
    if (entry.stars < cfg.min_stars) {
        d.accept = false;
        d.reasons.push_back("popularity: stars " + std::to_string(entry.stars) + " < " +
                            std::to_string(cfg.min_stars));
    }
    std::string today = cfg.today.empty() ? today_iso() : cfg.today;
    int age = months_between(entry.last_commit_date, today);
    if (age > cfg.recency_months) {
        d.accept = false;
        d.reasons.push_back("recency: last commit " + entry.last_commit_date + " older than " +
                            std::to_string(cfg.recency_months) + " months");
    }
    if (snapshot.file_count < cfg.min_files) {
        d.accept = false;
        d.reasons.push_back("structural diversity: " + std::to_string(snapshot.file_count) +
                            " module file(s)");
    }
    for (const auto& tag : cfg.excluded_domains) {
        if (entry.domain_tag == tag) {
            d.accept = false;
            d.reasons.push_back("algorithmic dataset: domain tag '" + tag + "'");
            break;
        }
    }
    if (flat_numbered_layout(snapshot.root))
        d.warnings.push_back("flat numbered layout suggests an exercise collection");
    return d;
}

RepoSnapshot snapshot_repo(const ManifestEntry& entry, const std::string& cache_root) {
    std::string key = sha256_hex(entry.url + "@" + entry.revision).substr(0, 12);
    fs::path repo_name = fs::path(entry.url).filename();
    if (repo_name.empty()) repo_name = "repo";
    fs::path dest = fs::path(cache_root) / key / repo_name;

    if (entry.revision == "WORKTREE") {
        if (!fs::is_directory(entry.url))
            throw FetchError("local repository path not found: " + entry.url);
        fs::create_directories(dest);
        copy_py_tree(entry.url, dest);
    } else if (fs::is_directory(entry.url) && !fs::is_directory(fs::path(entry.url) / ".git")) {
        // a plain directory has no revisions to check out
        throw RevisionNotFound(entry.url + "@" + entry.revision);
    } else if (!fs::exists(dest / ".git")) {
        fs::create_directories(dest.parent_path());
        std::string clone = "git clone --quiet \"" + entry.url + "\" \"" + dest.string() + "\"" +
                            " 2>/dev/null";
        if (std::system(clone.c_str()) != 0) throw FetchError("clone failed: " + entry.url);
        std::string checkout = "git -C \"" + dest.string() + "\" checkout --quiet " +
                               entry.revision + " 2>/dev/null";
        if (std::system(checkout.c_str()) != 0)
            throw RevisionNotFound(entry.url + "@" + entry.revision);
    } else {
        std::string checkout = "git -C \"" + dest.string() + "\" checkout --quiet " +
                               entry.revision + " 2>/dev/null";
        if (std::system(checkout.c_str()) != 0)
            throw RevisionNotFound(entry.url + "@" + entry.revision);
    }

    RepoSnapshot snap;
    snap.root = dest.string();
    snap.url = entry.url;
    snap.split = entry.split;
    snap.file_count = count_py_files(snap.root);
    if (snap.file_count == 0) throw FetchError("no subject-language files in " + entry.url);
    std::set<std::string> modules;
    for (const auto& e : fs::recursive_directory_iterator(snap.root))
        if (e.is_regular_file() && e.path().extension() == ".py")
            modules.insert(e.path().parent_path().generic_string());
    snap.module_count = modules.size();
    snap.content_hash = hash_python_tree(snap.root);
    return snap;
}

} // namespace callerkit
