#pragma once

#include "callerkit/errors.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace callerkit {

// One caller snippet plus the names its target is invoked by (usually the
// target's unqualified name; import aliases differ).
struct VariantSource {
    std::string caller_id;
    std::string text; // complete caller function, header included
    std::vector<std::string> target_names;
};

struct CallerVariant {
    enum Kind {
        SignatureOnly,
        CallSiteOnly,
        DataFlow,
        ControlFlow,
        LengthMatchedIrrelevant,
        SemanticsPreserving,
        Full
    } kind = Full;
    std::string text;
    bool fallback_used = false; // control flow only
    std::string provenance;     // source caller id
};

// Caller function header only, decorators excluded.
CallerVariant signature_only(const VariantSource& caller);

// The full enclosing simple statement of the first call site; a call inside a
// compound header has no simple statement and yields the bare call expression.
CallerVariant call_site_only(const VariantSource& caller);

// Call statement plus every later statement that directly reads a variable
// bound to the call's result; reassignment kills the use chain.
CallerVariant data_flow_slice(const VariantSource& caller);

// The innermost structured block enclosing the call, or the first block
// branching on the bound result; straight-line callers fall back to the full
// caller with fallback_used set.
CallerVariant control_flow_slice(const VariantSource& caller);

// Pool snippet with the nearest token count within +/-tolerance of the
// caller's; ties break by pool order. Pool entries calling the target are
// never selected.
CallerVariant length_matched_irrelevant(const VariantSource& caller,
                                        const std::vector<VariantSource>& pool,
                                        double tolerance = 0.10);

// Precomputed pool index for matching many callers against one pool. Entries
// whose id starts with the caller's id are skipped (no self-controls).
struct LengthPoolEntry {
    VariantSource source;
    std::size_t token_count = 0;
    std::set<std::string> called_names; // every name invoked in the snippet
};
std::vector<LengthPoolEntry> build_length_pool(const std::vector<VariantSource>& pool);
CallerVariant length_matched_irrelevant(const VariantSource& caller,
                                        const std::vector<LengthPoolEntry>& pool,
                                        double tolerance = 0.10);

// Seeded consistent renaming of the caller's own name, parameters and locals
// to fresh v<k> names; comments are stripped. Target calls, imported and
// global names, attributes, keyword-argument names and string literals are
// preserved. The output must reparse and keep every target call's argument
// structure.
CallerVariant semantics_preserving_perturb(const VariantSource& caller, std::uint64_t seed);

struct UsageClass {
    bool enclosed_by_block = false;
    bool return_feeds_block = false;
    bool unrelated_control_only = false;
    bool no_structured_control = false;

    enum Primary { Enclosed, ReturnFeeds, UnrelatedOnly, None } primary = None;
};

// Structural classification of the first call site under the precedence
// enclosed > return-feeds > unrelated > none.
UsageClass classify_call_site(const VariantSource& caller);

struct UsageEntry {
    std::string task_id;
    UsageClass cls;
};

// Instance-level and task-level percentages per class.
std::string format_usage_report(const std::vector<UsageEntry>& entries);

} // namespace callerkit
