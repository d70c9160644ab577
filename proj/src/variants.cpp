#include "callerkit/variants.hpp"

#include "callerkit/pyast.hpp"
#include "callerkit/tokenize.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

namespace callerkit {

using py::Expr;
using py::ExprKind;
using py::Stmt;
using py::StmtKind;

namespace {

bool is_compound(const Stmt& s) {
    switch (s.kind) {
    case StmtKind::If:
    case StmtKind::While:
    case StmtKind::For:
    case StmtKind::With:
    case StmtKind::Try:
    case StmtKind::Match:
        return true;
    default:
        return false;
    }
}

bool is_block(const Stmt& s) {
    return s.kind == StmtKind::If || s.kind == StmtKind::For || s.kind == StmtKind::While ||
           s.kind == StmtKind::Try;
}

struct Site {
    const Expr* call = nullptr;
    const Stmt* stmt = nullptr; // owning statement
    bool in_simple = false;
};

// Parsed caller snippet with the function body flattened in source order.
// Nested function and class bodies are out of scope.
struct Analysis {
    py::Module mod;
    const Stmt* fn = nullptr;
    std::vector<const Stmt*> linear;
    std::vector<const Stmt*> blocks; // structured if/for/while/try
    std::vector<Site> sites;

    std::string text(const py::Span& s) const { return std::string(mod.text(s)); }
};

void flatten(const py::Suite& suite, std::vector<const Stmt*>& out) {
    for (const auto& sp : suite) {
        if (!sp) continue;
        out.push_back(sp.get());
        if (sp->kind == StmtKind::FunctionDef || sp->kind == StmtKind::ClassDef) continue;
        flatten(sp->body, out);
        flatten(sp->orelse, out);
        flatten(sp->finally_, out);
        for (const auto& h : sp->handlers) flatten(h.body, out);
    }
}

bool expr_contains(const Expr& root, const Expr* needle) {
    bool found = false;
    py::walk_expr_tree(root, [&](const Expr& e) {
        if (&e == needle) found = true;
    });
    return found;
}

Analysis analyze(const VariantSource& caller) {
    Analysis a{py::parse_module(caller.text)};
    if (!a.mod.ok()) throw ParseFailure("caller snippet does not parse: " + caller.caller_id);
    for (const auto& sp : a.mod.body)
        if (sp->kind == StmtKind::FunctionDef) {
            a.fn = sp.get();
            break;
        }
    if (!a.fn) throw ParseFailure("caller snippet has no function definition");
    flatten(a.fn->body, a.linear);
    std::stable_sort(a.linear.begin(), a.linear.end(),
                     [](const Stmt* x, const Stmt* y) { return x->span.begin < y->span.begin; });
    for (const Stmt* s : a.linear)
        if (is_block(*s)) a.blocks.push_back(s);

    std::set<std::string> names(caller.target_names.begin(), caller.target_names.end());
    for (const Stmt* s : a.linear) {
        py::walk_exprs(*s, [&](const Expr& e) {
            if (e.kind != ExprKind::Call || e.elts.empty() || !e.elts[0]) return;
            const Expr& func = *e.elts[0];
            std::string name;
            if (func.kind == ExprKind::Name) name = func.str;
            else if (func.kind == ExprKind::Attribute) name = func.str;
            if (names.count(name)) a.sites.push_back({&e, s, !is_compound(*s)});
        });
    }
    std::stable_sort(a.sites.begin(), a.sites.end(), [](const Site& x, const Site& y) {
        return x.call->span.begin < y.call->span.begin;
    });
    return a;
}

// --- load/store analysis over one statement's own expressions --------------

void reads_of_expr(const Expr& e, std::set<std::string>& reads) {
    py::walk_expr_tree(e, [&](const Expr& n) {
        if (n.kind == ExprKind::Name) reads.insert(n.str);
    });
}

// removes names written in target position; their subscript/attribute bases
// still count as reads
void target_stores(const Expr& t, std::set<std::string>& writes, std::set<std::string>& reads) {
    switch (t.kind) {
    case ExprKind::Name:
        writes.insert(t.str);
        break;
    case ExprKind::Tuple:
    case ExprKind::List:
        for (const auto& c : t.elts)
            if (c) target_stores(*c, writes, reads);
        break;
    case ExprKind::Starred:
        if (!t.elts.empty() && t.elts[0]) target_stores(*t.elts[0], writes, reads);
        break;
    case ExprKind::Attribute:
    case ExprKind::Subscript:
        if (!t.elts.empty() && t.elts[0]) reads_of_expr(*t.elts[0], reads);
        if (t.kind == ExprKind::Subscript && t.elts.size() > 1 && t.elts[1])
            reads_of_expr(*t.elts[1], reads);
        break;
    default:
        reads_of_expr(t, reads);
        break;
    }
}

struct Access {
    std::set<std::string> reads;
    std::set<std::string> writes; // plain-name (re)bindings that kill a value
};

// Accesses attributable to the statement's own line: for compound statements
// that is the header (test, iterator, context managers).
Access stmt_access(const Stmt& s) {
    Access acc;
    auto read_expr = [&](const Expr* e) {
        if (e) reads_of_expr(*e, acc.reads);
    };
    switch (s.kind) {
    case StmtKind::Assign: {
        for (std::size_t i = 0; i + 1 < s.exprs.size(); ++i)
            if (s.exprs[i]) target_stores(*s.exprs[i], acc.writes, acc.reads);
        if (!s.exprs.empty()) read_expr(s.exprs.back().get());
        break;
    }
    case StmtKind::AugAssign:
        // target is read and rebound
        if (!s.exprs.empty() && s.exprs[0]) {
            reads_of_expr(*s.exprs[0], acc.reads);
            target_stores(*s.exprs[0], acc.writes, acc.reads);
        }
        if (s.exprs.size() > 1) read_expr(s.exprs[1].get());
        break;
    case StmtKind::AnnAssign:
        if (!s.exprs.empty() && s.exprs[0]) target_stores(*s.exprs[0], acc.writes, acc.reads);
        if (s.exprs.size() > 2) read_expr(s.exprs[2].get());
        break;
    case StmtKind::For:
        if (!s.exprs.empty() && s.exprs[0]) target_stores(*s.exprs[0], acc.writes, acc.reads);
        if (s.exprs.size() > 1) read_expr(s.exprs[1].get());
        break;
    case StmtKind::With:
        for (const auto& item : s.items) {
            read_expr(item.cm.get());
            if (item.target) target_stores(*item.target, acc.writes, acc.reads);
        }
        break;
    case StmtKind::Delete:
        for (const auto& e : s.exprs)
            if (e && e->kind == ExprKind::Name) acc.writes.insert(e->str);
        break;
    case StmtKind::FunctionDef:
    case StmtKind::ClassDef:
        acc.writes.insert(s.name);
        break;
    default:
        for (const auto& e : s.exprs) read_expr(e.get());
        for (const auto& item : s.items) read_expr(item.cm.get());
        break;
    }
    // walrus bindings anywhere in the statement's expressions
    py::walk_exprs(s, [&](const Expr& e) {
        if (e.kind == ExprKind::NamedExpr && !e.elts.empty() && e.elts[0] &&
            e.elts[0]->kind == ExprKind::Name)
            acc.writes.insert(e.elts[0]->str);
    });
    return acc;
}

// Variables bound to the call's result by the owning statement.
std::set<std::string> bound_vars(const Analysis& a, const Site& site) {
    std::set<std::string> bound;
    const Stmt& s = *site.stmt;
    if (s.kind == StmtKind::Assign && !s.exprs.empty()) {
        const Expr* value = s.exprs.back().get();
        if (value && expr_contains(*value, site.call)) {
            std::set<std::string> reads;
            for (std::size_t i = 0; i + 1 < s.exprs.size(); ++i)
                if (s.exprs[i]) target_stores(*s.exprs[i], bound, reads);
        }
    } else if (s.kind == StmtKind::AnnAssign && s.exprs.size() > 2 && s.exprs[2] &&
               expr_contains(*s.exprs[2], site.call)) {
        std::set<std::string> reads;
        if (s.exprs[0]) target_stores(*s.exprs[0], bound, reads);
    }
    py::walk_exprs(s, [&](const Expr& e) {
        if (e.kind == ExprKind::NamedExpr && e.elts.size() > 1 && e.elts[0] && e.elts[1] &&
            e.elts[0]->kind == ExprKind::Name && expr_contains(*e.elts[1], site.call))
            bound.insert(e.elts[0]->str);
    });
    // `for x in f(...)` binds the iteration variable to derived values, not
    // the call result itself; not counted
    return bound;
}

std::string call_statement_text(const Analysis& a, const Site& site) {
    if (site.in_simple) return a.text(site.stmt->span);
    return a.text(site.call->span); // no simple statement exists
}

const Site& first_site(const Analysis& a, const VariantSource& caller) {
    if (a.sites.empty())
        throw NoCallSite("no call to target in caller " + caller.caller_id);
    return a.sites.front();
}

// innermost structured block whose span contains the call
const Stmt* enclosing_block(const Analysis& a, const Site& site) {
    const Stmt* best = nullptr;
    for (const Stmt* b : a.blocks) {
        if (b->span.begin <= site.call->span.begin && site.call->span.end <= b->span.end) {
            if (!best || (b->span.end - b->span.begin) < (best->span.end - best->span.begin))
                best = b;
        }
    }
    return best;
}

// first block after the call whose header reads a still-live bound variable
const Stmt* feeding_block(const Analysis& a, const Site& site) {
    std::set<std::string> live = bound_vars(a, site);
    if (live.empty()) return nullptr;
    for (const Stmt* s : a.linear) {
        if (s->span.begin <= site.stmt->span.begin) continue;
        Access acc = stmt_access(*s);
        if (is_block(*s)) {
            for (const auto& v : live)
                if (acc.reads.count(v)) return s;
        }
        for (const auto& w : acc.writes) live.erase(w);
        if (live.empty()) return nullptr;
    }
    return nullptr;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

CallerVariant signature_only(const VariantSource& caller) {
    Analysis a = analyze(caller);
    CallerVariant v;
    v.kind = CallerVariant::SignatureOnly;
    v.provenance = caller.caller_id;
    v.text = a.text(a.fn->header_span);
    return v;
}

CallerVariant call_site_only(const VariantSource& caller) {
    Analysis a = analyze(caller);
    const Site& site = first_site(a, caller);
    CallerVariant v;
    v.kind = CallerVariant::CallSiteOnly;
    v.provenance = caller.caller_id;
    v.text = call_statement_text(a, site);
    return v;
}

CallerVariant data_flow_slice(const VariantSource& caller) {
    Analysis a = analyze(caller);
    const Site& site = first_site(a, caller);

    CallerVariant v;
    v.kind = CallerVariant::DataFlow;
    v.provenance = caller.caller_id;
    v.text = call_statement_text(a, site);

    std::set<std::string> live = bound_vars(a, site);
    if (live.empty()) return v; // result unused

    for (const Stmt* s : a.linear) {
        if (s->span.begin <= site.stmt->span.begin) continue;
        Access acc = stmt_access(*s);
        bool reads_live = false;
        for (const auto& var : live)
            if (acc.reads.count(var)) reads_live = true;
        if (reads_live) {
            v.text += "\n";
            v.text += a.text(is_compound(*s) ? s->header_span : s->span);
        }
        for (const auto& w : acc.writes) live.erase(w); // kill on reassignment
        if (live.empty()) break;
    }
    return v;
}

CallerVariant control_flow_slice(const VariantSource& caller) {
    Analysis a = analyze(caller);
    const Site& site = first_site(a, caller);

    CallerVariant v;
    v.kind = CallerVariant::ControlFlow;
    v.provenance = caller.caller_id;

    if (const Stmt* block = enclosing_block(a, site)) {
        v.text = a.text(block->span);
        return v;
    }
    if (const Stmt* block = feeding_block(a, site)) {
        v.text = call_statement_text(a, site) + "\n" + a.text(block->span);
        return v;
    }
    v.text = caller.text;
    v.fallback_used = true;
    return v;
}

std::vector<LengthPoolEntry> build_length_pool(const std::vector<VariantSource>& pool) {
    std::vector<LengthPoolEntry> out;
    out.reserve(pool.size());
    for (const auto& cand : pool) {
        LengthPoolEntry entry;
        entry.source = cand;
        entry.token_count = code_token_count(cand.text);
        py::Module mod = py::parse_module(cand.text);
        if (mod.ok()) {
            py::walk_statements(mod.body, [&](const Stmt& s) {
                py::walk_exprs(s, [&](const Expr& e) {
                    if (e.kind != ExprKind::Call || e.elts.empty() || !e.elts[0]) return;
                    const Expr& f = *e.elts[0];
                    if (f.kind == ExprKind::Name || f.kind == ExprKind::Attribute)
                        entry.called_names.insert(f.str);
                });
            });
        }
        out.push_back(std::move(entry));
    }
    return out;
}

CallerVariant length_matched_irrelevant(const VariantSource& caller,
                                        const std::vector<LengthPoolEntry>& pool,
                                        double tolerance) {
    std::size_t want = code_token_count(caller.text);
    double band = tolerance * static_cast<double>(want);
    std::set<std::string> names(caller.target_names.begin(), caller.target_names.end());

    const LengthPoolEntry* best = nullptr;
    std::size_t best_diff = 0;
    for (const auto& cand : pool) {
        // a caller never serves as its own irrelevant control
        if (cand.source.caller_id.rfind(caller.caller_id, 0) == 0) continue;
        bool calls_target = false;
        for (const auto& n : names)
            if (cand.called_names.count(n)) calls_target = true;
        if (calls_target) continue;
        std::size_t diff = cand.token_count > want ? cand.token_count - want
                                                   : want - cand.token_count;
        if (static_cast<double>(diff) > band) continue;
        if (!best || diff < best_diff) {
            best = &cand;
            best_diff = diff;
        }
    }
    if (!best) throw NoLengthMatch(tolerance);
    CallerVariant v;
    v.kind = CallerVariant::LengthMatchedIrrelevant;
    v.provenance = best->source.caller_id;
    v.text = best->source.text;
    return v;
}

CallerVariant length_matched_irrelevant(const VariantSource& caller,
                                        const std::vector<VariantSource>& pool,
                                        double tolerance) {
    return length_matched_irrelevant(caller, build_length_pool(pool), tolerance);
}

namespace {

// rename set: the function's own name, parameters and assigned locals at any
// nesting depth; names declared global/nonlocal anywhere are excluded
std::set<std::string> collect_rename_set(const py::Module& mod,
                                         const std::set<std::string>& preserved) {
    std::set<std::string> names;
    std::set<std::string> pinned = preserved;
    py::walk_statements(mod.body, [&](const Stmt& s) {
        switch (s.kind) {
        case StmtKind::FunctionDef:
        case StmtKind::ClassDef:
            names.insert(s.name);
            for (const auto& p : s.params)
                if (!p.name.empty()) names.insert(p.name);
            break;
        case StmtKind::Global:
        case StmtKind::Nonlocal:
            for (const auto& n : s.names) pinned.insert(n);
            break;
        default: {
            Access acc = stmt_access(s);
            for (const auto& w : acc.writes) names.insert(w);
            break;
        }
        }
        for (const auto& h : s.handlers)
            if (!h.bind_name.empty()) names.insert(h.bind_name);
        // comprehension targets
        py::walk_exprs(s, [&](const Expr& e) {
            for (const auto& c : e.comps) {
                if (!c.target) continue;
                std::set<std::string> w, r;
                target_stores(*c.target, w, r);
                for (const auto& n : w) names.insert(n);
            }
        });
    });
    for (const auto& p : pinned) names.erase(p);
    return names;
}

struct CallShape {
    std::size_t positional;
    std::vector<std::string> keywords; // sorted
    bool operator<(const CallShape& o) const {
        return std::tie(positional, keywords) < std::tie(o.positional, o.keywords);
    }
    bool operator==(const CallShape& o) const {
        return positional == o.positional && keywords == o.keywords;
    }
};

std::multiset<CallShape> target_call_shapes(const std::string& text,
                                            const std::set<std::string>& names) {
    std::multiset<CallShape> shapes;
    py::Module mod = py::parse_module(text);
    if (!mod.ok()) return shapes;
    py::walk_statements(mod.body, [&](const Stmt& s) {
        py::walk_exprs(s, [&](const Expr& e) {
            if (e.kind != ExprKind::Call || e.elts.empty() || !e.elts[0]) return;
            const Expr& f = *e.elts[0];
            if ((f.kind != ExprKind::Name && f.kind != ExprKind::Attribute) ||
                !names.count(f.str))
                return;
            CallShape shape;
            shape.positional = e.elts.size() - 1;
            for (const auto& kw : e.keywords)
                if (!kw.name.empty()) shape.keywords.push_back(kw.name);
            std::sort(shape.keywords.begin(), shape.keywords.end());
            shapes.insert(std::move(shape));
        });
    });
    return shapes;
}

} // namespace

CallerVariant semantics_preserving_perturb(const VariantSource& caller, std::uint64_t seed) {
    py::Module mod = py::parse_module(caller.text);
    if (!mod.ok()) throw ParseFailure("caller snippet does not parse: " + caller.caller_id);

    std::set<std::string> preserved(caller.target_names.begin(), caller.target_names.end());
    std::set<std::string> rename_set = collect_rename_set(mod, preserved);

    // all identifier tokens, in order; also every name in use for collision checks
    py::LexResult lr = py::lex(caller.text);
    std::vector<std::string> order;
    std::set<std::string> seen, all_names(preserved.begin(), preserved.end());
    for (const auto& t : lr.toks) {
        if (t.kind != py::TokKind::Name) continue;
        all_names.insert(std::string(t.text));
        if (rename_set.count(std::string(t.text)) && seen.insert(std::string(t.text)).second)
            order.push_back(std::string(t.text));
    }

    // seeded permutation of fresh indices
    std::vector<std::size_t> perm(order.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(seed ^ fnv1a(caller.caller_id));
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);

    std::map<std::string, std::string> mapping;
    for (std::size_t i = 0; i < order.size(); ++i) {
        std::size_t idx = perm[i];
        std::string fresh = "v" + std::to_string(idx);
        while (all_names.count(fresh)) {
            idx += perm.size() ? perm.size() : 1;
            fresh = "v" + std::to_string(idx);
        }
        mapping[order[i]] = fresh;
    }

    // token-wise rewrite: skip attribute names and keyword-argument names in
    // call position; drop comments
    std::string out;
    out.reserve(caller.text.size());
    std::size_t cursor = 0;
    std::size_t comment_i = 0;
    auto copy_gap = [&](std::size_t upto) {
        while (comment_i < lr.comments.size() && lr.comments[comment_i].second <= cursor)
            ++comment_i;
        std::size_t pos = cursor;
        while (comment_i < lr.comments.size() && lr.comments[comment_i].first < upto) {
            auto [cb, ce] = lr.comments[comment_i];
            std::string chunk = std::string(caller.text.substr(pos, cb - pos));
            // trim spaces that preceded the comment
            while (!chunk.empty() && (chunk.back() == ' ' || chunk.back() == '\t')) chunk.pop_back();
            out += chunk;
            pos = ce;
            ++comment_i;
        }
        out += caller.text.substr(pos, upto - pos);
    };

    struct ParenCtx {
        bool call_like = false; // kwarg names live here
        bool def_header = false;
    };
    std::vector<ParenCtx> stack;
    const py::Tok* prev_sig = nullptr;
    const py::Tok* prev_prev_sig = nullptr;

    for (std::size_t ti = 0; ti < lr.toks.size(); ++ti) {
        const py::Tok& t = lr.toks[ti];
        if (t.kind == py::TokKind::Indent || t.kind == py::TokKind::Dedent ||
            t.kind == py::TokKind::Newline || t.kind == py::TokKind::End)
            continue;
        if (t.kind == py::TokKind::Op) {
            if (t.text == "(") {
                ParenCtx ctx;
                if (prev_sig && prev_sig->kind == py::TokKind::Name) {
                    bool after_def = prev_prev_sig && prev_prev_sig->kind == py::TokKind::Name &&
                                     (prev_prev_sig->text == "def" || prev_prev_sig->text == "class");
                    if (after_def) ctx.def_header = true;
                    else if (!py::is_python_keyword(prev_sig->text)) ctx.call_like = true;
                } else if (prev_sig && prev_sig->kind == py::TokKind::Op &&
                           (prev_sig->text == ")" || prev_sig->text == "]")) {
                    ctx.call_like = true;
                }
                stack.push_back(ctx);
            } else if (t.text == ")") {
                if (!stack.empty()) stack.pop_back();
            }
        }
        if (t.kind == py::TokKind::Name) {
            auto it = mapping.find(std::string(t.text));
            if (it != mapping.end()) {
                bool is_attr = prev_sig && prev_sig->kind == py::TokKind::Op && prev_sig->text == ".";
                bool is_kwarg = false;
                if (!stack.empty() && stack.back().call_like && !stack.back().def_header) {
                    const py::Tok* nxt =
                        ti + 1 < lr.toks.size() ? &lr.toks[ti + 1] : nullptr;
                    bool before_eq = nxt && nxt->kind == py::TokKind::Op && nxt->text == "=";
                    bool after_sep = prev_sig && prev_sig->kind == py::TokKind::Op &&
                                     (prev_sig->text == "(" || prev_sig->text == ",");
                    is_kwarg = before_eq && after_sep;
                }
                if (!is_attr && !is_kwarg) {
                    copy_gap(t.begin);
                    out += it->second;
                    cursor = t.end;
                }
            }
        }
        prev_prev_sig = prev_sig;
        prev_sig = &t;
    }
    copy_gap(caller.text.size());

    // strip whitespace-only line tails the comment removal left behind
    std::string cleaned;
    cleaned.reserve(out.size());
    std::size_t line_start = 0;
    for (std::size_t i = 0; i <= out.size(); ++i) {
        if (i == out.size() || out[i] == '\n') {
            std::string_view line(out.data() + line_start, i - line_start);
            std::size_t end = line.size();
            while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
            cleaned += line.substr(0, end);
            if (i < out.size()) cleaned += '\n';
            line_start = i + 1;
        }
    }

    // blank lines from full-line comments collapse poorly inside suites; keep
    // them (they are legal) but verify the result still parses
    py::Module check = py::parse_module(cleaned);
    if (!check.ok())
        throw RewriteVerificationFailure("perturbed caller fails to reparse");
    auto before = target_call_shapes(caller.text, preserved);
    auto after = target_call_shapes(cleaned, preserved);
    if (before != after || before.empty())
        throw RewriteVerificationFailure("target call structure changed by rewrite");

    CallerVariant v;
    v.kind = CallerVariant::SemanticsPreserving;
    v.provenance = caller.caller_id;
    v.text = cleaned;
    return v;
}

UsageClass classify_call_site(const VariantSource& caller) {
    Analysis a = analyze(caller);
    const Site& site = first_site(a, caller);

    UsageClass u;
    u.enclosed_by_block = enclosing_block(a, site) != nullptr;
    u.return_feeds_block = feeding_block(a, site) != nullptr;
    bool has_blocks = !a.blocks.empty();
    u.unrelated_control_only = has_blocks && !u.enclosed_by_block && !u.return_feeds_block;
    u.no_structured_control = !has_blocks;

    if (u.enclosed_by_block) u.primary = UsageClass::Enclosed;
    else if (u.return_feeds_block) u.primary = UsageClass::ReturnFeeds;
    else if (u.unrelated_control_only) u.primary = UsageClass::UnrelatedOnly;
    else u.primary = UsageClass::None;
    return u;
}

std::string format_usage_report(const std::vector<UsageEntry>& entries) {
    const char* labels[4] = {"enclosed-by-block", "return-feeds-block", "unrelated-control-only",
                             "no-structured-control"};
    std::size_t counts[4] = {0, 0, 0, 0};
    std::map<std::string, std::set<int>> task_classes;
    std::set<std::string> tasks;
    for (const auto& e : entries) {
        ++counts[static_cast<int>(e.cls.primary)];
        task_classes[e.task_id].insert(static_cast<int>(e.cls.primary));
        tasks.insert(e.task_id);
    }
    double n_inst = static_cast<double>(entries.size());
    double n_task = static_cast<double>(tasks.size());
    std::string out = "call-site structural classification\n";
    char buf[160];
    for (int k = 0; k < 4; ++k) {
        std::size_t task_hits = 0;
        for (const auto& [id, cls] : task_classes)
            if (cls.count(k)) ++task_hits;
        double pi = n_inst > 0 ? 100.0 * static_cast<double>(counts[k]) / n_inst : 0.0;
        double pt = n_task > 0 ? 100.0 * static_cast<double>(task_hits) / n_task : 0.0;
        std::snprintf(buf, sizeof buf, "  %-24s %6.2f%% instances, %6.2f%% tasks\n", labels[k],
                      pi, pt);
        out += buf;
    }
    return out;
}

} // namespace callerkit
