#include "callerkit/metrics.hpp"

#include "callerkit/pyast.hpp"
#include "callerkit/tokenize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace callerkit {

namespace {

constexpr double kEps = 1e-9;

using TokenList = std::vector<std::string>;

std::map<std::vector<std::string>, long> ngram_counts(const TokenList& toks, int n) {
    std::map<std::vector<std::string>, long> counts;
    if (static_cast<int>(toks.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i)
        ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return counts;
}

double ngram_weight(const std::vector<std::string>& gram, bool keyword_weighted) {
    if (!keyword_weighted) return 1.0;
    for (const auto& t : gram)
        if (is_subject_keyword(t)) return 5.0;
    return 1.0;
}

} // namespace

double bleu_score(const TokenList& candidate, const TokenList& reference, bool keyword_weighted) {
    if (reference.empty()) throw EmptyReference("reference has no tokens");
    if (candidate.empty()) return 0.0;

    double log_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= 4; ++n) {
        if (static_cast<int>(reference.size()) < n) break; // shorter references use fewer orders
        ++orders;
        auto cand = ngram_counts(candidate, n);
        auto ref = ngram_counts(reference, n);
        double total = 0.0, matched = 0.0;
        for (const auto& [gram, cnt] : cand) {
            double w = ngram_weight(gram, keyword_weighted);
            total += w * static_cast<double>(cnt);
            auto it = ref.find(gram);
            if (it != ref.end())
                matched += w * static_cast<double>(std::min(cnt, it->second));
        }
        double p = (total > 0.0 && matched > 0.0) ? matched / total : kEps;
        log_sum += std::log(p);
    }
    if (orders == 0) return 0.0;
    double geo = std::exp(log_sum / orders);
    double bp = candidate.size() >= reference.size()
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(reference.size()) /
                                         static_cast<double>(candidate.size()));
    return bp * geo;
}

namespace {

// --- AST subtree match ------------------------------------------------------

void serialize_expr(const py::Expr* e, std::string& out, std::vector<std::string>& bag);

void push_subtree(std::string s, std::string& out, std::vector<std::string>& bag) {
    bag.push_back(s);
    out += std::move(s);
}

std::string expr_subtree(const py::Expr& e, std::vector<std::string>& bag) {
    std::string s = "E" + std::to_string(static_cast<int>(e.kind));
    switch (e.kind) {
    case py::ExprKind::Name:
        break; // identifier normalized away
    case py::ExprKind::Attribute:
        break; // attribute names are identifiers
    case py::ExprKind::Constant:
        s += "[" + e.str + "]";
        break;
    case py::ExprKind::BinOp:
    case py::ExprKind::UnaryOp:
    case py::ExprKind::BoolOp:
        s += "[" + e.str + "]";
        break;
    case py::ExprKind::Compare:
        for (const auto& op : e.ops) s += "[" + op + "]";
        break;
    default:
        break;
    }
    s += "(";
    bool first = true;
    auto child = [&](const py::Expr* c) {
        if (!first) s += ",";
        first = false;
        if (!c) {
            s += "_";
            return;
        }
        s += expr_subtree(*c, bag);
    };
    for (const auto& c : e.elts) child(c.get());
    for (const auto& kw : e.keywords) {
        if (!first) s += ",";
        first = false;
        s += "kw=";
        if (kw.value) s += expr_subtree(*kw.value, bag);
    }
    for (const auto& cl : e.comps) {
        s += "|for:";
        if (cl.target) s += expr_subtree(*cl.target, bag);
        s += ":in:";
        if (cl.iter) s += expr_subtree(*cl.iter, bag);
        for (const auto& c : cl.conds) {
            s += ":if:";
            if (c) s += expr_subtree(*c, bag);
        }
    }
    s += ")";
    bag.push_back(s);
    return s;
}

std::string suite_subtrees(const py::Suite& body, std::vector<std::string>& bag);

std::string stmt_subtree(const py::Stmt& st, std::vector<std::string>& bag) {
    std::string s = "S" + std::to_string(static_cast<int>(st.kind));
    if (!st.op.empty()) s += "[" + st.op + "]";
    if (st.kind == py::StmtKind::FunctionDef)
        s += "[p" + std::to_string(st.params.size()) + "]";
    s += "(";
    bool first = true;
    for (const auto& e : st.exprs) {
        if (!first) s += ",";
        first = false;
        s += e ? expr_subtree(*e, bag) : "_";
    }
    for (const auto& item : st.items) {
        if (!first) s += ",";
        first = false;
        s += "with:";
        if (item.cm) s += expr_subtree(*item.cm, bag);
        if (item.target) {
            s += ":as:";
            s += expr_subtree(*item.target, bag);
        }
    }
    s += "){";
    s += suite_subtrees(st.body, bag);
    s += "|";
    s += suite_subtrees(st.orelse, bag);
    s += "|";
    s += suite_subtrees(st.finally_, bag);
    for (const auto& h : st.handlers) {
        s += "|except:";
        s += suite_subtrees(h.body, bag);
    }
    s += "}";
    bag.push_back(s);
    return s;
}

std::string suite_subtrees(const py::Suite& body, std::vector<std::string>& bag) {
    std::string s;
    for (const auto& st : body) {
        if (!st) continue;
        s += stmt_subtree(*st, bag);
        s += ";";
    }
    return s;
}

// every statement/expression node plus the module root, serialized with
// identifiers normalized
std::vector<std::string> subtree_bag(const py::Module& mod) {
    std::vector<std::string> bag;
    std::string root = "M(" + suite_subtrees(mod.body, bag) + ")";
    bag.push_back(root);
    return bag;
}

// --- data-flow edges ---------------------------------------------------------

void flatten_all(const py::Suite& suite, std::vector<const py::Stmt*>& out) {
    for (const auto& sp : suite) {
        if (!sp) continue;
        out.push_back(sp.get());
        flatten_all(sp->body, out);
        flatten_all(sp->orelse, out);
        flatten_all(sp->finally_, out);
        for (const auto& h : sp->handlers) flatten_all(h.body, out);
    }
}

// (normalized variable, ordinal of the reaching definition)
std::multiset<std::pair<int, int>> dataflow_edges(const py::Module& mod) {
    std::multiset<std::pair<int, int>> edges;
    std::vector<const py::Stmt*> linear;
    flatten_all(mod.body, linear);
    std::stable_sort(linear.begin(), linear.end(), [](const py::Stmt* a, const py::Stmt* b) {
        return a->span.begin < b->span.begin;
    });

    std::map<std::string, int> first_seen; // positional normalization
    auto norm = [&](const std::string& v) {
        auto [it, _] = first_seen.try_emplace(v, static_cast<int>(first_seen.size()));
        return it->second;
    };
    std::map<std::string, int> def_ordinal; // -1 = undefined

    auto define = [&](const std::string& v) {
        norm(v);
        auto [it, inserted] = def_ordinal.try_emplace(v, 0);
        if (!inserted) ++it->second;
    };
    auto read = [&](const std::string& v) {
        int id = norm(v);
        auto it = def_ordinal.find(v);
        if (it != def_ordinal.end()) edges.insert({id, it->second});
    };

    auto read_expr = [&](const py::Expr* e) {
        if (!e) return;
        py::walk_expr_tree(*e, [&](const py::Expr& n) {
            if (n.kind == py::ExprKind::Name) read(n.str);
        });
    };
    auto define_target = [&](const py::Expr* t, auto&& self_ref) -> void {
        if (!t) return;
        switch (t->kind) {
        case py::ExprKind::Name:
            define(t->str);
            break;
        case py::ExprKind::Tuple:
        case py::ExprKind::List:
            for (const auto& c : t->elts) self_ref(c.get(), self_ref);
            break;
        case py::ExprKind::Starred:
            if (!t->elts.empty()) self_ref(t->elts[0].get(), self_ref);
            break;
        default:
            read_expr(t); // subscript/attribute bases are reads
            break;
        }
    };

    for (const py::Stmt* sp : linear) {
        const py::Stmt& s = *sp;
        switch (s.kind) {
        case py::StmtKind::Assign:
            if (!s.exprs.empty()) read_expr(s.exprs.back().get());
            for (std::size_t i = 0; i + 1 < s.exprs.size(); ++i)
                define_target(s.exprs[i].get(), define_target);
            break;
        case py::StmtKind::AugAssign:
            if (s.exprs.size() > 1) read_expr(s.exprs[1].get());
            if (!s.exprs.empty() && s.exprs[0]) {
                read_expr(s.exprs[0].get());
                define_target(s.exprs[0].get(), define_target);
            }
            break;
        case py::StmtKind::AnnAssign:
            if (s.exprs.size() > 2) read_expr(s.exprs[2].get());
            if (!s.exprs.empty()) define_target(s.exprs[0].get(), define_target);
            break;
        case py::StmtKind::For:
            if (s.exprs.size() > 1) read_expr(s.exprs[1].get());
            if (!s.exprs.empty()) define_target(s.exprs[0].get(), define_target);
            break;
        case py::StmtKind::With:
            for (const auto& item : s.items) {
                read_expr(item.cm.get());
                if (item.target) define_target(item.target.get(), define_target);
            }
            break;
        case py::StmtKind::FunctionDef:
            define(s.name);
            for (const auto& p : s.params)
                if (!p.name.empty()) define(p.name);
            break;
        case py::StmtKind::ClassDef:
            define(s.name);
            break;
        default:
            for (const auto& e : s.exprs) read_expr(e.get());
            break;
        }
        py::walk_exprs(s, [&](const py::Expr& e) {
            if (e.kind == py::ExprKind::NamedExpr && !e.elts.empty() && e.elts[0] &&
                e.elts[0]->kind == py::ExprKind::Name)
                define(e.elts[0]->str);
        });
    }
    return edges;
}

} // namespace

double ast_match_score(const std::string& candidate, const std::string& reference,
                       bool* candidate_parse_failed) {
    py::Module ref = py::parse_module(reference);
    if (!ref.ok()) return 0.0;
    py::Module cand = py::parse_module(candidate);
    if (!cand.ok()) {
        if (candidate_parse_failed) *candidate_parse_failed = true;
        return 0.0;
    }
    std::vector<std::string> ref_bag = subtree_bag(ref);
    std::vector<std::string> cand_bag = subtree_bag(cand);
    std::map<std::string, long> cand_counts;
    for (auto& s : cand_bag) ++cand_counts[s];
    std::map<std::string, long> ref_counts;
    for (auto& s : ref_bag) ++ref_counts[s];
    double matched = 0;
    for (const auto& [s, cnt] : ref_counts) {
        auto it = cand_counts.find(s);
        if (it != cand_counts.end())
            matched += static_cast<double>(std::min(cnt, it->second));
    }
    return matched / static_cast<double>(ref_bag.size());
}

double dataflow_match_score(const std::string& candidate, const std::string& reference,
                            bool* candidate_parse_failed) {
    py::Module ref = py::parse_module(reference);
    if (!ref.ok()) return 0.0;
    auto ref_edges = dataflow_edges(ref);
    if (ref_edges.empty()) return 1.0; // nothing to match
    py::Module cand = py::parse_module(candidate);
    if (!cand.ok()) {
        if (candidate_parse_failed) *candidate_parse_failed = true;
        return 0.0;
    }
    auto cand_edges = dataflow_edges(cand);
    double matched = 0;
    for (auto it = ref_edges.begin(); it != ref_edges.end();) {
        auto key = *it;
        auto ref_n = ref_edges.count(key);
        auto cand_n = cand_edges.count(key);
        matched += static_cast<double>(std::min(ref_n, cand_n));
        std::advance(it, ref_n);
    }
    return matched / static_cast<double>(ref_edges.size());
}

RougeL rouge_l(const TokenList& candidate, const TokenList& reference) {
    if (reference.empty()) throw EmptyReference("reference has no tokens");
    RougeL r;
    if (candidate.empty()) return r;
    const std::size_t n = candidate.size(), m = reference.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            dp[i][j] = candidate[i - 1] == reference[j - 1]
                           ? dp[i - 1][j - 1] + 1
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    double lcs = dp[n][m];
    r.precision = lcs / static_cast<double>(n);
    r.recall = lcs / static_cast<double>(m);
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

RougeL rouge_l_text(const std::string& candidate, const std::string& reference) {
    return rouge_l(code_tokens(candidate), code_tokens(reference));
}

CodeBleuResult codebleu(const std::string& candidate, const std::string& reference,
                        const CodeBleuWeights& weights) {
    double sum = weights.alpha + weights.beta + weights.gamma + weights.delta;
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("codebleu weights must sum to 1");
    TokenList ref_toks = code_tokens(reference);
    if (ref_toks.empty()) throw EmptyReference("reference has no tokens");
    TokenList cand_toks = code_tokens(candidate);

    CodeBleuResult r;
    r.bleu = bleu_score(cand_toks, ref_toks, false);
    r.weighted_ngram = bleu_score(cand_toks, ref_toks, true);

    py::Module cand_mod = py::parse_module(candidate);
    bool cand_failed = cand_toks.empty() || !cand_mod.ok();
    if (cand_failed) {
        // the structural components score 0 when there is nothing to parse
        r.flags.push_back("candidate_parse_failure");
        r.ast_match = 0.0;
        r.dataflow_match = 0.0;
    } else {
        r.ast_match = ast_match_score(candidate, reference, nullptr);
        r.dataflow_match = dataflow_match_score(candidate, reference, nullptr);
    }
    r.score = weights.alpha * r.bleu + weights.beta * r.weighted_ngram +
              weights.gamma * r.ast_match + weights.delta * r.dataflow_match;
    return r;
}

} // namespace callerkit
