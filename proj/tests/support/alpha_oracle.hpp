#pragma once

// Alpha-equivalence oracle: structural AST serialization with identifiers
// replaced by first-occurrence ordinals. Independent of the token-rewriting
// path inside semantics_preserving_perturb.

#include "callerkit/pyast.hpp"

#include <map>
#include <set>
#include <string>

namespace ck_test {

struct AlphaNormalizer {
    std::set<std::string> preserved;
    std::map<std::string, int> ids;
    std::string out;

    std::string norm(const std::string& name) {
        if (preserved.count(name)) return name;
        auto [it, inserted] = ids.try_emplace(name, static_cast<int>(ids.size()));
        return "#" + std::to_string(it->second);
    }

    void expr(const callerkit::py::Expr* e) {
        using callerkit::py::ExprKind;
        if (!e) {
            out += "_";
            return;
        }
        out += std::to_string(static_cast<int>(e->kind));
        out += "(";
        if (e->kind == ExprKind::Name) out += norm(e->str);
        else if (e->kind == ExprKind::Attribute) out += "." + e->str;
        else if (e->kind == ExprKind::Constant) out += e->str;
        else if (!e->str.empty() && e->kind != ExprKind::Lambda) out += e->str;
        for (const auto& c : e->elts) {
            out += ",";
            expr(c.get());
        }
        for (const auto& kw : e->keywords) {
            out += ",kw:" + kw.name + "=";
            expr(kw.value.get());
        }
        for (const auto& cl : e->comps) {
            out += ",for:";
            expr(cl.target.get());
            out += ":in:";
            expr(cl.iter.get());
            for (const auto& c : cl.conds) {
                out += ":if:";
                expr(c.get());
            }
        }
        for (const auto& op : e->ops) out += ";" + op;
        out += ")";
    }

    void stmt(const callerkit::py::Stmt& s) {
        using callerkit::py::StmtKind;
        out += "S" + std::to_string(static_cast<int>(s.kind));
        if (s.kind == StmtKind::FunctionDef || s.kind == StmtKind::ClassDef) {
            out += " " + norm(s.name) + "[";
            for (const auto& p : s.params)
                out += norm(p.name) + (p.default_value.empty() ? "" : "=d");
            out += "]";
        }
        if (!s.op.empty()) out += s.op;
        out += "{";
        for (const auto& e : s.exprs) {
            expr(e.get());
            out += ";";
        }
        for (const auto& item : s.items) {
            expr(item.cm.get());
            out += "as";
            expr(item.target.get());
        }
        suite(s.body);
        out += "|";
        suite(s.orelse);
        out += "|";
        suite(s.finally_);
        for (const auto& h : s.handlers) {
            out += "except " + h.type_text + " as " + norm(h.bind_name) + ":";
            suite(h.body);
        }
        out += "}";
    }

    void suite(const callerkit::py::Suite& body) {
        for (const auto& sp : body)
            if (sp) stmt(*sp);
    }
};

// Returns "" when the text does not parse.
inline std::string alpha_normalize(const std::string& text,
                                   const std::set<std::string>& preserved) {
    callerkit::py::Module mod = callerkit::py::parse_module(text);
    if (!mod.ok()) return "";
    AlphaNormalizer n;
    n.preserved = preserved;
    n.suite(mod.body);
    return n.out;
}

} // namespace ck_test
