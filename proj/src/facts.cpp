#include "callerkit/facts.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace callerkit {

using py::Expr;
using py::ExprKind;
using py::Module;
using py::Stmt;
using py::StmtKind;

namespace {

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Dotted receiver chain below an Attribute node; empty when any link is not a
// plain name (call results, subscripts, literals).
bool dotted_chain(const Expr& value, std::string& out) {
    if (value.kind == ExprKind::Name) {
        out = value.str;
        return true;
    }
    if (value.kind == ExprKind::Attribute) {
        std::string prefix;
        if (!dotted_chain(*value.elts[0], prefix)) return false;
        out = prefix + "." + value.str;
        return true;
    }
    return false;
}

void collect_target_names(const Expr& target, std::set<std::string>& names) {
    switch (target.kind) {
    case ExprKind::Name:
        names.insert(target.str);
        break;
    case ExprKind::Tuple:
    case ExprKind::List:
        for (const auto& c : target.elts)
            if (c) collect_target_names(*c, names);
        break;
    case ExprKind::Starred:
        if (!target.elts.empty() && target.elts[0]) collect_target_names(*target.elts[0], names);
        break;
    default:
        break; // attribute/subscript targets bind no local name
    }
}

class Extractor {
public:
    Extractor(const Module& mod, FileFacts& facts) : mod_(mod), facts_(facts) {}

    void run() {
        std::string prefix = facts_.module_qname.empty() ? "" : facts_.module_qname + ".";
        walk_suite(mod_.body, prefix, /*cls=*/nullptr, /*fn=*/nullptr, /*module_level=*/true);
        facts_.functions.assign(fns_.begin(), fns_.end());
        facts_.classes.assign(classes_.begin(), classes_.end());
    }

private:
    const Module& mod_;
    FileFacts& facts_;
    // deques keep references stable while nested declarations are appended
    std::deque<FunctionDecl> fns_;
    std::deque<ClassDecl> classes_;

    std::string text(const py::Span& s) const { return std::string(mod_.text(s)); }

    void walk_suite(const py::Suite& suite, const std::string& prefix, ClassDecl* cls,
                    FunctionDecl* fn, bool module_level) {
        for (const auto& sp : suite) {
            if (!sp) continue;
            const Stmt& s = *sp;
            switch (s.kind) {
            case StmtKind::FunctionDef:
                handle_function(s, prefix, cls, fn != nullptr);
                break;
            case StmtKind::ClassDef:
                handle_class(s, prefix, fn != nullptr);
                break;
            case StmtKind::Import:
                for (const auto& item : s.imports) {
                    ImportBinding b;
                    b.kind = ImportBinding::Module;
                    b.line = s.span.line;
                    if (!item.alias.empty()) {
                        b.local_alias = item.alias;
                        b.target_qname = item.module;
                    } else {
                        // `import a.b` binds the top-level package name
                        auto dot = item.module.find('.');
                        b.local_alias = item.module.substr(0, dot);
                        b.target_qname = b.local_alias;
                    }
                    facts_.imports.push_back(std::move(b));
                }
                break;
            case StmtKind::ImportFrom:
                for (const auto& item : s.imports) {
                    std::string base = resolve_relative(item.module, item.level);
                    if (item.is_star) {
                        facts_.star_import_modules.push_back(base);
                        continue;
                    }
                    ImportBinding b;
                    b.kind = ImportBinding::Symbol;
                    b.line = s.span.line;
                    b.local_alias = item.alias.empty() ? item.orig_name : item.alias;
                    b.target_qname = base.empty() ? item.orig_name : base + "." + item.orig_name;
                    facts_.imports.push_back(std::move(b));
                }
                break;
            case StmtKind::Assign:
            case StmtKind::AnnAssign:
            case StmtKind::AugAssign:
                if (module_level) {
                    std::set<std::string> names;
                    std::size_t ntargets =
                        s.kind == StmtKind::Assign ? s.exprs.size() - 1 : 1;
                    for (std::size_t i = 0; i < ntargets && i < s.exprs.size(); ++i)
                        if (s.exprs[i]) collect_target_names(*s.exprs[i], names);
                    for (const auto& n : names) facts_.globals.push_back({n, s.span.line});
                }
                record_assignments(s, fn);
                break;
            default:
                record_assignments(s, fn);
                break;
            }
            if (fn) collect_calls_in_stmt(s, *fn);
            // descend into compound suites within the same scope
            if (s.kind != StmtKind::FunctionDef && s.kind != StmtKind::ClassDef) {
                walk_suite(s.body, prefix, cls, fn, module_level);
                walk_suite(s.orelse, prefix, cls, fn, module_level);
                walk_suite(s.finally_, prefix, cls, fn, module_level);
                for (const auto& h : s.handlers) {
                    if (fn && !h.bind_name.empty()) fn->local_names.insert(h.bind_name);
                    walk_suite(h.body, prefix, cls, fn, module_level);
                }
            }
        }
    }

    std::string resolve_relative(const std::string& module, int level) const {
        if (level == 0) return module;
        // anchor: the package containing this module
        std::vector<std::string> parts;
        std::string cur;
        for (char c : facts_.module_qname) {
            if (c == '.') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) parts.push_back(cur);
        bool is_package = facts_.module_path.find("__init__.py") != std::string::npos;
        int drop = is_package ? level - 1 : level;
        while (drop > 0 && !parts.empty()) {
            parts.pop_back();
            --drop;
        }
        std::string base;
        for (const auto& p : parts) {
            if (!base.empty()) base += ".";
            base += p;
        }
        if (module.empty()) return base;
        return base.empty() ? module : base + "." + module;
    }

    void handle_function(const Stmt& s, const std::string& prefix, ClassDecl* cls, bool nested_in_fn) {
        FunctionDecl fd;
        fd.name = s.name;
        fd.qname = prefix + s.name;
        fd.header_text = text(s.header_span);
        fd.is_method = cls != nullptr;
        fd.is_async = s.is_async;
        fd.is_nested = nested_in_fn;
        if (cls) fd.enclosing_class = cls->qname;
        fd.start_line = s.header_span.line;
        fd.end_line = s.span.end_line;
        for (const auto& d : s.decorators) fd.decorators.push_back(d);
        for (const auto& p : s.params) {
            ParamInfo pi;
            pi.name = p.name;
            pi.annotation = p.annotation;
            pi.default_value = p.default_value;
            pi.kind = p.kind == py::Param::Star
                          ? ParamInfo::Star
                          : (p.kind == py::Param::DoubleStar ? ParamInfo::DoubleStar : ParamInfo::Plain);
            fd.params.push_back(std::move(pi));
            if (!p.name.empty()) fd.local_names.insert(p.name);
        }
        if (!s.body.empty()) {
            py::Span body_span;
            body_span.begin = s.body.front()->span.begin;
            body_span.end = s.body.back()->span.end;
            fd.body_text = text(body_span);
            py::Span full;
            full.begin = s.header_span.begin;
            full.end = s.body.back()->span.end;
            fd.full_text = text(full);
            // docstring: leading plain-string expression statement
            const Stmt& first = *s.body.front();
            if (first.kind == StmtKind::ExprStmt && !first.exprs.empty() && first.exprs[0] &&
                first.exprs[0]->kind == ExprKind::Constant &&
                first.exprs[0]->cval == py::ConstKind::Str) {
                fd.docstring = first.exprs[0]->str;
            }
        } else {
            fd.full_text = fd.header_text;
        }

        fns_.push_back(std::move(fd));
        FunctionDecl* self = &fns_.back();
        if (cls) cls->method_qnames.push_back(self->qname);

        std::string child_prefix = self->qname + ".<locals>.";
        walk_suite(s.body, child_prefix, nullptr, self, /*module_level=*/false);
        finalize_locals(*self, s);
    }

    void finalize_locals(FunctionDecl& fd, const Stmt& s) {
        // names declared global/nonlocal are not plain locals
        std::function<void(const py::Suite&)> scan = [&](const py::Suite& suite) {
            for (const auto& sp : suite) {
                if (!sp) continue;
                if (sp->kind == StmtKind::Global || sp->kind == StmtKind::Nonlocal) {
                    for (const auto& n : sp->names) fd.local_names.erase(n);
                }
                if (sp->kind == StmtKind::FunctionDef || sp->kind == StmtKind::ClassDef) continue;
                scan(sp->body);
                scan(sp->orelse);
                scan(sp->finally_);
                for (const auto& h : sp->handlers) scan(h.body);
            }
        };
        scan(s.body);
    }

    void handle_class(const Stmt& s, const std::string& prefix, bool nested_in_fn) {
        ClassDecl cd;
        cd.name = s.name;
        cd.qname = prefix + s.name;
        cd.base_texts = s.bases;
        cd.start_line = s.header_span.line;
        cd.end_line = s.span.end_line;
        classes_.push_back(std::move(cd));
        ClassDecl* self = &classes_.back();
        (void)nested_in_fn;
        std::string child_prefix = self->qname + ".";
        walk_class_body(s.body, child_prefix, self);
    }

    void walk_class_body(const py::Suite& suite, const std::string& prefix, ClassDecl* cls) {
        for (const auto& sp : suite) {
            if (!sp) continue;
            const Stmt& s = *sp;
            if (s.kind == StmtKind::FunctionDef) {
                handle_function(s, prefix, cls, false);
            } else if (s.kind == StmtKind::ClassDef) {
                handle_class(s, prefix, false);
            } else if (s.kind == StmtKind::If || s.kind == StmtKind::Try) {
                walk_class_body(s.body, prefix, cls);
                walk_class_body(s.orelse, prefix, cls);
                walk_class_body(s.finally_, prefix, cls);
                for (const auto& h : s.handlers) walk_class_body(h.body, prefix, cls);
            }
        }
    }

    void record_assignments(const Stmt& s, FunctionDecl* fn) {
        if (!fn) return;
        auto add_assign = [&](const Expr& target, const Expr* value, int line) {
            std::set<std::string> names;
            collect_target_names(target, names);
            for (const auto& n : names) fn->local_names.insert(n);
            if (names.size() == 1 && target.kind == ExprKind::Name && value) {
                VarAssign va;
                va.var = *names.begin();
                va.line = line;
                if (value->kind == ExprKind::Call && !value->elts.empty() && value->elts[0]) {
                    std::string chain;
                    if (dotted_chain(*value->elts[0], chain)) {
                        va.is_ctor = true;
                        va.ctor_text = chain;
                    }
                }
                fn->var_assigns.push_back(std::move(va));
            } else {
                for (const auto& n : names) fn->var_assigns.push_back({n, "", line, false});
            }
        };
        switch (s.kind) {
        case StmtKind::Assign: {
            const Expr* value = s.exprs.empty() ? nullptr : s.exprs.back().get();
            for (std::size_t i = 0; i + 1 < s.exprs.size(); ++i)
                if (s.exprs[i]) add_assign(*s.exprs[i], value, s.span.line);
            break;
        }
        case StmtKind::AnnAssign:
            if (!s.exprs.empty() && s.exprs[0])
                add_assign(*s.exprs[0], s.exprs.size() > 2 ? s.exprs[2].get() : nullptr, s.span.line);
            break;
        case StmtKind::AugAssign:
            if (!s.exprs.empty() && s.exprs[0]) add_assign(*s.exprs[0], nullptr, s.span.line);
            break;
        case StmtKind::For:
            if (!s.exprs.empty() && s.exprs[0]) add_assign(*s.exprs[0], nullptr, s.span.line);
            break;
        case StmtKind::With:
            for (const auto& item : s.items)
                if (item.target) add_assign(*item.target, nullptr, s.span.line);
            break;
        default:
            break;
        }
        // walrus targets anywhere in the statement's expressions
        py::walk_exprs(s, [&](const Expr& e) {
            if (e.kind == ExprKind::NamedExpr && !e.elts.empty() && e.elts[0] &&
                e.elts[0]->kind == ExprKind::Name) {
                fn->local_names.insert(e.elts[0]->str);
                fn->var_assigns.push_back({e.elts[0]->str, "", e.span.line, false});
            }
        });
    }

    void collect_calls_in_stmt(const Stmt& s, FunctionDecl& fn) {
        bool simple = s.kind != StmtKind::If && s.kind != StmtKind::While &&
                      s.kind != StmtKind::For && s.kind != StmtKind::With &&
                      s.kind != StmtKind::Try && s.kind != StmtKind::FunctionDef &&
                      s.kind != StmtKind::ClassDef && s.kind != StmtKind::Match;
        std::string stmt_text = simple ? text(s.span) : text(s.header_span);
        py::walk_exprs(s, [&](const Expr& e) {
            if (e.kind != ExprKind::Call || e.elts.empty() || !e.elts[0]) return;
            const Expr& func = *e.elts[0];
            CallSite site;
            site.caller_qname = fn.qname;
            site.callee_expr_text = text(e.span);
            site.line = e.span.line;
            site.col = e.span.col;
            site.enclosing_statement_text = stmt_text;
            site.in_simple_stmt = simple;
            for (std::size_t i = 1; i < e.elts.size(); ++i)
                if (e.elts[i]) site.arg_texts.push_back(text(e.elts[i]->span));
            for (const auto& kw : e.keywords)
                if (!kw.name.empty()) site.keyword_names.push_back(kw.name);
            if (func.kind == ExprKind::Name) {
                site.func_name = func.str;
            } else if (func.kind == ExprKind::Attribute) {
                site.func_name = func.str;
                std::string chain;
                if (!func.elts.empty() && func.elts[0] && dotted_chain(*func.elts[0], chain)) {
                    site.receiver_chain = chain;
                } else {
                    site.dynamic_receiver = true;
                    if (!func.elts.empty() && func.elts[0])
                        site.receiver_chain = text(func.elts[0]->span);
                }
            } else {
                // calling a call result / subscript / lambda: dynamic
                site.dynamic_receiver = true;
                site.func_name = "";
            }
            facts_.calls.push_back(std::move(site));
        });
    }
};

} // namespace

const FunctionDecl* FileFacts::find_function(const std::string& qname) const {
    for (const auto& f : functions)
        if (f.qname == qname) return &f;
    return nullptr;
}

std::string module_qname_from_path(const std::string& module_path) {
    std::string p = module_path;
    if (p.rfind("./", 0) == 0) p = p.substr(2);
    if (p.size() > 3 && p.substr(p.size() - 3) == ".py") p = p.substr(0, p.size() - 3);
    std::string q;
    q.reserve(p.size());
    for (char c : p) q += (c == '/' || c == '\\') ? '.' : c;
    const std::string init = "__init__";
    if (q == init) return "";
    if (q.size() > init.size() + 1 && q.substr(q.size() - init.size() - 1) == "." + init)
        q = q.substr(0, q.size() - init.size() - 1);
    return q;
}

namespace {

// UTF-8 validity per the subject language's default source encoding
bool utf8_valid(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        int extra;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0) extra = 3;
        else return false;
        if (i + extra >= s.size() && extra > 0) return false;
        for (int k = 1; k <= extra; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        i += extra + 1;
    }
    return true;
}

} // namespace

FileFacts parse_file(std::string_view source, const std::string& module_path) {
    FileFacts facts;
    facts.module_path = module_path;
    facts.module_qname = module_qname_from_path(module_path);
    if (source.find('\0') != std::string_view::npos || !utf8_valid(source)) {
        facts.valid = false;
        facts.diagnostics.push_back({"decode error: not valid UTF-8 text", 1, 0});
        return facts;
    }
    Module mod = py::parse_module(source);
    if (!mod.ok()) {
        facts.valid = false;
        facts.diagnostics = mod.errors;
        return facts;
    }
    Extractor(mod, facts).run();
    std::stable_sort(facts.functions.begin(), facts.functions.end(),
                     [](const FunctionDecl& a, const FunctionDecl& b) {
                         return a.start_line < b.start_line;
                     });
    // redefinitions shadow earlier declarations; one decl per qualified name,
    // and call sites inside shadowed bodies go with them
    std::map<std::string, std::size_t> last_by_qname;
    for (std::size_t i = 0; i < facts.functions.size(); ++i)
        last_by_qname[facts.functions[i].qname] = i;
    if (last_by_qname.size() != facts.functions.size()) {
        std::vector<FunctionDecl> kept;
        std::vector<std::pair<int, int>> dropped_spans;
        for (std::size_t i = 0; i < facts.functions.size(); ++i) {
            if (last_by_qname[facts.functions[i].qname] == i) {
                kept.push_back(std::move(facts.functions[i]));
            } else {
                dropped_spans.emplace_back(facts.functions[i].start_line,
                                           facts.functions[i].end_line);
                facts.diagnostics.push_back(
                    {"redefinition shadows " + facts.functions[i].qname,
                     facts.functions[i].start_line, 0});
            }
        }
        facts.functions = std::move(kept);
        std::vector<CallSite> calls;
        for (auto& site : facts.calls) {
            bool in_dropped = false;
            for (auto [b, e] : dropped_spans)
                if (site.line >= b && site.line <= e) in_dropped = true;
            if (!in_dropped) calls.push_back(std::move(site));
        }
        facts.calls = std::move(calls);
    }
    return facts;
}

std::vector<FileFacts> parse_repo_tree(const std::string& root) {
    namespace fs = std::filesystem;
    std::vector<std::string> rel_paths;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".py") continue;
        rel_paths.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(rel_paths.begin(), rel_paths.end());
    std::vector<FileFacts> out;
    out.reserve(rel_paths.size());
    for (const auto& rel : rel_paths) {
        std::ifstream in(fs::path(root) / rel, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out.push_back(parse_file(ss.str(), rel));
    }
    return out;
}

} // namespace callerkit
