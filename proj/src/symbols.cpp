#include "callerkit/symbols.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

namespace callerkit {

namespace {

std::vector<std::string> split_dots(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '.') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// "Generic[T]" -> "Generic"; trims whitespace
std::string base_head(const std::string& text) {
    std::string t;
    for (char c : text) {
        if (c == '[' || c == '(') break;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        t += c;
    }
    return t;
}

} // namespace

SymbolTable build_symbol_table(const FileFacts& facts) {
    struct Binding {
        int line;
        std::string name;
        SymbolEntry entry;
    };
    std::vector<Binding> bindings;

    for (const auto& imp : facts.imports) {
        SymbolEntry e;
        e.kind = imp.kind == ImportBinding::Module ? SymbolEntry::ImportedModule
                                                   : SymbolEntry::ImportedSymbol;
        e.target = imp.target_qname;
        e.line = imp.line;
        bindings.push_back({imp.line, imp.local_alias, e});
    }
    for (const auto& fn : facts.functions) {
        if (fn.is_method || fn.is_nested) continue; // module scope only
        SymbolEntry e{SymbolEntry::LocalFunc, fn.qname, fn.start_line};
        bindings.push_back({fn.start_line, fn.name, e});
    }
    for (const auto& cls : facts.classes) {
        if (cls.qname.find(".<locals>.") != std::string::npos) continue;
        // module-scope classes only: qname == module_qname + "." + name
        std::string expected =
            facts.module_qname.empty() ? cls.name : facts.module_qname + "." + cls.name;
        if (cls.qname != expected) continue;
        SymbolEntry e{SymbolEntry::LocalClass, cls.qname, cls.start_line};
        bindings.push_back({cls.start_line, cls.name, e});
    }
    for (const auto& g : facts.globals) {
        std::string target = facts.module_qname.empty() ? g.name : facts.module_qname + "." + g.name;
        SymbolEntry e{SymbolEntry::GlobalVar, target, g.line};
        bindings.push_back({g.line, g.name, e});
    }

    std::stable_sort(bindings.begin(), bindings.end(),
                     [](const Binding& a, const Binding& b) { return a.line < b.line; });
    SymbolTable table;
    for (auto& b : bindings) table.entries[b.name] = b.entry; // later lines overwrite
    return table;
}

std::vector<std::string> ClassHierarchy::mro(const std::string& cls_qname) const {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    // depth-first, declaration order
    std::function<void(const std::string&)> visit = [&](const std::string& q) {
        if (seen.count(q)) return;
        seen.insert(q);
        order.push_back(q);
        auto it = classes.find(q);
        if (it == classes.end()) return;
        for (const auto& b : it->second.bases) visit(b);
    };
    visit(cls_qname);
    return order;
}

std::optional<std::string> ClassHierarchy::resolve_method(const std::string& cls_qname,
                                                          const std::string& method) const {
    for (const auto& q : mro(cls_qname)) {
        auto it = classes.find(q);
        if (it == classes.end()) continue;
        auto mit = it->second.methods.find(method);
        if (mit != it->second.methods.end()) return mit->second;
    }
    return std::nullopt;
}

Workspace::Workspace(std::vector<FileFacts> files) : files_(std::move(files)) {
    for (std::size_t i = 0; i < files_.size(); ++i) {
        const FileFacts& f = files_[i];
        if (!f.valid) continue;
        by_module_[f.module_qname] = i;
        tables_[f.module_qname] = build_symbol_table(f);
        for (std::size_t j = 0; j < f.functions.size(); ++j)
            fn_index_[f.functions[j].qname] = {i, j};
    }
    // hierarchy pass 1: register every class so base lookups can see them all
    for (const auto& f : files_) {
        if (!f.valid) continue;
        for (const auto& cls : f.classes) {
            ClassInfo info;
            info.qname = cls.qname;
            for (const auto& m : cls.method_qnames) {
                auto dot = m.rfind('.');
                info.methods[m.substr(dot + 1)] = m;
            }
            hierarchy_.classes[cls.qname] = std::move(info);
        }
    }
    // hierarchy pass 2: resolve base names through each file's symbol table
    for (const auto& f : files_) {
        if (!f.valid) continue;
        for (const auto& cls : f.classes) {
            ClassInfo& info = hierarchy_.classes[cls.qname];
            for (const auto& bt : cls.base_texts) {
                std::string head = base_head(bt);
                if (head.empty() || head == "object") continue;
                auto resolved = resolve_class_name(head, f);
                if (resolved) info.bases.push_back(*resolved);
                else ++info.external_bases;
            }
        }
    }
}

const SymbolTable& Workspace::table(const std::string& module_qname) const {
    auto it = tables_.find(module_qname);
    return it == tables_.end() ? empty_ : it->second;
}

bool Workspace::has_module(const std::string& module_qname) const {
    return by_module_.count(module_qname) > 0;
}

const FileFacts* Workspace::module(const std::string& module_qname) const {
    auto it = by_module_.find(module_qname);
    return it == by_module_.end() ? nullptr : &files_[it->second];
}

const FunctionDecl* Workspace::function(const std::string& qname) const {
    auto it = fn_index_.find(qname);
    if (it == fn_index_.end()) return nullptr;
    return &files_[it->second.first].functions[it->second.second];
}

const FileFacts* Workspace::file_of_function(const std::string& qname) const {
    auto it = fn_index_.find(qname);
    if (it == fn_index_.end()) return nullptr;
    return &files_[it->second.first];
}

std::optional<std::string> Workspace::resolve_class_name(const std::string& name,
                                                         const FileFacts& file) const {
    auto parts = split_dots(name);
    const SymbolTable& tab = table(file.module_qname);
    const SymbolEntry* head = tab.lookup(parts[0]);
    if (!head) return std::nullopt;
    if (parts.size() == 1) {
        if (head->kind == SymbolEntry::LocalClass) return head->target;
        if (head->kind == SymbolEntry::ImportedSymbol &&
            hierarchy_.classes.count(head->target)) {
            return head->target;
        }
        return std::nullopt;
    }
    if (head->kind != SymbolEntry::ImportedModule) return std::nullopt;
    // walk module path: mod.sub.Class
    std::string cur = head->target;
    for (std::size_t i = 1; i + 1 < parts.size(); ++i) {
        cur += "." + parts[i];
        if (!has_module(cur)) return std::nullopt;
    }
    std::string cls = cur + "." + parts.back();
    if (hierarchy_.classes.count(cls)) return cls;
    return std::nullopt;
}

Resolution Workspace::constructor_of(const std::string& cls_qname) const {
    auto init = hierarchy_.resolve_method(cls_qname, "__init__");
    if (init) return {ResolutionKind::Resolved, {*init}, "constructor"};
    return {ResolutionKind::Unresolved, {}, "constructor_default_init"};
}

Resolution Workspace::resolve_symbol_target(const SymbolEntry& entry) const {
    switch (entry.kind) {
    case SymbolEntry::LocalFunc:
        return {ResolutionKind::Resolved, {entry.target}, ""};
    case SymbolEntry::LocalClass:
        return constructor_of(entry.target);
    case SymbolEntry::ImportedSymbol: {
        if (function(entry.target)) return {ResolutionKind::Resolved, {entry.target}, ""};
        if (hierarchy_.classes.count(entry.target)) return constructor_of(entry.target);
        // from pkg import sub  (module imported as a symbol)
        if (has_module(entry.target)) return {ResolutionKind::Unresolved, {}, "module_called"};
        auto dot = entry.target.rfind('.');
        std::string owner = dot == std::string::npos ? "" : entry.target.substr(0, dot);
        if (!owner.empty() && has_module(owner))
            return {ResolutionKind::Unresolved, {}, "missing_symbol"};
        return {ResolutionKind::External, {}, "external_import"};
    }
    case SymbolEntry::ImportedModule:
        if (has_module(entry.target)) return {ResolutionKind::Unresolved, {}, "module_called"};
        return {ResolutionKind::External, {}, "external_import"};
    case SymbolEntry::GlobalVar:
        return {ResolutionKind::Unresolved, {}, "first_class_value"};
    }
    return {ResolutionKind::Unresolved, {}, "unknown"};
}

Resolution Workspace::resolve_plain_name(const CallSite& site, const FileFacts& file,
                                         const FunctionDecl& caller) const {
    const std::string& name = site.func_name;

    // lexical scope chain: innermost function outward
    std::string scope = caller.qname; // a def inside `scope` has qname scope.<locals>.name
    for (;;) {
        const FunctionDecl* scope_fn = function(scope);
        if (scope_fn) {
            if (const FunctionDecl* nested = function(scope + ".<locals>." + name))
                return {ResolutionKind::Resolved, {nested->qname}, ""};
            if (scope_fn->local_names.count(name))
                return {ResolutionKind::Unresolved, {}, "first_class_value"};
        }
        auto pos = scope.rfind(".<locals>.");
        if (pos == std::string::npos) break;
        scope = scope.substr(0, pos);
    }

    const SymbolTable& tab = table(file.module_qname);
    if (const SymbolEntry* e = tab.lookup(name)) return resolve_symbol_target(*e);

    // star imports: all matching top-level functions/classes across them
    std::vector<std::string> candidates;
    for (const auto& sm : file.star_import_modules) {
        const FileFacts* m = module(sm);
        if (!m) continue;
        std::string q = m->module_qname.empty() ? name : m->module_qname + "." + name;
        if (const FunctionDecl* f = function(q)) {
            if (!f->is_method && !f->is_nested) candidates.push_back(q);
        } else if (hierarchy_.classes.count(q)) {
            Resolution ctor = constructor_of(q);
            if (ctor.kind == ResolutionKind::Resolved) candidates.push_back(ctor.qnames[0]);
        }
    }
    if (candidates.size() == 1) return {ResolutionKind::Resolved, std::move(candidates), ""};
    if (candidates.size() > 1) return {ResolutionKind::Resolved, std::move(candidates), "star_import_ambiguous"};

    if (is_python_builtin(name)) return {ResolutionKind::External, {}, "builtin"};
    return {ResolutionKind::Unresolved, {}, "undefined_name"};
}

Resolution Workspace::resolve_in_module_context(const std::string& module_qname,
                                                const std::vector<std::string>& chain_rest,
                                                const std::string& func_name) const {
    std::string cur = module_qname;
    std::size_t i = 0;
    for (; i < chain_rest.size(); ++i) {
        std::string next = cur + "." + chain_rest[i];
        if (has_module(next)) {
            cur = next;
            continue;
        }
        if (hierarchy_.classes.count(next)) {
            // C.m() style unbound method access; anything deeper is dynamic
            if (i + 1 != chain_rest.size())
                return {ResolutionKind::Unresolved, {}, "dynamic_attribute"};
            auto m = hierarchy_.resolve_method(next, func_name);
            if (m) return {ResolutionKind::Resolved, {*m}, ""};
            return {ResolutionKind::Unresolved, {}, "method_not_found"};
        }
        return {ResolutionKind::Unresolved, {}, "missing_symbol"};
    }
    std::string q = cur + "." + func_name;
    if (const FunctionDecl* f = function(q)) {
        if (!f->is_method && !f->is_nested) return {ResolutionKind::Resolved, {q}, ""};
    }
    if (hierarchy_.classes.count(q)) return constructor_of(q);
    return {ResolutionKind::Unresolved, {}, "missing_symbol"};
}

Resolution Workspace::resolve_attribute(const CallSite& site, const FileFacts& file,
                                        const FunctionDecl& caller) const {
    auto chain = split_dots(site.receiver_chain);
    const std::string& head = chain[0];

    // self/cls through the inheritance chain, nearest definition first
    if ((head == "self" || head == "cls") && caller.is_method && caller.enclosing_class) {
        if (chain.size() != 1) return {ResolutionKind::Unresolved, {}, "dynamic_attribute"};
        auto m = hierarchy_.resolve_method(*caller.enclosing_class, site.func_name);
        if (m) return {ResolutionKind::Resolved, {*m}, ""};
        return {ResolutionKind::Unresolved, {}, "method_not_found"};
    }

    // literal constructor-typed local: last assignment before the call wins
    if (chain.size() == 1 && caller.local_names.count(head)) {
        const VarAssign* last = nullptr;
        for (const auto& va : caller.var_assigns) {
            if (va.var != head) continue;
            if (va.line > site.line) break;
            last = &va;
        }
        if (last && last->is_ctor) {
            auto cls = resolve_class_name(last->ctor_text, file);
            if (cls) {
                auto m = hierarchy_.resolve_method(*cls, site.func_name);
                if (m) return {ResolutionKind::Resolved, {*m}, ""};
                return {ResolutionKind::Unresolved, {}, "method_not_found"};
            }
            // constructed from an external class
            const SymbolTable& tab = table(file.module_qname);
            auto parts = split_dots(last->ctor_text);
            if (const SymbolEntry* e = tab.lookup(parts[0])) {
                if (e->kind == SymbolEntry::ImportedModule || e->kind == SymbolEntry::ImportedSymbol) {
                    if (!has_module(e->target)) return {ResolutionKind::External, {}, "external_type"};
                }
            }
        }
        return {ResolutionKind::Unresolved, {}, "untyped_local"};
    }

    const SymbolTable& tab = table(file.module_qname);
    const SymbolEntry* e = tab.lookup(head);
    if (!e) {
        if (is_python_builtin(head)) return {ResolutionKind::External, {}, "builtin"};
        return {ResolutionKind::Unresolved, {}, "unknown_receiver"};
    }
    std::vector<std::string> rest(chain.begin() + 1, chain.end());
    switch (e->kind) {
    case SymbolEntry::ImportedModule:
        if (!has_module(e->target)) return {ResolutionKind::External, {}, "external_import"};
        return resolve_in_module_context(e->target, rest, site.func_name);
    case SymbolEntry::LocalClass: {
        if (!rest.empty()) return {ResolutionKind::Unresolved, {}, "dynamic_attribute"};
        auto m = hierarchy_.resolve_method(e->target, site.func_name);
        if (m) return {ResolutionKind::Resolved, {*m}, ""};
        return {ResolutionKind::Unresolved, {}, "method_not_found"};
    }
    case SymbolEntry::ImportedSymbol: {
        if (hierarchy_.classes.count(e->target)) {
            if (!rest.empty()) return {ResolutionKind::Unresolved, {}, "dynamic_attribute"};
            auto m = hierarchy_.resolve_method(e->target, site.func_name);
            if (m) return {ResolutionKind::Resolved, {*m}, ""};
            return {ResolutionKind::Unresolved, {}, "method_not_found"};
        }
        if (has_module(e->target)) return resolve_in_module_context(e->target, rest, site.func_name);
        auto dot = e->target.rfind('.');
        std::string owner = dot == std::string::npos ? "" : e->target.substr(0, dot);
        if (!owner.empty() && has_module(owner))
            return {ResolutionKind::Unresolved, {}, "missing_symbol"};
        return {ResolutionKind::External, {}, "external_import"};
    }
    case SymbolEntry::GlobalVar:
        return {ResolutionKind::Unresolved, {}, "untyped_global"};
    case SymbolEntry::LocalFunc:
        return {ResolutionKind::Unresolved, {}, "dynamic_attribute"};
    }
    return {ResolutionKind::Unresolved, {}, "unknown"};
}

Resolution Workspace::resolve_call(const CallSite& site) const {
    const FunctionDecl* caller = function(site.caller_qname);
    const FileFacts* file = file_of_function(site.caller_qname);
    if (!caller || !file) return {ResolutionKind::Unresolved, {}, "unknown_caller"};
    if (site.dynamic_receiver || site.func_name.empty())
        return {ResolutionKind::Unresolved, {}, "dynamic_receiver"};
    if (site.receiver_chain.empty()) return resolve_plain_name(site, *file, *caller);
    return resolve_attribute(site, *file, *caller);
}

bool is_python_builtin(const std::string& name) {
    static const std::unordered_set<std::string> kBuiltins = {
        "abs",        "aiter",     "all",       "any",        "anext",    "ascii",
        "bin",        "bool",      "breakpoint","bytearray",  "bytes",    "callable",
        "chr",        "classmethod","compile",  "complex",    "delattr",  "dict",
        "dir",        "divmod",    "enumerate", "eval",       "exec",     "filter",
        "float",      "format",    "frozenset", "getattr",    "globals",  "hasattr",
        "hash",       "help",      "hex",       "id",         "input",    "int",
        "isinstance", "issubclass","iter",      "len",        "list",     "locals",
        "map",        "max",       "memoryview","min",        "next",     "object",
        "oct",        "open",      "ord",       "pow",        "print",    "property",
        "range",      "repr",      "reversed",  "round",      "set",      "setattr",
        "slice",      "sorted",    "staticmethod","str",      "sum",      "super",
        "tuple",      "type",      "vars",      "zip",        "__import__",
        "Exception",  "BaseException", "ValueError", "TypeError", "KeyError",
        "IndexError", "AttributeError", "RuntimeError", "StopIteration",
        "NotImplementedError", "FileNotFoundError", "OSError", "IOError",
        "ZeroDivisionError", "ArithmeticError", "AssertionError", "LookupError",
        "NameError", "OverflowError", "PermissionError", "TimeoutError",
        "UnicodeDecodeError", "UnicodeEncodeError", "Warning", "DeprecationWarning"};
    return kBuiltins.count(name) > 0;
}

} // namespace callerkit
