#pragma once

#include "callerkit/facts.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace callerkit {

struct SymbolEntry {
    enum Kind { LocalFunc, LocalClass, ImportedModule, ImportedSymbol, GlobalVar } kind;
    std::string target; // fully qualified target
    int line = 0;       // binding line; later bindings shadow earlier ones
};

struct SymbolTable {
    std::map<std::string, SymbolEntry> entries;

    const SymbolEntry* lookup(const std::string& name) const {
        auto it = entries.find(name);
        return it == entries.end() ? nullptr : &it->second;
    }
};

// Module-scope name map for one file: local defs, import aliases, class
// names and globals, later bindings shadowing earlier ones.
SymbolTable build_symbol_table(const FileFacts& facts);

struct ClassInfo {
    std::string qname;
    std::vector<std::string> bases; // resolved internal base qnames, declaration order
    std::size_t external_bases = 0;
    std::map<std::string, std::string> methods; // unqualified name -> method qname
};

class ClassHierarchy {
public:
    std::map<std::string, ClassInfo> classes;

    // Depth-first linearization in declaration order, duplicates dropped.
    std::vector<std::string> mro(const std::string& cls_qname) const;

    // Nearest definition first along the mro.
    std::optional<std::string> resolve_method(const std::string& cls_qname,
                                              const std::string& method) const;
};

enum class ResolutionKind { Resolved, External, Unresolved };

struct Resolution {
    ResolutionKind kind = ResolutionKind::Unresolved;
    std::vector<std::string> qnames; // >1 marks an ambiguous resolution
    std::string detail;              // diagnostic category

    bool ambiguous() const { return qnames.size() > 1; }
};

// All parsed files of one repository snapshot plus the indexes needed for
// cross-module name resolution. Files are immutable after construction.
class Workspace {
public:
    explicit Workspace(std::vector<FileFacts> files);

    const std::vector<FileFacts>& files() const { return files_; }
    const ClassHierarchy& hierarchy() const { return hierarchy_; }
    const SymbolTable& table(const std::string& module_qname) const;

    bool has_module(const std::string& module_qname) const;
    const FileFacts* module(const std::string& module_qname) const;
    const FunctionDecl* function(const std::string& qname) const;
    const FileFacts* file_of_function(const std::string& qname) const;

    // Consults local definitions, the symbol table and inheritance analysis.
    Resolution resolve_call(const CallSite& site) const;

    // Resolves a (possibly dotted) name in a file context to a class qname.
    std::optional<std::string> resolve_class_name(const std::string& name,
                                                  const FileFacts& file) const;

private:
    Resolution resolve_plain_name(const CallSite& site, const FileFacts& file,
                                  const FunctionDecl& caller) const;
    Resolution resolve_attribute(const CallSite& site, const FileFacts& file,
                                 const FunctionDecl& caller) const;
    Resolution resolve_symbol_target(const SymbolEntry& entry) const;
    Resolution resolve_in_module_context(const std::string& module_qname,
                                         const std::vector<std::string>& chain_rest,
                                         const std::string& func_name) const;
    Resolution constructor_of(const std::string& cls_qname) const;

    std::vector<FileFacts> files_;
    std::map<std::string, std::size_t> by_module_;
    std::map<std::string, SymbolTable> tables_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> fn_index_; // qname -> (file, fn)
    ClassHierarchy hierarchy_;
    SymbolTable empty_;
};

bool is_python_builtin(const std::string& name);

} // namespace callerkit
