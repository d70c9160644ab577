#pragma once

#include "callerkit/pyast.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace callerkit {

struct ParamInfo {
    std::string name;
    std::string annotation;     // verbatim annotation text, "" when absent
    std::string default_value;  // verbatim default text, "" when absent
    enum Kind { Plain, Star, DoubleStar } kind = Plain;
};

// One assignment to a local variable, kept in source order for the
// constructor-typed-local rule and the def-use slicer.
struct VarAssign {
    std::string var;
    std::string ctor_text; // dotted callee when the value is `Name(...)`, else ""
    int line = 0;
    bool is_ctor = false;
};

struct FunctionDecl {
    std::string qname;
    std::string header_text; // signature from `def` through ':'
    std::string body_text;   // suite verbatim
    std::string full_text;   // header + body verbatim (decorators excluded)
    std::optional<std::string> docstring;
    int start_line = 0; // of the def keyword
    int end_line = 0;
    std::vector<ParamInfo> params;
    std::vector<std::string> decorators;
    bool is_method = false;
    bool is_async = false;
    bool is_nested = false;
    std::optional<std::string> enclosing_class; // class qname

    // resolution support
    std::set<std::string> local_names;  // plain data variables bound in the body
    std::vector<VarAssign> var_assigns; // source order
    std::string name;                   // unqualified
};

struct ClassDecl {
    std::string name;
    std::string qname;
    std::vector<std::string> base_texts; // verbatim base expressions
    std::vector<std::string> method_qnames;
    int start_line = 0;
    int end_line = 0;
};

struct ImportBinding {
    std::string local_alias;
    std::string target_qname;
    enum Kind { Module, Symbol } kind = Module;
    int line = 0;
};

struct GlobalVar {
    std::string name;
    int line = 0;
};

struct CallSite {
    std::string caller_qname;
    std::string callee_expr_text; // verbatim call expression
    std::string receiver_chain;   // dotted chain before the call, "" for plain names
    std::string func_name;        // rightmost called name
    int line = 0;
    int col = 0;
    std::string enclosing_statement_text; // simple statement, else compound header
    bool in_simple_stmt = false;
    std::vector<std::string> arg_texts;
    std::vector<std::string> keyword_names;
    bool dynamic_receiver = false; // receiver is not a plain dotted name
};

struct FileFacts {
    std::string module_path;
    std::string module_qname;
    bool valid = true;
    std::vector<py::Diag> diagnostics;
    std::vector<FunctionDecl> functions; // methods and nested functions included
    std::vector<ClassDecl> classes;
    std::vector<ImportBinding> imports;
    std::vector<std::string> star_import_modules; // `from m import *` targets
    std::vector<GlobalVar> globals;
    std::vector<CallSite> calls; // call sites inside function bodies

    const FunctionDecl* find_function(const std::string& qname) const;
};

// Derives the dotted module name: separators become dots, ".py" and a
// trailing "__init__" are stripped.
std::string module_qname_from_path(const std::string& module_path);

// Parses one source file into normalized syntax facts. Syntax errors mark the
// facts invalid and are recorded as diagnostics; the pipeline continues.
FileFacts parse_file(std::string_view source, const std::string& module_path);

// Parses every .py file under `root` (sorted repo-relative order). Invalid
// files are kept with their diagnostics and valid=false.
std::vector<FileFacts> parse_repo_tree(const std::string& root);

} // namespace callerkit
