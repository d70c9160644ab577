#pragma once

#include "callerkit/pytok.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace callerkit::py {

struct Span {
    std::size_t begin = 0; // byte offsets into the module source
    std::size_t end = 0;
    int line = 1; // 1-based start line
    int col = 0;
    int end_line = 1;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

enum class ExprKind {
    Name,
    Attribute, // elts[0] = value, str = attr
    Subscript, // elts[0] = value, elts[1] = index (may be Slice/Tuple)
    Call,      // elts[0] = func, elts[1..] = positional args, keywords separate
    Constant,  // str = raw text
    Tuple,
    List,
    Dict, // elts alternate key,value; a null key marks **expansion
    Set,
    BinOp,   // elts[0], elts[1]; str = operator
    UnaryOp, // elts[0]; str = operator
    BoolOp,  // elts = operands; str = "and"/"or"
    Compare, // elts[0] = left, elts[1..] = comparators; ops parallel to comparators
    Lambda,  // str = raw parameter text; elts[0] = body
    IfExp,   // elts = {body, test, orelse}
    Starred, // elts[0]
    DoubleStarred,
    Await,     // elts[0]
    Yield,     // elts[0] optional (may be null slot omitted)
    YieldFrom, // elts[0]
    NamedExpr, // elts = {target, value}
    ListComp,  // elts[0] = element (Dict comp: elts[0]=key, elts[1]=value); comps = clauses
    SetComp,
    DictComp,
    GeneratorExp,
    Slice, // elts = {lower, upper, step}, entries may be null
};

enum class ConstKind { None_, Bool, Int, Float, Str, FStr, Bytes, Ellipsis };

struct Keyword {
    std::string name; // empty for **kwargs
    ExprPtr value;
};

struct CompClause {
    ExprPtr target;
    ExprPtr iter;
    std::vector<ExprPtr> conds;
    bool is_async = false;
};

struct Expr {
    ExprKind kind = ExprKind::Name;
    Span span;
    std::string str;
    ConstKind cval = ConstKind::None_;
    std::vector<ExprPtr> elts;
    std::vector<std::string> ops;
    std::vector<Keyword> keywords;
    std::vector<CompClause> comps;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Suite = std::vector<StmtPtr>;

enum class StmtKind {
    FunctionDef, // name, params, decorators, returns_text; body
    ClassDef,    // name, bases, decorators; body
    Return,      // exprs[0] optional
    Delete,      // exprs = targets
    Assign,      // exprs[0..n-2] = targets, exprs[n-1] = value
    AugAssign,   // exprs = {target, value}; op
    AnnAssign,   // exprs = {target, annotation, value?}
    For,         // exprs = {target, iter}; body, orelse
    While,       // exprs[0] = test; body, orelse
    If,          // exprs[0] = test; body, orelse (elif chains nest in orelse)
    With,        // items; body
    Raise,       // exprs = {exc?, cause?}
    Try,         // body, handlers, orelse, finally_
    Assert,      // exprs = {test, msg?}
    Import,      // imports
    ImportFrom,  // imports
    Global,      // names
    Nonlocal,    // names
    ExprStmt,    // exprs[0]
    Pass,
    Break,
    Continue,
    Match, // exprs[0] = subject; handlers reused: type_text = pattern, body = case suite
};

struct Param {
    enum Kind { Plain, Star, DoubleStar } kind = Plain;
    std::string name;
    std::string annotation;
    std::string default_value;
};

struct ExceptHandler {
    std::string type_text;               // verbatim exception expression ("" for bare except)
    std::vector<std::string> exc_names;  // dotted names mentioned, e.g. {"ValueError"}
    std::string bind_name;               // "as e" binding
    Suite body;
    Span span;
    Span header_span;
};

struct ImportItem {
    // import x as z        -> module="x",  alias="z"
    // from m import a as b -> module="m",  orig_name="a", alias="b"
    // from .. import c     -> level=2,     orig_name="c"
    // from m import *      -> is_star
    std::string module;
    std::string orig_name;
    std::string alias;
    int level = 0;
    bool is_star = false;
};

struct WithItem {
    ExprPtr cm;
    ExprPtr target; // null without "as"
};

struct Stmt {
    StmtKind kind = StmtKind::Pass;
    Span span;        // full statement, suite included
    Span header_span; // compound header through ':'; simple statements: == span
    bool is_async = false;

    std::string name; // FunctionDef/ClassDef
    std::vector<Param> params;
    std::vector<std::string> decorators;
    std::string returns_text;
    std::vector<std::string> bases;

    std::vector<ExprPtr> exprs;
    std::vector<std::string> names; // Global/Nonlocal
    std::string op;                 // AugAssign

    Suite body;
    Suite orelse;
    Suite finally_;
    std::vector<ExceptHandler> handlers;
    std::vector<ImportItem> imports;
    std::vector<WithItem> items;
};

struct Module {
    Suite body;
    std::vector<Diag> errors;
    std::string source; // owned copy; all spans index into it
    std::vector<std::pair<std::size_t, std::size_t>> comments;

    bool ok() const { return errors.empty(); }
    std::string_view text(const Span& s) const {
        if (s.begin >= source.size() || s.end < s.begin) return {};
        return std::string_view(source).substr(s.begin, std::min(s.end, source.size()) - s.begin);
    }
};

// Parses a whole module. Errors are collected, not thrown; a module with
// errors has an unspecified partial body.
Module parse_module(std::string_view source);

// Parses an expression or statement fragment (used by driver normalization).
Module parse_fragment(std::string_view source);

// Depth-first prefix walk over all statements, suites included.
void walk_statements(const Suite& suite, const std::function<void(const Stmt&)>& fn);

// Depth-first walk over every expression reachable from a statement's own
// slots (not its nested suites).
void walk_exprs(const Stmt& stmt, const std::function<void(const Expr&)>& fn);
void walk_expr_tree(const Expr& e, const std::function<void(const Expr&)>& fn);

} // namespace callerkit::py
