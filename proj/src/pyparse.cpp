#include "callerkit/pyast.hpp"

#include <cassert>
#include <functional>

namespace callerkit::py {

namespace {

struct ParseError {
    std::string message;
    int line;
    int col;
};

class Parser {
public:
    Parser(std::string_view src, Module& mod) : mod_(mod) {
        mod_.source.assign(src);
        LexResult lr = lex(mod_.source);
        toks_ = std::move(lr.toks);
        mod_.comments = std::move(lr.comments);
        for (auto& d : lr.errors) mod_.errors.push_back(d);
    }

    void run() {
        if (!mod_.errors.empty()) return; // lexer already failed the file
        try {
            while (!at(TokKind::End)) {
                skip_newlines();
                if (at(TokKind::End)) break;
                mod_.body.push_back(parse_statement());
                drain_pending(mod_.body);
            }
        } catch (const ParseError& e) {
            mod_.errors.push_back({e.message, e.line, e.col});
        }
    }

private:
    Module& mod_;
    std::vector<Tok> toks_;
    std::size_t i_ = 0;

    // ---- token helpers -------------------------------------------------

    const Tok& cur() const { return toks_[i_]; }
    const Tok& peek(std::size_t k = 1) const {
        std::size_t j = i_ + k;
        return j < toks_.size() ? toks_[j] : toks_.back();
    }
    bool at(TokKind k) const { return cur().kind == k; }
    bool at_op(std::string_view s) const { return cur().kind == TokKind::Op && cur().text == s; }
    bool at_name(std::string_view s) const { return cur().kind == TokKind::Name && cur().text == s; }
    const Tok& advance() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError{msg, cur().line, cur().col};
    }

    void expect_op(std::string_view s) {
        if (!at_op(s)) fail("expected '" + std::string(s) + "'");
        advance();
    }

    void expect_newline() {
        if (at(TokKind::Newline)) {
            advance();
            return;
        }
        if (at(TokKind::End) || at(TokKind::Dedent)) return;
        if (at_op(";")) return; // caller handles statement separators
        fail("expected end of statement");
    }

    void skip_newlines() {
        while (at(TokKind::Newline)) advance();
    }

    Span span_from(const Tok& first, const Tok& last_consumed) const {
        Span s;
        s.begin = first.begin;
        s.line = first.line;
        s.col = first.col;
        s.end = last_consumed.end;
        s.end_line = last_consumed.line;
        return s;
    }

    const Tok& prev() const { return toks_[i_ > 0 ? i_ - 1 : 0]; }

    ExprPtr make(ExprKind k, const Tok& first) {
        auto e = std::make_unique<Expr>();
        e->kind = k;
        e->span.begin = first.begin;
        e->span.line = first.line;
        e->span.col = first.col;
        return e;
    }

    void close(Expr& e) {
        e.span.end = prev().end;
        e.span.end_line = prev().line;
    }

    std::string_view slice(std::size_t b, std::size_t e) const {
        return std::string_view(mod_.source).substr(b, e - b);
    }

    // ---- statements -----------------------------------------------------

    StmtPtr parse_statement() {
        if (at_op("@")) return parse_decorated();
        if (at(TokKind::Name)) {
            std::string_view w = cur().text;
            if (w == "def") return parse_funcdef({}, false);
            if (w == "class") return parse_classdef({});
            if (w == "async") {
                if (peek().kind == TokKind::Name && peek().text == "def") {
                    const Tok& async_tok = cur();
                    advance();
                    return parse_funcdef({}, true, &async_tok, &async_tok);
                }
                if (peek().kind == TokKind::Name && (peek().text == "for" || peek().text == "with")) {
                    advance();
                    auto s = parse_statement();
                    s->is_async = true;
                    return s;
                }
            }
            if (w == "if") return parse_if();
            if (w == "while") return parse_while();
            if (w == "for") return parse_for();
            if (w == "try") return parse_try();
            if (w == "with") return parse_with();
            if (w == "match" && looks_like_match()) return parse_match();
        }
        return parse_small_stmt_line();
    }

    bool looks_like_match() const {
        // `match` is a soft keyword: require `match <expr> :` ending the
        // logical line, and reject `match = ...` / `match.foo` style uses.
        const Tok& nx = peek();
        if (nx.kind == TokKind::Op &&
            (nx.text == "=" || nx.text == "." || nx.text == "," || nx.text == ":")) {
            return false;
        }
        for (std::size_t j = i_ + 1; j < toks_.size(); ++j) {
            if (toks_[j].kind == TokKind::Newline || toks_[j].kind == TokKind::End) {
                return j > i_ + 1 && toks_[j - 1].kind == TokKind::Op && toks_[j - 1].text == ":";
            }
        }
        return false;
    }

    StmtPtr parse_decorated() {
        std::vector<std::string> decorators;
        const Tok& first = cur();
        while (at_op("@")) {
            advance();
            std::size_t b = cur().begin;
            // decorator expression: consume to end of logical line
            (void)parse_expression(true);
            decorators.push_back(std::string(slice(b, prev().end)));
            expect_newline();
            skip_newlines();
        }
        if (at_name("def")) return parse_funcdef(std::move(decorators), false, &first);
        if (at_name("async") && peek().kind == TokKind::Name && peek().text == "def") {
            const Tok& async_tok = cur();
            advance();
            return parse_funcdef(std::move(decorators), true, &first, &async_tok);
        }
        if (at_name("class")) return parse_classdef(std::move(decorators), &first);
        fail("decorator must precede def or class");
    }

    StmtPtr parse_funcdef(std::vector<std::string> decorators, bool is_async,
                          const Tok* decl_first = nullptr, const Tok* header_first = nullptr) {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::FunctionDef;
        s->is_async = is_async;
        s->decorators = std::move(decorators);
        const Tok& def_tok = cur();
        const Tok& first = decl_first ? *decl_first : (header_first ? *header_first : def_tok);
        const Tok& head = header_first ? *header_first : def_tok; // `async def` included
        s->span.begin = first.begin;
        s->span.line = first.line;
        s->span.col = first.col;
        s->header_span.begin = head.begin;
        s->header_span.line = head.line;
        s->header_span.col = head.col;
        advance(); // def
        if (!at(TokKind::Name)) fail("expected function name");
        s->name = std::string(advance().text);
        skip_type_params();
        expect_op("(");
        parse_params(s->params);
        expect_op(")");
        if (at_op("->")) {
            advance();
            std::size_t b = cur().begin;
            (void)parse_expression(false);
            s->returns_text = std::string(slice(b, prev().end));
        }
        if (!at_op(":")) fail("expected ':' after signature");
        advance();
        s->header_span.end = prev().end;
        s->header_span.end_line = prev().line;
        parse_suite(s->body);
        finish_compound(*s);
        return s;
    }

    void parse_params(std::vector<Param>& out) {
        while (!at_op(")")) {
            if (at_op("*")) {
                advance();
                Param p;
                p.kind = Param::Star;
                if (at(TokKind::Name)) p.name = std::string(advance().text);
                maybe_annotation(p);
                out.push_back(std::move(p));
            } else if (at_op("**")) {
                advance();
                Param p;
                p.kind = Param::DoubleStar;
                if (!at(TokKind::Name)) fail("expected name after **");
                p.name = std::string(advance().text);
                maybe_annotation(p);
                out.push_back(std::move(p));
            } else if (at_op("/")) {
                advance(); // positional-only marker carries no name
            } else if (at(TokKind::Name)) {
                Param p;
                p.name = std::string(advance().text);
                maybe_annotation(p);
                if (at_op("=")) {
                    advance();
                    std::size_t b = cur().begin;
                    (void)parse_expression(false);
                    p.default_value = std::string(slice(b, prev().end));
                }
                out.push_back(std::move(p));
            } else {
                fail("unexpected token in parameter list");
            }
            if (at_op(",")) {
                advance();
                continue;
            }
            break;
        }
    }

    // PEP 695 `def f[T](...)` / `class C[T]:` type-parameter lists
    void skip_type_params() {
        if (!at_op("[")) return;
        int depth = 0;
        while (!at(TokKind::End)) {
            if (at_op("[")) ++depth;
            if (at_op("]")) {
                --depth;
                advance();
                if (depth == 0) return;
                continue;
            }
            advance();
        }
    }

    void maybe_annotation(Param& p) {
        if (at_op(":")) {
            advance();
            std::size_t b = cur().begin;
            (void)parse_expression(false);
            p.annotation = std::string(slice(b, prev().end));
        }
    }

    StmtPtr parse_classdef(std::vector<std::string> decorators, const Tok* decl_first = nullptr) {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::ClassDef;
        s->decorators = std::move(decorators);
        const Tok& cls_tok = cur();
        const Tok& first = decl_first ? *decl_first : cls_tok;
        s->span.begin = first.begin;
        s->span.line = first.line;
        s->span.col = first.col;
        s->header_span.begin = cls_tok.begin;
        s->header_span.line = cls_tok.line;
        s->header_span.col = cls_tok.col;
        advance(); // class
        if (!at(TokKind::Name)) fail("expected class name");
        s->name = std::string(advance().text);
        skip_type_params();
        if (at_op("(")) {
            advance();
            while (!at_op(")")) {
                std::size_t b = cur().begin;
                // swallow keyword bases such as metaclass=...
                (void)parse_expression(false);
                if (at_op("=")) {
                    advance();
                    (void)parse_expression(false);
                } else {
                    s->bases.push_back(std::string(slice(b, prev().end)));
                }
                if (at_op(",")) {
                    advance();
                    continue;
                }
                break;
            }
            expect_op(")");
        }
        if (!at_op(":")) fail("expected ':' after class header");
        advance();
        s->header_span.end = prev().end;
        s->header_span.end_line = prev().line;
        parse_suite(s->body);
        finish_compound(*s);
        return s;
    }

    void finish_compound(Stmt& s) {
        auto last_end = [&](const Suite& suite) -> const Stmt* {
            return suite.empty() ? nullptr : suite.back().get();
        };
        const Stmt* last = last_end(s.finally_);
        if (!last) last = last_end(s.orelse);
        if (!last && !s.handlers.empty()) last = last_end(s.handlers.back().body);
        if (!last) last = last_end(s.body);
        if (last) {
            s.span.end = last->span.end;
            s.span.end_line = last->span.end_line;
        } else {
            s.span.end = s.header_span.end;
            s.span.end_line = s.header_span.end_line;
        }
    }

    void drain_pending(Suite& out) {
        for (auto& s : pending_) out.push_back(std::move(s));
        pending_.clear();
    }

    void parse_suite(Suite& out) {
        if (at(TokKind::Newline)) {
            advance();
            skip_newlines();
            if (!at(TokKind::Indent)) fail("expected indented block");
            advance();
            while (!at(TokKind::Dedent) && !at(TokKind::End)) {
                skip_newlines();
                if (at(TokKind::Dedent) || at(TokKind::End)) break;
                out.push_back(parse_statement());
                drain_pending(out);
            }
            if (at(TokKind::Dedent)) advance();
        } else {
            // inline suite: simple statements separated by ';'
            for (;;) {
                out.push_back(parse_small_stmt());
                if (at_op(";")) {
                    advance();
                    if (at(TokKind::Newline) || at(TokKind::End)) break;
                    continue;
                }
                break;
            }
            expect_newline();
        }
    }

    // One logical line of ';'-separated small statements; returns the first
    // and queues the rest by splicing them into the current suite via caller.
    StmtPtr parse_small_stmt_line() {
        StmtPtr first = parse_small_stmt();
        while (at_op(";")) {
            advance();
            if (at(TokKind::Newline) || at(TokKind::End)) break;
            pending_.push_back(parse_small_stmt());
        }
        expect_newline();
        return first;
    }

    std::vector<StmtPtr> pending_; // extra stmts from `a; b; c` lines

    StmtPtr parse_return() {
        auto s = begin_simple(StmtKind::Return);
        advance();
        if (!at(TokKind::Newline) && !at(TokKind::End) && !at_op(";") && !at(TokKind::Dedent)) {
            s->exprs.push_back(parse_expression(true));
        }
        end_simple(*s);
        return s;
    }

    StmtPtr parse_tiny() {
        auto s = begin_simple(StmtKind::Pass);
        std::string_view w = cur().text;
        if (w == "break") s->kind = StmtKind::Break;
        else if (w == "continue") s->kind = StmtKind::Continue;
        advance();
        end_simple(*s);
        return s;
    }

    StmtPtr parse_delete() {
        auto s = begin_simple(StmtKind::Delete);
        advance();
        s->exprs.push_back(parse_expression(true));
        end_simple(*s);
        return s;
    }

    StmtPtr parse_raise() {
        auto s = begin_simple(StmtKind::Raise);
        advance();
        if (!at(TokKind::Newline) && !at(TokKind::End) && !at_op(";") && !at(TokKind::Dedent)) {
            s->exprs.push_back(parse_expression(false));
            if (at_name("from")) {
                advance();
                s->exprs.push_back(parse_expression(false));
            }
        }
        end_simple(*s);
        return s;
    }

    StmtPtr parse_assert() {
        auto s = begin_simple(StmtKind::Assert);
        advance();
        s->exprs.push_back(parse_expression(false));
        if (at_op(",")) {
            advance();
            s->exprs.push_back(parse_expression(false));
        }
        end_simple(*s);
        return s;
    }

    StmtPtr parse_scope_decl() {
        auto s = begin_simple(cur().text == "global" ? StmtKind::Global : StmtKind::Nonlocal);
        advance();
        while (at(TokKind::Name)) {
            s->names.push_back(std::string(advance().text));
            if (at_op(",")) advance();
            else break;
        }
        end_simple(*s);
        return s;
    }

    StmtPtr parse_import() {
        auto s = begin_simple(StmtKind::Import);
        advance(); // import
        for (;;) {
            ImportItem item;
            item.module = parse_dotted_name();
            if (at_name("as")) {
                advance();
                if (!at(TokKind::Name)) fail("expected alias name");
                item.alias = std::string(advance().text);
            }
            s->imports.push_back(std::move(item));
            if (at_op(",")) {
                advance();
                continue;
            }
            break;
        }
        end_simple(*s);
        return s;
    }

    StmtPtr parse_import_from() {
        auto s = begin_simple(StmtKind::ImportFrom);
        advance(); // from
        int level = 0;
        while (at_op(".") || at_op("...")) {
            level += at_op("...") ? 3 : 1;
            advance();
        }
        std::string module;
        if (at(TokKind::Name) && !at_name("import")) module = parse_dotted_name();
        if (!at_name("import")) fail("expected 'import'");
        advance();
        bool parens = at_op("(");
        if (parens) advance();
        for (;;) {
            ImportItem item;
            item.module = module;
            item.level = level;
            if (at_op("*")) {
                advance();
                item.is_star = true;
                s->imports.push_back(std::move(item));
                break;
            }
            if (!at(TokKind::Name)) fail("expected import name");
            item.orig_name = std::string(advance().text);
            if (at_name("as")) {
                advance();
                if (!at(TokKind::Name)) fail("expected alias name");
                item.alias = std::string(advance().text);
            }
            s->imports.push_back(std::move(item));
            if (at_op(",")) {
                advance();
                if (parens && at_op(")")) break;
                continue;
            }
            break;
        }
        if (parens) expect_op(")");
        end_simple(*s);
        return s;
    }

    std::string parse_dotted_name() {
        if (!at(TokKind::Name)) fail("expected name");
        std::string out = std::string(advance().text);
        while (at_op(".") && peek().kind == TokKind::Name) {
            advance();
            out += ".";
            out += advance().text;
        }
        return out;
    }

    StmtPtr parse_if() {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::If;
        begin_compound(*s);
        advance(); // if / elif
        s->exprs.push_back(parse_expression(false));
        expect_header_colon(*s);
        parse_suite(s->body);
        skip_newlines();
        if (at_name("elif")) {
            s->orelse.push_back(parse_if());
        } else if (at_name("else")) {
            advance();
            expect_op(":");
            parse_suite(s->orelse);
        }
        finish_if(*s);
        return s;
    }

    void finish_if(Stmt& s) {
        const Stmt* last = nullptr;
        if (!s.orelse.empty()) last = s.orelse.back().get();
        else if (!s.body.empty()) last = s.body.back().get();
        if (last) {
            s.span.end = last->span.end;
            s.span.end_line = last->span.end_line;
        } else {
            s.span.end = s.header_span.end;
            s.span.end_line = s.header_span.end_line;
        }
    }

    StmtPtr parse_while() {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::While;
        begin_compound(*s);
        advance();
        s->exprs.push_back(parse_expression(false));
        expect_header_colon(*s);
        parse_suite(s->body);
        skip_newlines();
        if (at_name("else")) {
            advance();
            expect_op(":");
            parse_suite(s->orelse);
        }
        finish_if(*s);
        return s;
    }

    StmtPtr parse_for() {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::For;
        begin_compound(*s);
        advance();
        s->exprs.push_back(parse_target_list());
        if (!at_name("in")) fail("expected 'in'");
        advance();
        s->exprs.push_back(parse_expression(true, /*no_in=*/false));
        expect_header_colon(*s);
        parse_suite(s->body);
        skip_newlines();
        if (at_name("else")) {
            advance();
            expect_op(":");
            parse_suite(s->orelse);
        }
        finish_if(*s);
        return s;
    }

    StmtPtr parse_try() {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::Try;
        begin_compound(*s);
        advance();
        expect_header_colon(*s);
        parse_suite(s->body);
        skip_newlines();
        while (at_name("except")) {
            ExceptHandler h;
            const Tok& htok = cur();
            h.span.begin = htok.begin;
            h.span.line = htok.line;
            h.span.col = htok.col;
            h.header_span = h.span;
            advance();
            if (at_op("*")) advance(); // except* groups
            if (!at_op(":")) {
                std::size_t b = cur().begin;
                ExprPtr type = parse_expression(false);
                h.type_text = std::string(slice(b, prev().end));
                collect_exception_names(*type, h.exc_names);
                if (at_name("as")) {
                    advance();
                    if (!at(TokKind::Name)) fail("expected name after 'as'");
                    h.bind_name = std::string(advance().text);
                }
            }
            expect_op(":");
            h.header_span.end = prev().end;
            h.header_span.end_line = prev().line;
            parse_suite(h.body);
            if (!h.body.empty()) {
                h.span.end = h.body.back()->span.end;
                h.span.end_line = h.body.back()->span.end_line;
            } else {
                h.span.end = h.header_span.end;
                h.span.end_line = h.header_span.end_line;
            }
            s->handlers.push_back(std::move(h));
            skip_newlines();
        }
        if (at_name("else")) {
            advance();
            expect_op(":");
            parse_suite(s->orelse);
            skip_newlines();
        }
        if (at_name("finally")) {
            advance();
            expect_op(":");
            parse_suite(s->finally_);
        }
        finish_compound(*s);
        return s;
    }

    static void collect_exception_names(const Expr& e, std::vector<std::string>& out) {
        switch (e.kind) {
        case ExprKind::Name:
            out.push_back(e.str);
            break;
        case ExprKind::Attribute: {
            std::string dotted = e.str;
            const Expr* v = e.elts.empty() ? nullptr : e.elts[0].get();
            while (v) {
                if (v->kind == ExprKind::Name) {
                    dotted = v->str + "." + dotted;
                    break;
                }
                if (v->kind == ExprKind::Attribute) {
                    dotted = v->str + "." + dotted;
                    v = v->elts.empty() ? nullptr : v->elts[0].get();
                    continue;
                }
                break;
            }
            out.push_back(dotted);
            break;
        }
        case ExprKind::Tuple:
            for (const auto& c : e.elts)
                if (c) collect_exception_names(*c, out);
            break;
        default:
            break;
        }
    }

    StmtPtr parse_with() {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::With;
        begin_compound(*s);
        advance();
        bool parens = at_op("(") && with_has_parenthesized_items();
        if (parens) advance();
        for (;;) {
            WithItem item;
            item.cm = parse_expression(false);
            if (at_name("as")) {
                advance();
                item.target = parse_target_atom();
            }
            s->items.push_back(std::move(item));
            if (at_op(",")) {
                advance();
                if (parens && at_op(")")) break;
                continue;
            }
            break;
        }
        if (parens) expect_op(")");
        expect_header_colon(*s);
        parse_suite(s->body);
        finish_compound(*s);
        return s;
    }

    bool with_has_parenthesized_items() const {
        // Distinguish `with (a, b):` item grouping from `with (expr):`.
        // Scan for `as` or `,` before the matching close paren.
        int depth = 0;
        for (std::size_t j = i_; j < toks_.size(); ++j) {
            const Tok& t = toks_[j];
            if (t.kind == TokKind::Op) {
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                else if (t.text == ")" || t.text == "]" || t.text == "}") {
                    --depth;
                    if (depth == 0) return false;
                }
            }
            if (depth == 1 && t.kind == TokKind::Name && t.text == "as") return true;
            if (t.kind == TokKind::Newline || t.kind == TokKind::End) return false;
        }
        return false;
    }

    StmtPtr parse_match() {
        auto s = std::make_unique<Stmt>();
        s->kind = StmtKind::Match;
        begin_compound(*s);
        advance(); // match
        s->exprs.push_back(parse_expression(true));
        expect_header_colon(*s);
        if (!at(TokKind::Newline)) fail("match requires an indented body");
        advance();
        skip_newlines();
        if (!at(TokKind::Indent)) fail("expected indented block");
        advance();
        while (at_name("case")) {
            ExceptHandler h;
            const Tok& ctok = cur();
            h.span.begin = ctok.begin;
            h.span.line = ctok.line;
            h.span.col = ctok.col;
            advance();
            std::size_t b = cur().begin;
            // patterns are not modeled; consume tokens until the header colon
            int depth = 0;
            while (!(depth == 0 && at_op(":")) && !at(TokKind::Newline) && !at(TokKind::End)) {
                if (at_op("(") || at_op("[") || at_op("{")) ++depth;
                if (at_op(")") || at_op("]") || at_op("}")) --depth;
                advance();
            }
            h.type_text = std::string(slice(b, cur().begin));
            expect_op(":");
            h.header_span = h.span;
            h.header_span.end = prev().end;
            h.header_span.end_line = prev().line;
            parse_suite(h.body);
            if (!h.body.empty()) {
                h.span.end = h.body.back()->span.end;
                h.span.end_line = h.body.back()->span.end_line;
            }
            s->handlers.push_back(std::move(h));
            skip_newlines();
        }
        if (at(TokKind::Dedent)) advance();
        if (!s->handlers.empty()) {
            s->span.end = s->handlers.back().span.end;
            s->span.end_line = s->handlers.back().span.end_line;
        }
        return s;
    }

    void begin_compound(Stmt& s) {
        const Tok& t = cur();
        s.span.begin = t.begin;
        s.span.line = t.line;
        s.span.col = t.col;
        s.header_span = s.span;
    }

    void expect_header_colon(Stmt& s) {
        if (!at_op(":")) fail("expected ':'");
        advance();
        s.header_span.end = prev().end;
        s.header_span.end_line = prev().line;
    }

    std::unique_ptr<Stmt> begin_simple(StmtKind k) {
        auto s = std::make_unique<Stmt>();
        s->kind = k;
        const Tok& t = cur();
        s->span.begin = t.begin;
        s->span.line = t.line;
        s->span.col = t.col;
        return s;
    }

    void end_simple(Stmt& s) {
        s.span.end = prev().end;
        s.span.end_line = prev().line;
        s.header_span = s.span;
    }

    // expression statement / assignment / annotated assignment
    StmtPtr parse_small_stmt() {
        if (at(TokKind::Name)) {
            std::string_view w = cur().text;
            if (w == "return") return parse_return();
            if (w == "pass" || w == "break" || w == "continue") return parse_tiny();
            if (w == "import") return parse_import();
            if (w == "from") return parse_import_from();
            if (w == "global" || w == "nonlocal") return parse_scope_decl();
            if (w == "del") return parse_delete();
            if (w == "raise") return parse_raise();
            if (w == "assert") return parse_assert();
        }
        auto s = begin_simple(StmtKind::ExprStmt);
        ExprPtr first = parse_expression(true);
        if (at_op(":")) {
            // annotated assignment
            advance();
            s->kind = StmtKind::AnnAssign;
            s->exprs.push_back(std::move(first));
            s->exprs.push_back(parse_expression(false));
            if (at_op("=")) {
                advance();
                s->exprs.push_back(parse_expression(true));
            }
            end_simple(*s);
            return s;
        }
        if (cur().kind == TokKind::Op && cur().text.size() >= 2 && cur().text.back() == '=' &&
            cur().text != "==" && cur().text != "<=" && cur().text != ">=" && cur().text != "!=" &&
            cur().text != ":=") {
            s->kind = StmtKind::AugAssign;
            s->op = std::string(cur().text);
            advance();
            s->exprs.push_back(std::move(first));
            s->exprs.push_back(parse_expression(true));
            end_simple(*s);
            return s;
        }
        if (at_op("=")) {
            s->kind = StmtKind::Assign;
            s->exprs.push_back(std::move(first));
            while (at_op("=")) {
                advance();
                s->exprs.push_back(parse_expression(true));
            }
            end_simple(*s);
            return s;
        }
        s->exprs.push_back(std::move(first));
        end_simple(*s);
        return s;
    }

    // ---- expressions ----------------------------------------------------

    // `allow_tuple` permits top-level comma tuples (e.g. `a, b = ...`).
    ExprPtr parse_expression(bool allow_tuple, bool no_in = false) {
        ExprPtr e = parse_ternary(no_in);
        if (allow_tuple && at_op(",")) {
            auto tup = std::make_unique<Expr>();
            tup->kind = ExprKind::Tuple;
            tup->span = e->span;
            tup->elts.push_back(std::move(e));
            while (at_op(",")) {
                advance();
                if (at(TokKind::Newline) || at(TokKind::End) || at_op("=") || at_op(")") ||
                    at_op("]") || at_op("}") || at_op(":") || at_op(";") || at(TokKind::Dedent) ||
                    at_name("in")) {
                    break; // trailing comma
                }
                tup->elts.push_back(parse_ternary(no_in));
            }
            close(*tup);
            return tup;
        }
        return e;
    }

    ExprPtr parse_ternary(bool no_in) {
        if (at_name("lambda")) return parse_lambda(no_in);
        ExprPtr body = parse_walrus(no_in);
        if (at_name("if")) {
            // conditional expression
            const Tok first{TokKind::Name, body->span.begin, body->span.end,
                            body->span.line, body->span.col, {}, false};
            advance();
            ExprPtr test = parse_walrus(no_in);
            if (!at_name("else")) fail("expected 'else' in conditional expression");
            advance();
            ExprPtr orelse = parse_ternary(no_in);
            auto e = make(ExprKind::IfExp, first);
            e->elts.push_back(std::move(body));
            e->elts.push_back(std::move(test));
            e->elts.push_back(std::move(orelse));
            close(*e);
            return e;
        }
        return body;
    }

    ExprPtr parse_lambda(bool no_in) {
        const Tok& first = cur();
        advance(); // lambda
        std::size_t b = cur().begin;
        int depth = 0;
        while (!(depth == 0 && at_op(":")) && !at(TokKind::Newline) && !at(TokKind::End)) {
            if (at_op("(") || at_op("[") || at_op("{")) ++depth;
            if (at_op(")") || at_op("]") || at_op("}")) {
                if (depth == 0) break;
                --depth;
            }
            advance();
        }
        auto e = make(ExprKind::Lambda, first);
        e->str = std::string(slice(b, cur().begin));
        expect_op(":");
        e->elts.push_back(parse_ternary(no_in));
        close(*e);
        return e;
    }

    ExprPtr parse_walrus(bool no_in) {
        ExprPtr left = parse_or(no_in);
        if (at_op(":=")) {
            const Tok first{TokKind::Name, left->span.begin, left->span.end,
                            left->span.line, left->span.col, {}, false};
            advance();
            auto e = make(ExprKind::NamedExpr, first);
            e->elts.push_back(std::move(left));
            e->elts.push_back(parse_ternary(no_in));
            close(*e);
            return e;
        }
        return left;
    }

    ExprPtr parse_or(bool no_in) {
        ExprPtr left = parse_and(no_in);
        if (!at_name("or")) return left;
        auto e = std::make_unique<Expr>();
        e->kind = ExprKind::BoolOp;
        e->str = "or";
        e->span = left->span;
        e->elts.push_back(std::move(left));
        while (at_name("or")) {
            advance();
            e->elts.push_back(parse_and(no_in));
        }
        close(*e);
        return e;
    }

    ExprPtr parse_and(bool no_in) {
        ExprPtr left = parse_not(no_in);
        if (!at_name("and")) return left;
        auto e = std::make_unique<Expr>();
        e->kind = ExprKind::BoolOp;
        e->str = "and";
        e->span = left->span;
        e->elts.push_back(std::move(left));
        while (at_name("and")) {
            advance();
            e->elts.push_back(parse_not(no_in));
        }
        close(*e);
        return e;
    }

    ExprPtr parse_not(bool no_in) {
        if (at_name("not")) {
            const Tok& first = cur();
            advance();
            auto e = make(ExprKind::UnaryOp, first);
            e->str = "not";
            e->elts.push_back(parse_not(no_in));
            close(*e);
            return e;
        }
        return parse_comparison(no_in);
    }

    ExprPtr parse_comparison(bool no_in) {
        ExprPtr left = parse_bitor();
        std::unique_ptr<Expr> cmp;
        for (;;) {
            std::string op;
            if (at_op("<") || at_op(">") || at_op("==") || at_op("!=") || at_op("<=") || at_op(">=")) {
                op = std::string(cur().text);
                advance();
            } else if (at_name("in") && !no_in) {
                op = "in";
                advance();
            } else if (at_name("not") && peek().kind == TokKind::Name && peek().text == "in" && !no_in) {
                op = "not in";
                advance();
                advance();
            } else if (at_name("is")) {
                advance();
                if (at_name("not")) {
                    advance();
                    op = "is not";
                } else {
                    op = "is";
                }
            } else {
                break;
            }
            if (!cmp) {
                cmp = std::make_unique<Expr>();
                cmp->kind = ExprKind::Compare;
                cmp->span = left->span;
                cmp->elts.push_back(std::move(left));
            }
            cmp->ops.push_back(op);
            cmp->elts.push_back(parse_bitor());
        }
        if (cmp) {
            close(*cmp);
            return cmp;
        }
        return left;
    }

    ExprPtr binop_chain(ExprPtr left, const std::vector<std::string_view>& ops,
                        ExprPtr (Parser::*next)()) {
        for (;;) {
            bool matched = false;
            for (auto op : ops) {
                if (at_op(op)) {
                    auto e = std::make_unique<Expr>();
                    e->kind = ExprKind::BinOp;
                    e->str = std::string(op);
                    e->span = left->span;
                    advance();
                    e->elts.push_back(std::move(left));
                    e->elts.push_back((this->*next)());
                    close(*e);
                    left = std::move(e);
                    matched = true;
                    break;
                }
            }
            if (!matched) return left;
        }
    }

    ExprPtr parse_bitor() { return binop_chain(parse_bitxor(), {"|"}, &Parser::parse_bitxor); }
    ExprPtr parse_bitxor() { return binop_chain(parse_bitand(), {"^"}, &Parser::parse_bitand); }
    ExprPtr parse_bitand() { return binop_chain(parse_shift(), {"&"}, &Parser::parse_shift); }
    ExprPtr parse_shift() { return binop_chain(parse_arith(), {"<<", ">>"}, &Parser::parse_arith); }
    ExprPtr parse_arith() { return binop_chain(parse_term(), {"+", "-"}, &Parser::parse_term); }
    ExprPtr parse_term() {
        return binop_chain(parse_factor(), {"*", "@", "//", "/", "%"}, &Parser::parse_factor);
    }

    ExprPtr parse_factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            const Tok& first = cur();
            auto e = make(ExprKind::UnaryOp, first);
            e->str = std::string(cur().text);
            advance();
            e->elts.push_back(parse_factor());
            close(*e);
            return e;
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_await();
        if (at_op("**")) {
            auto e = std::make_unique<Expr>();
            e->kind = ExprKind::BinOp;
            e->str = "**";
            e->span = base->span;
            advance();
            e->elts.push_back(std::move(base));
            e->elts.push_back(parse_factor()); // right-associative
            close(*e);
            return e;
        }
        return base;
    }

    ExprPtr parse_await() {
        if (at_name("await")) {
            const Tok& first = cur();
            advance();
            auto e = make(ExprKind::Await, first);
            e->elts.push_back(parse_await());
            close(*e);
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_atom();
        for (;;) {
            if (at_op("(")) {
                auto call = std::make_unique<Expr>();
                call->kind = ExprKind::Call;
                call->span = e->span;
                advance();
                call->elts.push_back(std::move(e));
                parse_call_args(*call);
                expect_op(")");
                close(*call);
                e = std::move(call);
            } else if (at_op("[")) {
                auto sub = std::make_unique<Expr>();
                sub->kind = ExprKind::Subscript;
                sub->span = e->span;
                advance();
                sub->elts.push_back(std::move(e));
                sub->elts.push_back(parse_subscript_index());
                expect_op("]");
                close(*sub);
                e = std::move(sub);
            } else if (at_op(".") && peek().kind == TokKind::Name) {
                auto attr = std::make_unique<Expr>();
                attr->kind = ExprKind::Attribute;
                attr->span = e->span;
                advance();
                attr->str = std::string(advance().text);
                attr->elts.push_back(std::move(e));
                close(*attr);
                e = std::move(attr);
            } else {
                return e;
            }
        }
    }

    void parse_call_args(Expr& call) {
        while (!at_op(")")) {
            if (at(TokKind::End)) fail("unterminated call");
            if (at_op("*")) {
                const Tok& first = cur();
                advance();
                auto st = make(ExprKind::Starred, first);
                st->elts.push_back(parse_ternary(false));
                close(*st);
                call.elts.push_back(std::move(st));
            } else if (at_op("**")) {
                advance();
                Keyword kw;
                kw.value = parse_ternary(false);
                call.keywords.push_back(std::move(kw));
            } else if (cur().kind == TokKind::Name && peek().kind == TokKind::Op &&
                       peek().text == "=" && !is_python_keyword(cur().text)) {
                Keyword kw;
                kw.name = std::string(advance().text);
                advance(); // '='
                kw.value = parse_ternary(false);
                call.keywords.push_back(std::move(kw));
            } else {
                ExprPtr arg = parse_ternary(false);
                if (at_name("for") || (at_name("async") && peek().text == "for")) {
                    arg = parse_comprehension_clauses(std::move(arg), ExprKind::GeneratorExp);
                }
                call.elts.push_back(std::move(arg));
            }
            if (at_op(",")) {
                advance();
                continue;
            }
            break;
        }
    }

    ExprPtr parse_subscript_index() {
        auto piece = [&]() -> ExprPtr { return parse_slice_item(); };
        ExprPtr first = piece();
        if (at_op(",")) {
            auto tup = std::make_unique<Expr>();
            tup->kind = ExprKind::Tuple;
            tup->span = first->span;
            tup->elts.push_back(std::move(first));
            while (at_op(",")) {
                advance();
                if (at_op("]")) break;
                tup->elts.push_back(piece());
            }
            close(*tup);
            return tup;
        }
        return first;
    }

    ExprPtr parse_slice_item() {
        const Tok& first = cur();
        ExprPtr lower;
        if (!at_op(":")) lower = parse_ternary(false);
        if (!at_op(":")) return lower; // plain index
        auto sl = make(ExprKind::Slice, first);
        sl->elts.push_back(std::move(lower)); // may be null
        advance();                            // ':'
        if (!at_op(":") && !at_op("]") && !at_op(",")) sl->elts.push_back(parse_ternary(false));
        else sl->elts.push_back(nullptr);
        if (at_op(":")) {
            advance();
            if (!at_op("]") && !at_op(",")) sl->elts.push_back(parse_ternary(false));
            else sl->elts.push_back(nullptr);
        } else {
            sl->elts.push_back(nullptr);
        }
        close(*sl);
        return sl;
    }

    ExprPtr parse_comprehension_clauses(ExprPtr element, ExprKind kind) {
        auto comp = std::make_unique<Expr>();
        comp->kind = kind;
        comp->span = element->span;
        comp->elts.push_back(std::move(element));
        while (at_name("for") || (at_name("async") && peek().text == "for")) {
            CompClause clause;
            if (at_name("async")) {
                clause.is_async = true;
                advance();
            }
            advance(); // for
            clause.target = parse_target_list();
            if (!at_name("in")) fail("expected 'in' in comprehension");
            advance();
            // iter and conditions are or_test level: a ternary would swallow
            // the clause's own `if`/`for` keywords
            clause.iter = parse_or(false);
            while (at_name("if")) {
                advance();
                clause.conds.push_back(at_name("lambda") ? parse_lambda(false) : parse_or(false));
            }
            comp->comps.push_back(std::move(clause));
        }
        close(*comp);
        return comp;
    }

    ExprPtr parse_target_atom() {
        // targets in `with ... as t` / `for t in ...`: name, tuple, attr, subscript
        return parse_postfix();
    }

    ExprPtr parse_target_list() {
        ExprPtr first = parse_target_piece();
        if (at_op(",")) {
            auto tup = std::make_unique<Expr>();
            tup->kind = ExprKind::Tuple;
            tup->span = first->span;
            tup->elts.push_back(std::move(first));
            while (at_op(",")) {
                advance();
                if (at_name("in") || at_op("=") || at_op(")") || at_op("]")) break;
                tup->elts.push_back(parse_target_piece());
            }
            close(*tup);
            return tup;
        }
        return first;
    }

    // '*' followed by a full or-expression (list/tuple/call spread position)
    ExprPtr parse_starred_expr() {
        const Tok& first = cur();
        advance(); // '*'
        auto st = make(ExprKind::Starred, first);
        st->elts.push_back(parse_bitor());
        close(*st);
        return st;
    }

    ExprPtr parse_target_piece() {
        if (at_op("*")) {
            const Tok& first = cur();
            advance();
            auto st = make(ExprKind::Starred, first);
            st->elts.push_back(parse_postfix());
            close(*st);
            return st;
        }
        if (at_op("(") || at_op("[")) {
            std::string_view closer = at_op("(") ? ")" : "]";
            const Tok& first = cur();
            advance();
            auto tup = make(ExprKind::Tuple, first);
            while (!at_op(closer)) {
                tup->elts.push_back(parse_target_piece());
                if (at_op(",")) advance();
                else break;
            }
            expect_op(closer);
            close(*tup);
            return tup;
        }
        return parse_postfix();
    }

    ExprPtr parse_atom() {
        const Tok& t = cur();
        switch (t.kind) {
        case TokKind::Number: {
            auto e = make(ExprKind::Constant, t);
            e->cval = (t.text.find('.') != std::string_view::npos ||
                       ((t.text.find('e') != std::string_view::npos ||
                         t.text.find('E') != std::string_view::npos) &&
                        t.text.substr(0, 2) != "0x" && t.text.substr(0, 2) != "0X"))
                          ? ConstKind::Float
                          : ConstKind::Int;
            e->str = std::string(t.text);
            advance();
            close(*e);
            return e;
        }
        case TokKind::String: {
            auto e = make(ExprKind::Constant, t);
            e->cval = t.is_fstring ? ConstKind::FStr : ConstKind::Str;
            std::string value;
            bool any_f = false;
            while (at(TokKind::String)) {
                any_f = any_f || cur().is_fstring;
                value += decode_string_literal(cur().text);
                advance();
            }
            if (any_f) e->cval = ConstKind::FStr;
            e->str = value;
            close(*e);
            return e;
        }
        case TokKind::Name: {
            std::string_view w = t.text;
            if (w == "None" || w == "True" || w == "False") {
                auto e = make(ExprKind::Constant, t);
                e->cval = w == "None" ? ConstKind::None_ : ConstKind::Bool;
                e->str = std::string(w);
                advance();
                close(*e);
                return e;
            }
            if (w == "lambda") return parse_lambda(false);
            if (w == "yield") {
                advance();
                auto e = make(ExprKind::Yield, t);
                if (at_name("from")) {
                    advance();
                    e->kind = ExprKind::YieldFrom;
                    e->elts.push_back(parse_ternary(false));
                } else if (!at(TokKind::Newline) && !at_op(")") && !at_op("]") && !at_op("}") &&
                           !at_op(",") && !at(TokKind::End) && !at_op(";") && !at(TokKind::Dedent)) {
                    e->elts.push_back(parse_expression(true));
                }
                close(*e);
                return e;
            }
            if (is_python_keyword(w) && w != "not" && w != "await") {
                fail("unexpected keyword '" + std::string(w) + "'");
            }
            auto e = make(ExprKind::Name, t);
            e->str = std::string(w);
            advance();
            close(*e);
            return e;
        }
        case TokKind::Op: {
            if (t.text == "(") {
                advance();
                if (at_op(")")) {
                    auto e = make(ExprKind::Tuple, t);
                    advance();
                    close(*e);
                    return e;
                }
                ExprPtr inner;
                if (at_op("*")) {
                    inner = parse_starred_expr();
                } else {
                    inner = parse_ternary(false);
                }
                if (at_name("for") || (at_name("async") && peek().text == "for")) {
                    inner = parse_comprehension_clauses(std::move(inner), ExprKind::GeneratorExp);
                    expect_op(")");
                    return inner;
                }
                if (at_op(",")) {
                    auto tup = make(ExprKind::Tuple, t);
                    tup->elts.push_back(std::move(inner));
                    while (at_op(",")) {
                        advance();
                        if (at_op(")")) break;
                        if (at_op("*")) tup->elts.push_back(parse_starred_expr());
                        else tup->elts.push_back(parse_ternary(false));
                    }
                    expect_op(")");
                    close(*tup);
                    return tup;
                }
                expect_op(")");
                // parenthesized expression keeps the inner node; widen its span
                inner->span.begin = t.begin;
                inner->span.line = t.line;
                inner->span.col = t.col;
                inner->span.end = prev().end;
                inner->span.end_line = prev().line;
                return inner;
            }
            if (t.text == "[") {
                advance();
                auto lst = make(ExprKind::List, t);
                if (!at_op("]")) {
                    ExprPtr first_el = at_op("*") ? parse_starred_expr() : parse_ternary(false);
                    if (at_name("for") || (at_name("async") && peek().text == "for")) {
                        ExprPtr comp = parse_comprehension_clauses(std::move(first_el), ExprKind::ListComp);
                        expect_op("]");
                        return comp;
                    }
                    lst->elts.push_back(std::move(first_el));
                    while (at_op(",")) {
                        advance();
                        if (at_op("]")) break;
                        lst->elts.push_back(at_op("*") ? parse_starred_expr() : parse_ternary(false));
                    }
                }
                expect_op("]");
                close(*lst);
                return lst;
            }
            if (t.text == "{") {
                advance();
                if (at_op("}")) {
                    auto d = make(ExprKind::Dict, t);
                    advance();
                    close(*d);
                    return d;
                }
                if (at_op("**")) {
                    auto d = make(ExprKind::Dict, t);
                    parse_dict_items(*d);
                    expect_op("}");
                    close(*d);
                    return d;
                }
                ExprPtr first_el = parse_ternary(false);
                if (at_op(":")) {
                    advance();
                    ExprPtr value = parse_ternary(false);
                    if (at_name("for") || (at_name("async") && peek().text == "for")) {
                        auto comp = make(ExprKind::DictComp, t);
                        comp->elts.push_back(std::move(first_el));
                        comp->elts.push_back(std::move(value));
                        ExprPtr tmp = std::make_unique<Expr>();
                        // reuse clause parser on a dummy then move clauses over
                        ExprPtr clauses = parse_comprehension_clauses(std::move(tmp), ExprKind::DictComp);
                        comp->comps = std::move(clauses->comps);
                        expect_op("}");
                        close(*comp);
                        return comp;
                    }
                    auto d = make(ExprKind::Dict, t);
                    d->elts.push_back(std::move(first_el));
                    d->elts.push_back(std::move(value));
                    if (at_op(",")) {
                        advance();
                        parse_dict_items(*d);
                    }
                    expect_op("}");
                    close(*d);
                    return d;
                }
                if (at_name("for") || (at_name("async") && peek().text == "for")) {
                    ExprPtr comp = parse_comprehension_clauses(std::move(first_el), ExprKind::SetComp);
                    expect_op("}");
                    return comp;
                }
                auto st = make(ExprKind::Set, t);
                st->elts.push_back(std::move(first_el));
                while (at_op(",")) {
                    advance();
                    if (at_op("}")) break;
                    st->elts.push_back(parse_ternary(false));
                }
                expect_op("}");
                close(*st);
                return st;
            }
            if (t.text == "...") {
                auto e = make(ExprKind::Constant, t);
                e->cval = ConstKind::Ellipsis;
                e->str = "...";
                advance();
                close(*e);
                return e;
            }
            if (t.text == "*") {
                return parse_starred_expr();
            }
            break;
        }
        default:
            break;
        }
        fail("unexpected token '" + std::string(t.text) + "'");
    }

    void parse_dict_items(Expr& d) {
        while (!at_op("}")) {
            if (at_op("**")) {
                advance();
                d.elts.push_back(nullptr); // null key marks **expansion
                d.elts.push_back(parse_ternary(false));
            } else {
                d.elts.push_back(parse_ternary(false));
                expect_op(":");
                d.elts.push_back(parse_ternary(false));
            }
            if (at_op(",")) {
                advance();
                continue;
            }
            break;
        }
    }

};

} // namespace

Module parse_module(std::string_view source) {
    Module mod;
    Parser p(source, mod);
    p.run();
    return mod;
}

Module parse_fragment(std::string_view source) { return parse_module(source); }

void walk_statements(const Suite& suite, const std::function<void(const Stmt&)>& fn) {
    for (const auto& s : suite) {
        if (!s) continue;
        fn(*s);
        walk_statements(s->body, fn);
        walk_statements(s->orelse, fn);
        walk_statements(s->finally_, fn);
        for (const auto& h : s->handlers) walk_statements(h.body, fn);
    }
}

void walk_expr_tree(const Expr& e, const std::function<void(const Expr&)>& fn) {
    fn(e);
    for (const auto& c : e.elts)
        if (c) walk_expr_tree(*c, fn);
    for (const auto& kw : e.keywords)
        if (kw.value) walk_expr_tree(*kw.value, fn);
    for (const auto& cl : e.comps) {
        if (cl.target) walk_expr_tree(*cl.target, fn);
        if (cl.iter) walk_expr_tree(*cl.iter, fn);
        for (const auto& c : cl.conds)
            if (c) walk_expr_tree(*c, fn);
    }
}

void walk_exprs(const Stmt& stmt, const std::function<void(const Expr&)>& fn) {
    for (const auto& e : stmt.exprs)
        if (e) walk_expr_tree(*e, fn);
    for (const auto& item : stmt.items) {
        if (item.cm) walk_expr_tree(*item.cm, fn);
        if (item.target) walk_expr_tree(*item.target, fn);
    }
}

} // namespace callerkit::py
