#include "callerkit/pytok.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace callerkit::py {

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_cont(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

struct Prefix {
    bool valid = false;
    bool raw = false;
    bool fstr = false;
};

Prefix classify_prefix(std::string_view s) {
    Prefix p;
    if (s.size() > 3) return p;
    bool seen_r = false, seen_b = false, seen_u = false, seen_f = false;
    for (char c : s) {
        switch (std::tolower(static_cast<unsigned char>(c))) {
        case 'r': if (seen_r) return p; seen_r = true; break;
        case 'b': if (seen_b) return p; seen_b = true; break;
        case 'u': if (seen_u) return p; seen_u = true; break;
        case 'f': if (seen_f) return p; seen_f = true; break;
        default: return p;
        }
    }
    p.valid = true;
    p.raw = seen_r;
    p.fstr = seen_f;
    return p;
}

constexpr std::array<std::string_view, 45> kOps = {
    "**=", "//=", ">>=", "<<=", "...", "!=", ">=", "<=", "==", "->", ":=",
    "+=",  "-=",  "*=",  "/=",  "%=",  "@=", "&=", "|=", "^=", "**", "//",
    ">>",  "<<",  "+",   "-",   "*",   "/",  "%",  "@",  "&",  "|",  "^",
    "~",   "<",   ">",   "(",   ")",   "[",  "]",  "{",  "}",  ",",  ":",
    "."};
// '=' and ';' matched separately so ':=' and '==' stay ahead in the table.

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    LexResult run() {
        indents_.push_back(0);
        at_line_start_ = true;
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (!handle_line_start()) continue;
            }
            if (pos_ >= src_.size()) break;
            lex_one();
        }
        if (pending_tokens_on_line_) emit_simple(TokKind::Newline, pos_, pos_);
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit_simple(TokKind::Dedent, pos_, pos_);
        }
        emit_simple(TokKind::End, pos_, pos_);
        return std::move(res_);
    }

private:
    std::string_view src_;
    LexResult res_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::size_t line_begin_ = 0;
    int depth_ = 0; // bracket nesting
    bool at_line_start_ = true;
    bool pending_tokens_on_line_ = false;
    std::vector<int> indents_;

    int col() const { return static_cast<int>(pos_ - line_begin_); }

    void emit(TokKind k, std::size_t b, std::size_t e, int ln, int cl, bool fstr = false) {
        Tok t;
        t.kind = k;
        t.begin = b;
        t.end = e;
        t.line = ln;
        t.col = cl;
        t.text = src_.substr(b, e - b);
        t.is_fstring = fstr;
        res_.toks.push_back(t);
    }

    void emit_simple(TokKind k, std::size_t b, std::size_t e) { emit(k, b, e, line_, col()); }

    void error(const std::string& msg) {
        res_.errors.push_back({msg, line_, col()});
        // skip one byte so the loop always advances
        if (pos_ < src_.size()) ++pos_;
    }

    void newline_bookkeeping() {
        ++line_;
        line_begin_ = pos_;
    }

    // Measures indentation and emits INDENT/DEDENT. Returns false when the
    // line was blank/comment-only and the caller should re-loop.
    bool handle_line_start() {
        std::size_t start = pos_;
        int width = 0;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ') {
                ++width;
                ++pos_;
            } else if (c == '\t') {
                width = (width / 8 + 1) * 8;
                ++pos_;
            } else if (c == '\f') {
                ++pos_;
            } else {
                break;
            }
        }
        if (pos_ >= src_.size()) return true;
        char c = src_[pos_];
        if (c == '\n' || c == '\r') {
            consume_eol();
            return false;
        }
        if (c == '#') {
            std::size_t cb = pos_;
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            res_.comments.emplace_back(cb, pos_);
            if (pos_ < src_.size()) consume_eol();
            return false;
        }
        at_line_start_ = false;
        if (width > indents_.back()) {
            indents_.push_back(width);
            emit(TokKind::Indent, start, pos_, line_, 0);
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                emit(TokKind::Dedent, pos_, pos_, line_, 0);
            }
            if (width != indents_.back()) {
                res_.errors.push_back({"inconsistent dedent", line_, width});
                indents_.push_back(width);
            }
        }
        return true;
    }

    void consume_eol() {
        if (pos_ < src_.size() && src_[pos_] == '\r') ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '\n') ++pos_;
        newline_bookkeeping();
        at_line_start_ = true;
    }

    void lex_one() {
        char c = src_[pos_];
        unsigned char uc = static_cast<unsigned char>(c);

        if (c == '\n' || c == '\r') {
            std::size_t b = pos_;
            int ln = line_;
            int cl = col();
            consume_eol();
            if (depth_ == 0 && pending_tokens_on_line_) {
                emit(TokKind::Newline, b, b, ln, cl);
                pending_tokens_on_line_ = false;
            }
            return;
        }
        if (c == ' ' || c == '\t' || c == '\f') {
            ++pos_;
            return;
        }
        at_line_start_ = false;
        if (c == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
            ++pos_;
            consume_eol();
            at_line_start_ = false; // explicit join: no indent handling
            return;
        }
        if (c == '#') {
            std::size_t cb = pos_;
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            res_.comments.emplace_back(cb, pos_);
            return;
        }
        if (c == '"' || c == '\'') {
            lex_string(pos_, Prefix{true, false, false});
            return;
        }
        if (ident_start(uc)) {
            std::size_t b = pos_;
            int ln = line_, cl = col();
            ++pos_;
            while (pos_ < src_.size() && ident_cont(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                Prefix p = classify_prefix(src_.substr(b, pos_ - b));
                if (p.valid) {
                    pos_ = b;
                    lex_string(b, p);
                    return;
                }
            }
            emit(TokKind::Name, b, pos_, ln, cl);
            pending_tokens_on_line_ = true;
            return;
        }
        if (std::isdigit(uc) || (c == '.' && pos_ + 1 < src_.size() &&
                                 std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return;
        }
        // operators
        for (std::string_view op : kOps) {
            if (src_.substr(pos_, op.size()) == op) {
                if (op == "(" || op == "[" || op == "{") ++depth_;
                if (op == ")" || op == "]" || op == "}") depth_ = depth_ > 0 ? depth_ - 1 : 0;
                emit(TokKind::Op, pos_, pos_ + op.size(), line_, col());
                pos_ += op.size();
                pending_tokens_on_line_ = true;
                return;
            }
        }
        if (c == '=' || c == ';' || c == '!') {
            emit(TokKind::Op, pos_, pos_ + 1, line_, col());
            ++pos_;
            pending_tokens_on_line_ = true;
            return;
        }
        error(std::string("unexpected character '") + c + "'");
    }

    void lex_number() {
        std::size_t b = pos_;
        int ln = line_, cl = col();
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
                ++pos_;
                continue;
            }
            if ((c == '+' || c == '-') && pos_ > b) {
                char prev = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_ - 1])));
                if ((prev == 'e' || prev == 'p') && pos_ + 1 < src_.size() &&
                    std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                    ++pos_;
                    continue;
                }
            }
            break;
        }
        emit(TokKind::Number, b, pos_, ln, cl);
        pending_tokens_on_line_ = true;
    }

    // `start` points at the first prefix character (or the quote itself).
    void lex_string(std::size_t start, Prefix p) {
        int ln = line_, cl = col();
        std::size_t q = start;
        while (q < src_.size() && src_[q] != '"' && src_[q] != '\'') ++q;
        char quote = src_[q];
        bool triple = q + 2 < src_.size() && src_[q + 1] == quote && src_[q + 2] == quote;
        std::size_t j = q + (triple ? 3 : 1);
        bool closed = false;
        while (j < src_.size()) {
            char c = src_[j];
            if (c == '\\' && j + 1 < src_.size()) {
                if (src_[j + 1] == '\n') {
                    j += 2;
                    ++line_;
                    line_begin_ = j;
                    continue;
                }
                j += 2;
                continue;
            }
            if (c == '\n') {
                if (!triple) break;
                ++j;
                ++line_;
                line_begin_ = j;
                continue;
            }
            if (c == quote) {
                if (!triple) {
                    j += 1;
                    closed = true;
                    break;
                }
                if (j + 2 < src_.size() && src_[j + 1] == quote && src_[j + 2] == quote) {
                    j += 3;
                    closed = true;
                    break;
                }
                ++j;
                continue;
            }
            ++j;
        }
        if (!closed && !triple && j < src_.size() && src_[j] == '\n') {
            res_.errors.push_back({"unterminated string literal", ln, cl});
        } else if (!closed && j >= src_.size()) {
            res_.errors.push_back({"unterminated string literal", ln, cl});
        }
        pos_ = j;
        emit(TokKind::String, start, pos_, ln, cl, p.fstr);
        pending_tokens_on_line_ = true;
    }
};

} // namespace

LexResult lex(std::string_view src) { return Lexer(src).run(); }

bool is_python_keyword(std::string_view word) {
    static const std::unordered_set<std::string_view> kw = {
        "False",  "None",   "True",    "and",      "as",    "assert", "async",
        "await",  "break",  "class",   "continue", "def",   "del",    "elif",
        "else",   "except", "finally", "for",      "from",  "global", "if",
        "import", "in",     "is",      "lambda",   "nonlocal", "not", "or",
        "pass",   "raise",  "return",  "try",      "while", "with",   "yield"};
    return kw.count(word) > 0;
}

std::string decode_string_literal(std::string_view raw) {
    // strip prefix
    std::size_t q = 0;
    bool is_raw = false;
    while (q < raw.size() && raw[q] != '"' && raw[q] != '\'') {
        if (std::tolower(static_cast<unsigned char>(raw[q])) == 'r') is_raw = true;
        ++q;
    }
    if (q >= raw.size()) return std::string(raw);
    char quote = raw[q];
    bool triple = q + 2 < raw.size() && raw[q + 1] == quote && raw[q + 2] == quote;
    std::size_t b = q + (triple ? 3 : 1);
    std::size_t e = raw.size();
    std::size_t close = triple ? 3 : 1;
    if (e >= b + close) e -= close;
    std::string_view body = raw.substr(b, e > b ? e - b : 0);

    if (is_raw) return std::string(body);

    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\' || i + 1 >= body.size()) {
            out += c;
            continue;
        }
        char esc = body[++i];
        switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '\\': out += '\\'; break;
        case '\'': out += '\''; break;
        case '"': out += '"'; break;
        case 'a': out += '\a'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'v': out += '\v'; break;
        case '0': out += '\0'; break;
        case '\n': break; // line continuation inside literal
        case 'x': {
            auto hex = [](char h) -> int {
                if (h >= '0' && h <= '9') return h - '0';
                if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                return -1;
            };
            if (i + 2 < body.size()) {
                int h1 = hex(body[i + 1]);
                int h2 = hex(body[i + 2]);
                if (h1 >= 0 && h2 >= 0) {
                    int cp = h1 * 16 + h2;
                    // the escape names a code point; emit it as UTF-8
                    if (cp < 0x80) {
                        out += static_cast<char>(cp);
                    } else {
                        out += static_cast<char>(0xC0 | (cp >> 6));
                        out += static_cast<char>(0x80 | (cp & 0x3F));
                    }
                    i += 2;
                    break;
                }
            }
            out += "\\x";
            break;
        }
        default:
            // unknown escapes pass through verbatim, matching the subject language
            out += '\\';
            out += esc;
            break;
        }
    }
    return out;
}

} // namespace callerkit::py
