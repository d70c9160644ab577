#include "callerkit/tokenize.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace callerkit {

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_cont(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view s) {
    if (s.empty() || s.size() > 3) return false;
    for (char c : s) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
    }
    return true;
}

// Longest-match operator table, longest first.
constexpr std::array<std::string_view, 47> kOps = {
    "**=", "//=", ">>=", "<<=", "...", "!=",  ">=",  "<=",  "==",  "->",  ":=",
    "+=",  "-=",  "*=",  "/=",  "%=",  "@=",  "&=",  "|=",  "^=",  "**",  "//",
    ">>",  "<<",  "+",   "-",   "*",   "/",   "%",   "@",   "&",   "|",   "^",
    "~",   "<",   ">",   "(",   ")",   "[",   "]",   "{",   "}",   ",",   ":",
    ".",   ";",   "="};

// Scans a quoted string starting at `i` (which points at the first quote).
// Returns one past the closing quote, or text.size() when unterminated.
std::size_t scan_string(std::string_view text, std::size_t i, bool raw) {
    char quote = text[i];
    bool triple = i + 2 < text.size() && text[i + 1] == quote && text[i + 2] == quote;
    std::size_t j = i + (triple ? 3 : 1);
    while (j < text.size()) {
        char c = text[j];
        if (c == '\\' && j + 1 < text.size()) {
            // In raw strings the backslash still escapes the quote lexically.
            (void)raw;
            j += 2;
            continue;
        }
        if (triple) {
            if (c == quote && j + 2 < text.size() && text[j + 1] == quote && text[j + 2] == quote) {
                return j + 3;
            }
            ++j;
        } else {
            if (c == quote) return j + 1;
            if (c == '\n') return j; // unterminated single-quoted string stops at EOL
            ++j;
        }
    }
    return text.size();
}

std::size_t scan_number(std::string_view text, std::size_t i) {
    std::size_t j = i;
    auto at = [&](std::size_t k) -> char { return k < text.size() ? text[k] : '\0'; };
    while (j < text.size()) {
        char c = text[j];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
            ++j;
            continue;
        }
        // exponent sign: 1e+5, 0x1p-3
        if ((c == '+' || c == '-') && j > i) {
            char prev = static_cast<char>(std::tolower(static_cast<unsigned char>(text[j - 1])));
            if (prev == 'e' || prev == 'p') {
                if (std::isdigit(static_cast<unsigned char>(at(j + 1)))) {
                    ++j;
                    continue;
                }
            }
        }
        break;
    }
    return j;
}

} // namespace

std::vector<std::string> code_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < n && text[i] != '\n') ++i;
            continue;
        }
        if (c == '\\' && i + 1 < n && (text[i + 1] == '\n' || text[i + 1] == '\r')) {
            i += 2;
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t end = scan_string(text, i, /*raw=*/false);
            out.emplace_back(text.substr(i, end - i));
            i = end;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && is_ident_cont(static_cast<unsigned char>(text[j]))) ++j;
            // r"..." / f'...' and friends lex as a single string token
            if (j < n && (text[j] == '"' || text[j] == '\'') && is_string_prefix(text.substr(i, j - i))) {
                bool raw = false;
                for (std::size_t k = i; k < j; ++k) {
                    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(text[k])));
                    if (l == 'r') raw = true;
                }
                std::size_t end = scan_string(text, j, raw);
                out.emplace_back(text.substr(i, end - i));
                i = end;
                continue;
            }
            out.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = scan_number(text, i);
            out.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        bool matched = false;
        for (std::string_view op : kOps) {
            if (text.substr(i, op.size()) == op) {
                out.emplace_back(op);
                i += op.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            out.emplace_back(text.substr(i, 1));
            ++i;
        }
    }
    return out;
}

std::size_t code_token_count(std::string_view text) { return code_tokens(text).size(); }

bool is_subject_keyword(std::string_view token) {
    static const std::unordered_set<std::string_view> kKeywords = {
        "False",  "None",   "True",    "and",   "as",     "assert", "async",
        "await",  "break",  "class",   "continue", "def", "del",    "elif",
        "else",   "except", "finally", "for",   "from",   "global", "if",
        "import", "in",     "is",      "lambda", "nonlocal", "not", "or",
        "pass",   "raise",  "return",  "try",   "while",  "with",   "yield"};
    return kKeywords.count(token) > 0;
}

} // namespace callerkit
