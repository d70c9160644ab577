#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace callerkit::py {

struct Diag {
    std::string message;
    int line = 0;
    int col = 0;
};

enum class TokKind {
    Name,
    Number,
    String, // includes f-strings; raw text keeps prefix and quotes
    Op,
    Newline, // end of a logical line
    Indent,
    Dedent,
    End,
};

struct Tok {
    TokKind kind = TokKind::End;
    std::size_t begin = 0; // byte offset into source
    std::size_t end = 0;
    int line = 1; // 1-based
    int col = 0;  // 0-based byte column
    std::string_view text;
    bool is_fstring = false;
};

struct LexResult {
    std::vector<Tok> toks;
    std::vector<Diag> errors;
    // Byte ranges of # comments, in source order; used by the comment-stripping rewrite.
    std::vector<std::pair<std::size_t, std::size_t>> comments;
    bool ok() const { return errors.empty(); }
};

// Lexes Python source into a token stream with INDENT/DEDENT structure.
// Logical lines are joined inside brackets and after backslash-newline;
// blank and comment-only lines produce no tokens.
LexResult lex(std::string_view src);

bool is_python_keyword(std::string_view word);

// Decodes a string literal token (prefix + quotes + escapes) to its value.
// F-strings are returned with their braces intact.
std::string decode_string_literal(std::string_view raw);

} // namespace callerkit::py
