#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace callerkit {

// Deterministic code tokenizer shared by the corpus length statistics and the
// similarity metrics. Identifiers, numbers, string literals and operators are
// one token each; whitespace and # comments are discarded.
//
// Tokenizing the space-joined token stream yields the same tokens back.
std::vector<std::string> code_tokens(std::string_view text);

std::size_t code_token_count(std::string_view text);

// Python reserved words, used by the keyword-weighted n-gram component and for
// identifier classification.
bool is_subject_keyword(std::string_view token);

} // namespace callerkit
