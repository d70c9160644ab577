#pragma once

#include "callerkit/errors.hpp"

#include <string>
#include <vector>

namespace callerkit {

struct CodeBleuWeights {
    double alpha = 0.25; // BLEU
    double beta = 0.25;  // keyword-weighted n-gram match
    double gamma = 0.25; // AST subtree match
    double delta = 0.25; // data-flow edge match
};

struct CodeBleuResult {
    double score = 0.0;
    double bleu = 0.0;
    double weighted_ngram = 0.0;
    double ast_match = 0.0;
    double dataflow_match = 0.0;
    std::vector<std::string> flags; // e.g. candidate_parse_failure
};

struct RougeL {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// ROUGE-L over token lists: P = LCS/|cand|, R = LCS/|ref|, F1 = 2PR/(P+R).
RougeL rouge_l(const std::vector<std::string>& candidate,
               const std::vector<std::string>& reference);
RougeL rouge_l_text(const std::string& candidate, const std::string& reference);

// Weighted sum of BLEU (4-gram, brevity penalty, add-epsilon smoothing),
// keyword-weighted n-gram match (keywords 5:1), identifier-normalized AST
// subtree match, and positionally normalized def-use edge match (1.0 when the
// reference has no edges). Weights must sum to 1.
CodeBleuResult codebleu(const std::string& candidate, const std::string& reference,
                        const CodeBleuWeights& weights = {});

// Exposed for the acceptance suite's component checks.
double bleu_score(const std::vector<std::string>& candidate,
                  const std::vector<std::string>& reference, bool keyword_weighted);
double ast_match_score(const std::string& candidate, const std::string& reference,
                       bool* candidate_parse_failed = nullptr);
double dataflow_match_score(const std::string& candidate, const std::string& reference,
                            bool* candidate_parse_failed = nullptr);

} // namespace callerkit
