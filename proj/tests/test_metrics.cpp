#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "callerkit/metrics.hpp"
#include "callerkit/tokenize.hpp"

#include <cmath>
#include <random>

using namespace callerkit;

namespace {

// exhaustive ROUGE oracle: longest common subsequence by subset enumeration,
// valid for token lists of length <= 8
int lcs_exhaustive(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    int best = 0;
    for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
        std::vector<std::string> sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask & (1u << i)) sub.push_back(a[i]);
        // is `sub` a subsequence of b?
        std::size_t j = 0;
        for (const auto& tok : b) {
            if (j < sub.size() && tok == sub[j]) ++j;
        }
        if (j == sub.size()) best = std::max<int>(best, static_cast<int>(sub.size()));
    }
    return best;
}

} // namespace

TEST_CASE("rouge-l identity, known value, disjoint") {
    std::vector<std::string> same{"a", "b", "c"};
    CHECK(rouge_l(same, same).f1 == 1.0);

    RougeL r = rouge_l({"a", "c"}, {"a", "b", "c"});
    CHECK(r.precision == 1.0);
    CHECK(std::abs(r.recall - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(r.f1 - 0.8) < 1e-12);

    CHECK(rouge_l({"x", "y"}, {"a", "b"}).f1 == 0.0);
    CHECK_THROWS_AS(rouge_l({"a"}, {}), EmptyReference);
    CHECK(rouge_l({}, {"a"}).f1 == 0.0);
}

TEST_CASE("rouge-l equals the exhaustive-subsequence oracle up to length 8") {
    const std::vector<std::string> alphabet{"a", "b", "c"};
    std::mt19937 rng(31);
    for (int iter = 0; iter < 400; ++iter) {
        std::vector<std::string> cand, ref;
        std::size_t cn = 1 + rng() % 8, rn = 1 + rng() % 8;
        for (std::size_t i = 0; i < cn; ++i) cand.push_back(alphabet[rng() % 3]);
        for (std::size_t i = 0; i < rn; ++i) ref.push_back(alphabet[rng() % 3]);
        int oracle = lcs_exhaustive(cand, ref);
        RougeL r = rouge_l(cand, ref);
        double p = static_cast<double>(oracle) / cand.size();
        double rec = static_cast<double>(oracle) / ref.size();
        double f1 = (p + rec) > 0 ? 2 * p * rec / (p + rec) : 0.0;
        CHECK(std::abs(r.f1 - f1) < 1e-12);
    }
}

TEST_CASE("codebleu identity scores 1.0 for parseable inputs") {
    const char* snippets[] = {
        "x = 1",
        "def f(a, b=2):\n    if a:\n        return a + b\n    return b\n",
        "for i in range(10):\n    total += i\n",
    };
    for (const char* s : snippets) {
        CodeBleuResult r = codebleu(s, s);
        CHECK(std::abs(r.score - 1.0) < 1e-6);
        CHECK(std::abs(r.bleu - 1.0) < 1e-9);
        CHECK(std::abs(r.weighted_ngram - 1.0) < 1e-9);
        CHECK(std::abs(r.ast_match - 1.0) < 1e-12);
        CHECK(std::abs(r.dataflow_match - 1.0) < 1e-12);
        CHECK(r.flags.empty());
    }
}

TEST_CASE("codebleu default weights are 0.25 each and must sum to 1") {
    CodeBleuWeights w;
    CHECK(w.alpha == 0.25);
    CHECK(w.beta == 0.25);
    CHECK(w.gamma == 0.25);
    CHECK(w.delta == 0.25);
    CHECK_THROWS_AS(codebleu("x = 1", "x = 1", CodeBleuWeights{0.5, 0.5, 0.5, 0.5}),
                    DomainError);
}

TEST_CASE("codebleu empty candidate scores 0 with a parse-failure flag") {
    CodeBleuResult r = codebleu("", "x = 1");
    CHECK(r.score == 0.0);
    REQUIRE(r.flags.size() == 1);
    CHECK(r.flags[0] == "candidate_parse_failure");

    CodeBleuResult broken = codebleu("def f(:\n    pass", "def f():\n    pass\n");
    CHECK(broken.ast_match == 0.0);
    CHECK(broken.dataflow_match == 0.0);
    CHECK(!broken.flags.empty());
}

TEST_CASE("codebleu five-token pair matches the hand-computed components") {
    // cand "x = a + b" vs ref "x = a - b": 5 tokens each, BP = 1
    // unigrams 4/5, bigrams 2/4, trigrams 1/3, 4-grams 0 -> epsilon
    const double eps = 1e-9;
    double expected_bleu = std::pow(0.8 * 0.5 * (1.0 / 3.0) * eps, 0.25);
    // no keyword tokens: the weighted component equals plain BLEU
    double expected_weighted = expected_bleu;
    // ref subtrees: Module, Assign, BinOp[-], Name x3 = 6 nodes; Names match
    double expected_ast = 3.0 / 6.0;
    // ref has no def-use edge (a, b unbound; x never read) -> convention 1.0
    double expected_dataflow = 1.0;
    double expected =
        0.25 * expected_bleu + 0.25 * expected_weighted + 0.25 * expected_ast +
        0.25 * expected_dataflow;

    CodeBleuResult r = codebleu("x = a + b", "x = a - b");
    CHECK(std::abs(r.bleu - expected_bleu) < 1e-6);
    CHECK(std::abs(r.weighted_ngram - expected_weighted) < 1e-6);
    CHECK(std::abs(r.ast_match - expected_ast) < 1e-6);
    CHECK(std::abs(r.dataflow_match - expected_dataflow) < 1e-6);
    CHECK(std::abs(r.score - expected) < 1e-6);
}

TEST_CASE("keyword-weighted component rewards keyword overlap") {
    // identical keyword-bearing prefix, differing identifier
    std::string ref = "return x";
    double plain = bleu_score(code_tokens("return y"), code_tokens(ref), false);
    double weighted = bleu_score(code_tokens("return y"), code_tokens(ref), true);
    CHECK(weighted > plain); // the matched `return` unigram carries weight 5
}

TEST_CASE("weight linearity in the BLEU share") {
    std::string cand = "def f(x):\n    return x + 1\n";
    std::string ref = "def f(x):\n    y = x + 1\n    return y\n";
    CodeBleuResult base = codebleu(cand, ref);
    CodeBleuResult shifted = codebleu(cand, ref, CodeBleuWeights{0.5, 0.25, 0.25, 0.0});
    double expected = base.score + 0.25 * base.bleu - 0.25 * base.dataflow_match;
    CHECK(std::abs(shifted.score - expected) < 1e-9);
}

TEST_CASE("metrics are reference-directed, not symmetric") {
    std::string a = "def f():\n    return 1\n";
    std::string b = "def f():\n    x = 1\n    y = x\n    return y\n";
    CodeBleuResult ab = codebleu(a, b);
    CodeBleuResult ba = codebleu(b, a);
    CHECK(std::abs(ab.score - ba.score) > 1e-6);

    RougeL rab = rouge_l_text(a, b);
    RougeL rba = rouge_l_text(b, a);
    CHECK(std::abs(rab.precision - rba.precision) > 1e-9);
}

TEST_CASE("all scores stay within [0, 1]") {
    const char* pairs[][2] = {
        {"x = 1", "y = 2"},
        {"def f():\n    pass\n", "def g(a, b):\n    return a * b\n"},
        {"a = b = c = 1", "while a:\n    a -= 1\n"},
    };
    for (auto& p : pairs) {
        CodeBleuResult r = codebleu(p[0], p[1]);
        CHECK(r.score >= 0.0);
        CHECK(r.score <= 1.0);
        for (double c : {r.bleu, r.weighted_ngram, r.ast_match, r.dataflow_match}) {
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
        RougeL rl = rouge_l_text(p[0], p[1]);
        CHECK(rl.f1 >= 0.0);
        CHECK(rl.f1 <= 1.0);
    }
}

TEST_CASE("dataflow component tracks def-use structure") {
    // same def-use chain under renamed variables scores 1.0
    std::string ref = "a = 1\nb = a + 1\nreturn_value = b\n";
    std::string cand = "x = 1\ny = x + 1\nreturn_value2 = y\n";
    CHECK(dataflow_match_score(cand, ref) == 1.0);

    // a use rebound to a different definition breaks the edge
    std::string other = "x = 1\nx = 2\ny = x + 1\nreturn_value2 = y\n";
    CHECK(dataflow_match_score(other, ref) < 1.0);
}
