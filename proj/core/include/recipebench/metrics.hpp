#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "recipebench/types.hpp"

namespace recipebench::metrics {

/// Metric-side tokenization: whitespace word-level, lowercased. Distinct
/// from the BPE tokenizer.
using Words = std::vector<std::string>;

Words tokenize_words(std::string_view text);

struct ScoredPair {
    Words hypothesis;
    Words reference;
};

ScoredPair make_pair(std::string_view hypothesis, std::string_view reference);

struct BleuOptions {
    /// Add-one smoothing on numerator and denominator for orders >= 2.
    /// Off by default: a missing higher-order match scores a hard zero.
    bool smooth_add_one = false;
};

/// Geometric mean of clipped n-gram precisions for n=1..4 times the
/// brevity penalty min(1, exp(1 - r/c)). Throws DataError on an empty
/// reference.
double bleu4(const ScoredPair& pair, const BleuOptions& options = {});

/// Pooled corpus-level BLEU-4 over all pairs (counts and lengths summed
/// before the ratio), for comparison against corpus-reported numbers.
double bleu4_corpus(const std::vector<ScoredPair>& pairs, const BleuOptions& options = {});

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// LCS-based ROUGE-L: P = LCS/|hyp|, R = LCS/|ref|, F1 = 2PR/(P+R).
RougeScore rouge_l(const ScoredPair& pair);

std::size_t lcs_length(const Words& a, const Words& b);

/// Optional third matcher stage after exact and Porter-stem matching
/// (e.g. a synonym lexicon).
using ExtraMatcher = std::function<bool(const std::string&, const std::string&)>;

/// Unigram alignment through staged matchers; Fmean = 10PR/(R+9P) scaled
/// by the fragmentation penalty 0.5*(chunks/matches)^3. The alignment
/// maximizes matches, then minimizes chunks (exact for small inputs,
/// bounded search beyond that).
double meteor(const ScoredPair& pair, const ExtraMatcher& extra = nullptr);

/// Unique word bigrams over total bigrams, per hypothesis, averaged over
/// hypotheses that have at least one bigram. Throws DataError when no
/// hypothesis has two tokens.
double distinct2(const std::vector<Words>& hypotheses);

/// Corpus-pooled variant: one ratio over all bigrams of all hypotheses.
double distinct2_pooled(const std::vector<Words>& hypotheses);

/// Deterministic token-in-context embedding source for BERTScore-style
/// scoring. Bundled providers are static; a real contextual encoder can
/// implement the same contract.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    /// One vector of dimension() reals per token.
    virtual std::vector<std::vector<double>> embed(const Words& tokens) const = 0;
    virtual std::string name() const = 0;
};

/// Orthogonal unit basis per vocabulary word; words outside the vocabulary
/// embed to the zero vector (cosine 0 against everything).
class OneHotProvider : public EmbeddingProvider {
public:
    explicit OneHotProvider(std::vector<std::string> vocabulary);

    /// Vocabulary = sorted distinct words over all pairs.
    static OneHotProvider from_pairs(const std::vector<ScoredPair>& pairs);

    std::size_t dimension() const override { return vocabulary_.size(); }
    std::vector<std::vector<double>> embed(const Words& tokens) const override;
    std::string name() const override { return "one-hot"; }

private:
    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Loads a GloVe-style text file: word followed by `dimension` reals per
/// line. Unknown words embed to the zero vector.
class WordVectorProvider : public EmbeddingProvider {
public:
    explicit WordVectorProvider(const std::filesystem::path& path);

    std::size_t dimension() const override { return dimension_; }
    std::vector<std::vector<double>> embed(const Words& tokens) const override;
    std::string name() const override { return name_; }

private:
    std::size_t dimension_ = 0;
    std::string name_;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct BertScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Greedy matching: P is the mean over hypothesis tokens of the maximum
/// cosine similarity to any reference token, R symmetric, F1 harmonic.
/// No idf weighting, no baseline rescaling.
BertScore bertscore(const ScoredPair& pair, const EmbeddingProvider& provider);

struct PerplexitySummary {
    double pooled = 0.0;  // micro-averaged over all scored positions
    double macro = 0.0;   // mean of per-sequence perplexities
    std::string computed_on;
};

struct EvalOptions {
    BleuOptions bleu;
    bool diversity_pooled = false;
};

/// One row of the evaluation report, in Table-layout column order:
/// ROUGE-L P/R/F1, BLEU-4, Diversity, METEOR, PPL, BERTScore F1.
struct MetricReport {
    RougeScore rouge;
    double bleu4 = 0.0;
    double bleu4_corpus = 0.0;
    double diversity2 = 0.0;
    double meteor = 0.0;
    std::optional<PerplexitySummary> ppl;
    BertScore bert;
    std::size_t pair_count = 0;

    // provenance
    std::string averaging = "macro (per-recipe mean)";
    std::string provider_name;
    std::string bleu_smoothing = "none";
    std::string diversity_mode = "per-recipe mean";
};

/// Macro-averages every per-pair metric over the pairs. Per-metric score
/// lists are sorted before summation so the result is bit-for-bit
/// invariant under permutation of the pair list.
MetricReport evaluate_corpus(const std::vector<ScoredPair>& pairs, const EmbeddingProvider& provider,
                             const EvalOptions& options = {},
                             std::optional<PerplexitySummary> ppl = std::nullopt);

/// Metric columns print truncated to 2 decimals (0.5486 renders as 0.54),
/// reproducing the reference report's rounding.
std::string format_metric(double value);

/// Human-readable aligned table with a provenance header; columns are
/// ROUGE-L P/R/F1, BLEU-4, Diversity, METEOR, PPL (down arrow), BERTScore (F1).
std::string render_report_table(const MetricReport& report);

nlohmann::json report_to_json(const MetricReport& report);

/// Record-per-line pairs file: {"hypothesis": ..., "reference": ...}.
/// Throws DataError with the record index on misaligned or bad records.
std::vector<ScoredPair> read_pairs_jsonl(const std::filesystem::path& path);

} // namespace recipebench::metrics
