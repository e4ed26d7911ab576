#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "recipebench/types.hpp"

namespace recipebench::lm {

/// Unnormalized next-token scores in the natural-log domain. Entries are
/// finite or -infinity; -infinity marks a forbidden token.
struct NextTokenDistribution {
    std::vector<double> logits;

    std::size_t size() const { return logits.size(); }
};

/// Probabilities over the finite support; -infinity entries get 0.
std::vector<double> softmax(const NextTokenDistribution& d);

/// log softmax over the finite support; -infinity entries stay -infinity.
std::vector<double> log_softmax(const NextTokenDistribution& d);

/// The next-token contract every generation and perplexity consumer uses:
/// any provider mapping prefix ids to a length-V logit vector plugs in.
class NextTokenModel {
public:
    virtual ~NextTokenModel() = default;
    virtual std::size_t vocab_size() const = 0;
    virtual NextTokenDistribution next_logits(std::span<const TokenId> prefix) const = 0;

    /// log P(token | prefix). The default takes log_softmax of
    /// next_logits; backends with a cheaper direct path may override.
    virtual double log_prob(std::span<const TokenId> prefix, TokenId token) const;
};

/// Add-k n-gram model. Counts every context length 0..order-1, so the
/// empty context doubles as the unigram backoff:
///   P(t|c) = (count(c,t) + k) / (count(c) + k*V)   when c was observed,
/// and the unigram distribution otherwise. Every emitted distribution sums
/// to 1 within 1e-9. Immutable once trained.
class NGramModel : public NextTokenModel {
public:
    NGramModel() = default;

    std::size_t order() const { return order_; }
    double smoothing_k() const { return k_; }
    std::size_t vocab_size() const override { return vocab_size_; }

    NextTokenDistribution next_logits(std::span<const TokenId> prefix) const override;

    /// Direct count lookup with the same backoff rule as next_logits.
    double log_prob(std::span<const TokenId> prefix, TokenId token) const override;

    void save(const std::filesystem::path& path) const;
    static NGramModel load(const std::filesystem::path& path);

private:
    friend NGramModel train_ngram(const std::vector<std::vector<TokenId>>&, std::size_t, double,
                                  std::size_t);

    // Context key: ids packed 4 bytes little-endian each. std::map keeps
    // the dump order deterministic.
    static std::string pack_context(std::span<const TokenId> context);

    std::size_t order_ = 0;
    double k_ = 0.0;
    std::size_t vocab_size_ = 0;
    std::map<std::string, std::map<TokenId, std::uint64_t>> counts_;
    std::map<std::string, std::uint64_t> context_totals_;
};

/// Counts all contexts of length 0..order-1 over the sequences.
/// Throws DataError when no sequence is given; order >= 1 and k > 0 are
/// preconditions (std::invalid_argument).
NGramModel train_ngram(const std::vector<std::vector<TokenId>>& sequences, std::size_t order,
                       double k, std::size_t vocab_size);

struct LogLikelihood {
    double total = 0.0;         // sum of log P(t_i | t_<i) over scored positions
    std::size_t positions = 0;  // number of scored (non-pad) positions
};

/// Scores positions i >= 1 whose pad_mask entry is false (an empty mask
/// scores everything). Pad positions still appear in contexts, matching
/// the append-at-end padding convention, so appending masked padding never
/// changes the result. Throws DataError for sequences shorter than 2.
LogLikelihood sequence_log_likelihood(const NextTokenModel& model, std::span<const TokenId> ids,
                                      const std::vector<bool>& pad_mask = {});

/// Pooled (micro-averaged) perplexity: exp(-sum logp / sum positions) over
/// the whole set. Throws DataError when no position is scored.
double perplexity(const NextTokenModel& model, const std::vector<std::vector<TokenId>>& sequences,
                  const std::vector<std::vector<bool>>& pad_masks = {});

/// Per-sequence perplexities, for the macro-averaged report variant.
std::vector<double> per_sequence_perplexity(const NextTokenModel& model,
                                            const std::vector<std::vector<TokenId>>& sequences,
                                            const std::vector<std::vector<bool>>& pad_masks = {});

} // namespace recipebench::lm
