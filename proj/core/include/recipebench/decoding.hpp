#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include "recipebench/lm.hpp"
#include "recipebench/types.hpp"

namespace recipebench::decoding {

enum class FilterOrder {
    kTopKThenTopP,  // temperature -> top-k -> top-p (default convention)
    kTopPThenTopK,
};

/// Whether top-p keeps the shortest prefix with cumulative mass >= p
/// (inclusive, so p=1 is the identity) or strictly > p.
enum class TopPBoundary {
    kInclusive,
    kStrict,
};

struct SamplerConfig {
    double temperature = 0.7;
    std::optional<std::size_t> top_k = 50;
    std::optional<double> top_p = 0.95;
    std::size_t max_new_tokens = 256;
    std::uint64_t seed = 0;
    /// Generation stops after emitting this token. A value >= vocab size
    /// disables the stop check.
    TokenId stop_token = 0;
    FilterOrder filter_order = FilterOrder::kTopKThenTopP;
    TopPBoundary top_p_boundary = TopPBoundary::kInclusive;
};

enum class StopReason {
    kStopToken,
    kLengthLimit,
};

struct GenerationResult {
    /// Prompt followed by the generated tokens (stop token included).
    std::vector<TokenId> ids;
    StopReason stop_reason = StopReason::kLengthLimit;
    /// log P of each generated token under the model's raw distribution
    /// (before temperature or filtering), comparable across strategies.
    std::vector<double> per_step_logprobs;
};

/// logits / T; -infinity stays -infinity; the argmax never changes.
/// Throws std::invalid_argument for T <= 0.
lm::NextTokenDistribution apply_temperature(const lm::NextTokenDistribution& d, double temperature);

/// Keeps the k most probable tokens, ties at the boundary broken by
/// ascending token id; everything else becomes -infinity. Exactly k
/// survive, or all finite entries when fewer than k exist.
lm::NextTokenDistribution filter_top_k(const lm::NextTokenDistribution& d, std::size_t k);

/// Keeps the shortest descending-probability prefix whose cumulative mass
/// reaches p (ties by ascending id); the top token always survives.
lm::NextTokenDistribution filter_top_p(const lm::NextTokenDistribution& d, double p,
                                       TopPBoundary boundary = TopPBoundary::kInclusive);

/// Draws from softmax of the finite support. The uniform variate comes
/// from explicit 53-bit mt19937_64 output, so draws are reproducible
/// across platforms. Throws DataError when no entry is finite.
TokenId sample_next(const lm::NextTokenDistribution& d, std::mt19937_64& rng);

/// Stochastic decoding loop: logits -> temperature -> filters (in
/// config.filter_order) -> sample, until stop_token or max_new_tokens.
GenerationResult generate(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                          const SamplerConfig& config);

/// Argmax at every step (ties by ascending id); deterministic, equal to
/// beam_search with width 1.
GenerationResult generate_greedy(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                                 std::size_t max_new_tokens, TokenId stop_token);

struct BeamConfig {
    std::size_t width = 4;
    std::size_t max_new_tokens = 256;
    TokenId stop_token = 0;
    /// Hypothesis score is logprob / length^penalty; 0 keeps raw sums.
    double length_penalty = 0.0;
};

/// Length-complete beam search over summed log-probs. Hypotheses that hit
/// the stop token are set aside; the best-scoring hypothesis wins, ties
/// broken by earlier completion then lexicographic id order.
GenerationResult beam_search(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                             const BeamConfig& config);

} // namespace recipebench::decoding
