#include "recipebench/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace recipebench::decoding {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Indices ordered by descending probability, ties by ascending id.
std::vector<std::size_t> order_by_probability(const std::vector<double>& logits) {
    std::vector<std::size_t> order(logits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
    return order;
}

// 53-bit uniform in [0,1); fully specified by mt19937_64, so draws are
// identical on every platform.
double canonical_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t argmax_token(const lm::NextTokenDistribution& d) {
    std::size_t best = 0;
    double best_logit = kNegInf;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.logits[i] > best_logit) {
            best_logit = d.logits[i];
            best = i;
        }
    }
    return best;
}

} // namespace

lm::NextTokenDistribution apply_temperature(const lm::NextTokenDistribution& d, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("temperature must be > 0, got " + std::to_string(temperature));
    }
    lm::NextTokenDistribution out;
    out.logits.reserve(d.size());
    for (double l : d.logits) out.logits.push_back(l == kNegInf ? kNegInf : l / temperature);
    return out;
}

lm::NextTokenDistribution filter_top_k(const lm::NextTokenDistribution& d, std::size_t k) {
    if (k < 1) throw std::invalid_argument("top-k requires k >= 1");

    auto order = order_by_probability(d.logits);
    lm::NextTokenDistribution out;
    out.logits.assign(d.size(), kNegInf);
    std::size_t kept = 0;
    for (std::size_t idx : order) {
        if (kept >= k || d.logits[idx] == kNegInf) break;
        out.logits[idx] = d.logits[idx];
        ++kept;
    }
    return out;
}

lm::NextTokenDistribution filter_top_p(const lm::NextTokenDistribution& d, double p,
                                       TopPBoundary boundary) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("top-p requires p in (0, 1]");

    std::vector<double> probs = lm::softmax(d);
    auto order = order_by_probability(d.logits);

    lm::NextTokenDistribution out;
    out.logits.assign(d.size(), kNegInf);
    double cumulative = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        std::size_t idx = order[rank];
        if (d.logits[idx] == kNegInf) break;
        bool keep = rank == 0;  // the top token always survives
        if (!keep) {
            keep = boundary == TopPBoundary::kInclusive ? cumulative < p : cumulative <= p;
        }
        if (!keep) break;
        out.logits[idx] = d.logits[idx];
        cumulative += probs[idx];
    }
    return out;
}

TokenId sample_next(const lm::NextTokenDistribution& d, std::mt19937_64& rng) {
    std::vector<double> probs = lm::softmax(d);
    double u = canonical_uniform(rng);

    double cumulative = 0.0;
    std::int64_t last_finite = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (d.logits[i] == kNegInf) continue;
        last_finite = static_cast<std::int64_t>(i);
        cumulative += probs[i];
        if (u < cumulative) return static_cast<TokenId>(i);
    }
    if (last_finite < 0) throw DataError("cannot sample: no token has a finite logit");
    return static_cast<TokenId>(last_finite);  // u landed in the rounding tail
}

namespace {

struct StepOutcome {
    TokenId token;
    double raw_logprob;
};

GenerationResult run_loop(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                          std::size_t max_new_tokens, TokenId stop_token,
                          const std::function<TokenId(const lm::NextTokenDistribution&)>& choose) {
    if (prompt.empty()) throw DataError("generation requires a non-empty prompt");

    GenerationResult result;
    result.ids.assign(prompt.begin(), prompt.end());
    result.stop_reason = StopReason::kLengthLimit;

    for (std::size_t step = 0; step < max_new_tokens; ++step) {
        lm::NextTokenDistribution d = model.next_logits(result.ids);
        TokenId token = choose(d);
        result.per_step_logprobs.push_back(lm::log_softmax(d)[token]);
        result.ids.push_back(token);
        if (token == stop_token) {
            result.stop_reason = StopReason::kStopToken;
            break;
        }
    }
    return result;
}

} // namespace

GenerationResult generate(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                          const SamplerConfig& config) {
    std::mt19937_64 rng(config.seed);
    auto choose = [&](const lm::NextTokenDistribution& raw) {
        lm::NextTokenDistribution d = apply_temperature(raw, config.temperature);
        if (config.filter_order == FilterOrder::kTopKThenTopP) {
            if (config.top_k) d = filter_top_k(d, *config.top_k);
            if (config.top_p) d = filter_top_p(d, *config.top_p, config.top_p_boundary);
        } else {
            if (config.top_p) d = filter_top_p(d, *config.top_p, config.top_p_boundary);
            if (config.top_k) d = filter_top_k(d, *config.top_k);
        }
        return sample_next(d, rng);
    };
    return run_loop(model, prompt, config.max_new_tokens, config.stop_token, choose);
}

GenerationResult generate_greedy(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                                 std::size_t max_new_tokens, TokenId stop_token) {
    return run_loop(model, prompt, max_new_tokens, stop_token,
                    [](const lm::NextTokenDistribution& d) {
                        return static_cast<TokenId>(argmax_token(d));
                    });
}

namespace {

struct Hypothesis {
    std::vector<TokenId> generated;
    double logprob = 0.0;
    bool finished = false;

    double score(double length_penalty) const {
        if (length_penalty == 0.0 || generated.empty()) return logprob;
        return logprob / std::pow(static_cast<double>(generated.size()), length_penalty);
    }
};

// Best hypothesis first: higher score, then earlier completion (shorter
// generated sequence among finished), then lexicographic id order.
bool better_than(const Hypothesis& a, const Hypothesis& b, double length_penalty) {
    double sa = a.score(length_penalty);
    double sb = b.score(length_penalty);
    if (sa != sb) return sa > sb;
    if (a.finished != b.finished) return a.finished;
    if (a.finished && a.generated.size() != b.generated.size()) {
        return a.generated.size() < b.generated.size();
    }
    return a.generated < b.generated;
}

} // namespace

GenerationResult beam_search(const lm::NextTokenModel& model, std::span<const TokenId> prompt,
                             const BeamConfig& config) {
    if (config.width < 1) throw std::invalid_argument("beam width must be >= 1");
    if (prompt.empty()) throw DataError("generation requires a non-empty prompt");

    std::vector<Hypothesis> live{Hypothesis{}};
    std::vector<Hypothesis> finished;

    std::vector<TokenId> scratch(prompt.begin(), prompt.end());
    for (std::size_t step = 0; step < config.max_new_tokens && !live.empty(); ++step) {
        std::vector<Hypothesis> expansions;
        expansions.reserve(live.size() * model.vocab_size());
        for (const Hypothesis& hyp : live) {
            scratch.resize(prompt.size());
            scratch.insert(scratch.end(), hyp.generated.begin(), hyp.generated.end());
            std::vector<double> logprobs = lm::log_softmax(model.next_logits(scratch));
            for (std::size_t token = 0; token < logprobs.size(); ++token) {
                if (logprobs[token] == kNegInf) continue;
                Hypothesis next = hyp;
                next.generated.push_back(static_cast<TokenId>(token));
                next.logprob += logprobs[token];
                next.finished = static_cast<TokenId>(token) == config.stop_token;
                expansions.push_back(std::move(next));
            }
        }

        std::sort(expansions.begin(), expansions.end(), [&](const Hypothesis& a, const Hypothesis& b) {
            return better_than(a, b, config.length_penalty);
        });

        // Finished expansions that outrank the beam cut are set aside; the
        // beam refills with the best unfinished ones.
        live.clear();
        for (Hypothesis& hyp : expansions) {
            if (live.size() >= config.width) break;
            if (hyp.finished) {
                finished.push_back(std::move(hyp));
            } else {
                live.push_back(std::move(hyp));
            }
        }
    }

    std::vector<Hypothesis> pool = std::move(finished);
    pool.insert(pool.end(), live.begin(), live.end());
    if (pool.empty()) throw DataError("beam search produced no hypotheses");
    const Hypothesis& best =
        *std::min_element(pool.begin(), pool.end(), [&](const Hypothesis& a, const Hypothesis& b) {
            return better_than(a, b, config.length_penalty);
        });

    GenerationResult result;
    result.ids.assign(prompt.begin(), prompt.end());
    result.ids.insert(result.ids.end(), best.generated.begin(), best.generated.end());
    result.stop_reason = best.finished ? StopReason::kStopToken : StopReason::kLengthLimit;

    // per-step raw logprobs along the winning path
    scratch.assign(prompt.begin(), prompt.end());
    for (TokenId token : best.generated) {
        result.per_step_logprobs.push_back(
            lm::log_softmax(model.next_logits(scratch))[token]);
        scratch.push_back(token);
    }
    return result;
}

} // namespace recipebench::decoding
