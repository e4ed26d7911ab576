#include "recipebench/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace recipebench::lm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);  // round-trips doubles exactly
    return buf;
}

} // namespace

std::vector<double> softmax(const NextTokenDistribution& d) {
    std::vector<double> probs(d.logits.size(), 0.0);
    double max_logit = kNegInf;
    for (double l : d.logits) max_logit = std::max(max_logit, l);
    if (max_logit == kNegInf) return probs;

    double total = 0.0;
    for (std::size_t i = 0; i < d.logits.size(); ++i) {
        if (d.logits[i] == kNegInf) continue;
        probs[i] = std::exp(d.logits[i] - max_logit);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

std::vector<double> log_softmax(const NextTokenDistribution& d) {
    std::vector<double> out(d.logits.size(), kNegInf);
    double max_logit = kNegInf;
    for (double l : d.logits) max_logit = std::max(max_logit, l);
    if (max_logit == kNegInf) return out;

    double total = 0.0;
    for (double l : d.logits) {
        if (l != kNegInf) total += std::exp(l - max_logit);
    }
    double log_norm = max_logit + std::log(total);
    for (std::size_t i = 0; i < d.logits.size(); ++i) {
        if (d.logits[i] != kNegInf) out[i] = d.logits[i] - log_norm;
    }
    return out;
}

double NextTokenModel::log_prob(std::span<const TokenId> prefix, TokenId token) const {
    NextTokenDistribution d = next_logits(prefix);
    if (token >= d.size()) {
        throw DataError("token id " + std::to_string(token) + " outside vocabulary of size " +
                        std::to_string(d.size()));
    }
    return log_softmax(d)[token];
}

std::string NGramModel::pack_context(std::span<const TokenId> context) {
    std::string key;
    key.reserve(context.size() * 4);
    for (TokenId id : context) {
        key.push_back(static_cast<char>(id & 0xff));
        key.push_back(static_cast<char>((id >> 8) & 0xff));
        key.push_back(static_cast<char>((id >> 16) & 0xff));
        key.push_back(static_cast<char>((id >> 24) & 0xff));
    }
    return key;
}

NGramModel train_ngram(const std::vector<std::vector<TokenId>>& sequences, std::size_t order,
                       double k, std::size_t vocab_size) {
    if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
    if (!(k > 0.0)) throw std::invalid_argument("smoothing constant k must be > 0");
    if (vocab_size == 0) throw std::invalid_argument("vocabulary size must be > 0");
    if (sequences.empty()) throw DataError("cannot train n-gram model on an empty corpus");

    NGramModel model;
    model.order_ = order;
    model.k_ = k;
    model.vocab_size_ = vocab_size;

    for (const auto& seq : sequences) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (seq[i] >= vocab_size) {
                throw DataError("token id " + std::to_string(seq[i]) +
                                " outside vocabulary of size " + std::to_string(vocab_size));
            }
            // every context length 0..order-1; the empty context is the unigram
            std::size_t max_len = std::min(order - 1, i);
            for (std::size_t len = 0; len <= max_len; ++len) {
                std::string key = NGramModel::pack_context(
                    std::span<const TokenId>(seq.data() + i - len, len));
                ++model.counts_[key][seq[i]];
                ++model.context_totals_[key];
            }
        }
    }
    return model;
}

double NGramModel::log_prob(std::span<const TokenId> prefix, TokenId token) const {
    std::span<const TokenId> effective = prefix;
    if (effective.size() > order_ - 1) {
        effective = effective.subspan(effective.size() - (order_ - 1));
    }
    std::string key = pack_context(effective);
    auto total_it = context_totals_.find(key);
    if (total_it == context_totals_.end()) {
        // unseen context: back off to the unigram distribution
        key.clear();
        total_it = context_totals_.find(key);
        if (total_it == context_totals_.end()) {
            throw DataError("n-gram model has no counts; was it trained?");
        }
    }
    std::uint64_t context_total = total_it->second;
    std::uint64_t token_count = 0;
    auto row_it = counts_.find(key);
    if (row_it != counts_.end()) {
        auto cell = row_it->second.find(token);
        if (cell != row_it->second.end()) token_count = cell->second;
    }
    double numerator = static_cast<double>(token_count) + k_;
    double denominator =
        static_cast<double>(context_total) + k_ * static_cast<double>(vocab_size_);
    return std::log(numerator) - std::log(denominator);
}

NextTokenDistribution NGramModel::next_logits(std::span<const TokenId> prefix) const {
    std::span<const TokenId> context = prefix;
    if (context.size() > order_ - 1) {
        context = context.subspan(context.size() - (order_ - 1));
    }
    std::string key = pack_context(context);
    if (context_totals_.find(key) == context_totals_.end()) key.clear();

    auto total_it = context_totals_.find(key);
    if (total_it == context_totals_.end()) {
        throw DataError("n-gram model has no counts; was it trained?");
    }
    double denominator =
        static_cast<double>(total_it->second) + k_ * static_cast<double>(vocab_size_);
    double floor_logit = std::log(k_) - std::log(denominator);

    NextTokenDistribution d;
    d.logits.assign(vocab_size_, floor_logit);
    auto row_it = counts_.find(key);
    if (row_it != counts_.end()) {
        for (const auto& [token, count] : row_it->second) {
            d.logits[token] = std::log(static_cast<double>(count) + k_) - std::log(denominator);
        }
    }
    return d;
}

LogLikelihood sequence_log_likelihood(const NextTokenModel& model, std::span<const TokenId> ids,
                                      const std::vector<bool>& pad_mask) {
    if (ids.size() < 2) {
        throw DataError("sequence too short to score: " + std::to_string(ids.size()) +
                        " tokens (need at least 2)");
    }
    if (!pad_mask.empty() && pad_mask.size() != ids.size()) {
        throw DataError("pad mask length " + std::to_string(pad_mask.size()) +
                        " does not match sequence length " + std::to_string(ids.size()));
    }

    LogLikelihood result;
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (!pad_mask.empty() && pad_mask[i]) continue;
        result.total += model.log_prob(ids.subspan(0, i), ids[i]);
        ++result.positions;
    }
    return result;
}

namespace {

std::vector<LogLikelihood> score_all(const NextTokenModel& model,
                                     const std::vector<std::vector<TokenId>>& sequences,
                                     const std::vector<std::vector<bool>>& pad_masks) {
    if (!pad_masks.empty() && pad_masks.size() != sequences.size()) {
        throw DataError("pad mask count does not match sequence count");
    }
    std::vector<LogLikelihood> out;
    out.reserve(sequences.size());
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        out.push_back(sequence_log_likelihood(model, sequences[s],
                                              pad_masks.empty() ? std::vector<bool>{}
                                                                : pad_masks[s]));
    }
    return out;
}

} // namespace

double perplexity(const NextTokenModel& model, const std::vector<std::vector<TokenId>>& sequences,
                  const std::vector<std::vector<bool>>& pad_masks) {
    auto scores = score_all(model, sequences, pad_masks);

    // sort before reduction so the result is permutation-invariant
    std::vector<std::pair<double, std::size_t>> parts;
    parts.reserve(scores.size());
    for (const auto& s : scores) parts.emplace_back(s.total, s.positions);
    std::sort(parts.begin(), parts.end());

    double total = 0.0;
    std::size_t positions = 0;
    for (const auto& [t, n] : parts) {
        total += t;
        positions += n;
    }
    if (positions == 0) throw DataError("no scored positions: everything is pad-masked");
    return std::exp(-total / static_cast<double>(positions));
}

std::vector<double> per_sequence_perplexity(const NextTokenModel& model,
                                            const std::vector<std::vector<TokenId>>& sequences,
                                            const std::vector<std::vector<bool>>& pad_masks) {
    auto scores = score_all(model, sequences, pad_masks);
    std::vector<double> out;
    out.reserve(scores.size());
    for (const auto& s : scores) {
        if (s.positions == 0) continue;  // fully masked sequences have no perplexity
        out.push_back(std::exp(-s.total / static_cast<double>(s.positions)));
    }
    return out;
}

void NGramModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write n-gram model: " + path.string());

    out << "recipebench-ngram v1\n";
    out << "order " << order_ << '\n';
    out << "k " << format_double(k_) << '\n';
    out << "vocab " << vocab_size_ << '\n';

    std::size_t rows = 0;
    for (const auto& [key, row] : counts_) rows += row.size();
    out << "counts " << rows << '\n';
    for (const auto& [key, row] : counts_) {  // std::map: deterministic order
        for (const auto& [token, count] : row) {
            out << key.size() / 4;
            for (std::size_t i = 0; i < key.size(); i += 4) {
                TokenId id = static_cast<unsigned char>(key[i]) |
                             (static_cast<unsigned char>(key[i + 1]) << 8) |
                             (static_cast<unsigned char>(key[i + 2]) << 16) |
                             (static_cast<TokenId>(static_cast<unsigned char>(key[i + 3])) << 24);
                out << ' ' << id;
            }
            out << ' ' << token << ' ' << count << '\n';
        }
    }
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open n-gram model: " + path.string());

    std::string line;
    if (!std::getline(in, line) || line != "recipebench-ngram v1") {
        throw DataError("not a recipebench n-gram model: " + path.string());
    }

    NGramModel model;
    std::string word;
    std::size_t declared_rows = 0;
    auto read_header = [&](const char* name, auto& value) {
        if (!std::getline(in, line)) throw DataError(path.string() + ": truncated header");
        std::istringstream ss(line);
        ss >> word >> value;
        if (!ss || word != name) throw DataError(path.string() + ": bad header line: " + line);
    };
    read_header("order", model.order_);
    read_header("k", model.k_);
    read_header("vocab", model.vocab_size_);
    read_header("counts", declared_rows);

    for (std::size_t r = 0; r < declared_rows; ++r) {
        if (!std::getline(in, line)) throw DataError(path.string() + ": truncated count table");
        std::istringstream ss(line);
        std::size_t context_len = 0;
        ss >> context_len;
        std::vector<TokenId> context(context_len);
        for (auto& id : context) ss >> id;
        TokenId token = 0;
        std::uint64_t count = 0;
        ss >> token >> count;
        if (!ss) throw DataError(path.string() + ": bad count row: " + line);
        std::string key = pack_context(context);
        model.counts_[key][token] = count;
        model.context_totals_[key] += count;
    }
    return model;
}

} // namespace recipebench::lm
