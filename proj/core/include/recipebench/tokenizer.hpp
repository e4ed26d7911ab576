#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "recipebench/corpus.hpp"
#include "recipebench/types.hpp"

namespace recipebench::tokenizer {

/// A pretokenized piece of text. Sealed segments (structural markers and
/// fraction strings) map to exactly one vocabulary id; BPE merges never
/// enter or cross them.
struct Segment {
    std::string text;
    bool sealed = false;

    bool operator==(const Segment&) const = default;
};

/// The 23 kitchen-measure fractions kept atomic: all reduced proper
/// fractions with denominators 2, 3, 4, 5, 6, 8 and 16.
const std::vector<std::string>& default_fraction_tokens();

/// Byte-level BPE model: 256 byte tokens, pre-inserted special and
/// fraction tokens, then one token per learned merge. Ids are dense
/// 0..V-1. Immutable once built; encode/decode are pure and safe to call
/// concurrently.
class Model {
public:
    Model() = default;

    std::size_t vocab_size() const { return id_to_token_.size(); }
    /// Throws DataError when the model has no padding token (bare imports).
    TokenId pad_id() const;
    const std::string& pad_token() const { return pad_token_; }

    const std::vector<std::string>& special_tokens() const { return specials_; }
    const std::vector<std::string>& fraction_tokens() const { return fractions_; }
    const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

    std::optional<TokenId> token_to_id(std::string_view token) const;
    /// Throws DataError for ids >= vocab_size().
    const std::string& id_to_token(TokenId id) const;

    struct Encoding {
        std::vector<TokenId> ids;
        /// Per-token [begin, end) byte span in the source text; contiguous,
        /// non-overlapping, covering the text exactly.
        std::vector<std::pair<std::size_t, std::size_t>> offsets;
    };

    /// Splits on whitespace, then seals any maximal substring equal to a
    /// special marker or fraction token. Fractions are matched longest
    /// first and skipped when flanked by a digit, so "11/22" contains no
    /// sealed "1/2". Whitespace runs are ordinary unsealed segments.
    std::vector<Segment> pretokenize(std::string_view text) const;

    /// Byte-level BPE inside each unsealed segment; sealed segments emit
    /// their single id. decode(encode(t).ids) == t for any byte string.
    Encoding encode(std::string_view text) const;

    std::string decode(std::span<const TokenId> ids) const;

    /// Writes vocab.txt, merges.txt and tokenizer.json under dir.
    /// load() reconstructs the model bit-exactly from the triple.
    void save(const std::filesystem::path& dir) const;

private:
    friend Model train_bpe(const std::vector<std::string>&, const struct TrainConfig&);
    friend Model augment(const Model&, const std::vector<std::string>&, const std::vector<std::string>&);
    friend Model load(const std::filesystem::path&);
    friend Model import_base(const std::filesystem::path&, const std::filesystem::path&);

    TokenId register_token(const std::string& token);
    void finalize();  // rebuild the derived lookups below
    std::vector<TokenId> bpe_segment(std::string_view segment) const;

    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<std::pair<std::string, std::string>> merges_;
    std::vector<std::string> specials_;
    std::vector<std::string> fractions_;
    std::string pad_token_;

    // derived lookups
    std::vector<std::pair<std::string, bool>> sealed_by_length_;  // (text, is_fraction), longest first
    std::unordered_map<std::uint64_t, std::pair<std::size_t, TokenId>> merge_lookup_;
    std::array<std::int64_t, 256> byte_ids_{};  // -1 when the byte is not in the vocabulary
};

struct TrainConfig {
    std::size_t target_vocab = 1000;
    /// Pre-inserted before merge learning and masked out of pair statistics.
    /// Clear all three for a bare byte-level BPE without sealed tokens.
    std::vector<std::string> special_tokens = corpus::special_tokens();
    std::vector<std::string> fraction_tokens = default_fraction_tokens();
    std::string pad_token = std::string(corpus::kPadToken);

    static TrainConfig defaults(std::size_t target_vocab);
};

/// Learns merges by descending pair frequency until the vocabulary reaches
/// target_vocab; equal-frequency pairs are ordered lexicographically by
/// left then right symbol. A candidate merge whose concatenation collides
/// with an existing token (notably a sealed one) is skipped. Deterministic
/// for identical (corpus, config).
Model train_bpe(const std::vector<std::string>& corpus_lines, const TrainConfig& config);

/// Adds markers and fractions to an existing model, each getting a fresh id
/// at the end of the id space. Throws DataError on duplicates.
Model augment(const Model& model, const std::vector<std::string>& markers,
              const std::vector<std::string>& fractions);

Model load(const std::filesystem::path& dir);

/// Imports a bare vocab/merges file pair (no specials, no fractions), for
/// parity experiments against externally trained tokenizers.
Model import_base(const std::filesystem::path& vocab_path, const std::filesystem::path& merges_path);

/// Escape used by the vocab and merges files: backslash and bytes <= 0x20
/// or == 0x7f become \xHH sequences so token strings stay one per line.
std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view text);

} // namespace recipebench::tokenizer
