#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recipebench/types.hpp"

namespace recipebench::tokenizer {
class Model;
}

namespace recipebench::corpus {

// Structural marker strings, in grammar order.
inline constexpr std::string_view kRecipeStart = "<RECIPE_START>";
inline constexpr std::string_view kTitleStart  = "<TITLE_START>";
inline constexpr std::string_view kTitleEnd    = "<TITLE_END>";
inline constexpr std::string_view kIngrStart   = "<INGR_START>";
inline constexpr std::string_view kNextIngr    = "<NEXT_INGR>";
inline constexpr std::string_view kIngrEnd     = "<INGR_END>";
inline constexpr std::string_view kInstrStart  = "<INSTR_START>";
inline constexpr std::string_view kNextInstr   = "<NEXT_INSTR>";
inline constexpr std::string_view kInstrEnd    = "<INSTR_END>";
inline constexpr std::string_view kRecipeEnd   = "<RECIPE_END>";
inline constexpr std::string_view kPadToken    = "[PAD]";

/// The ten structural markers, in grammar order.
const std::vector<std::string>& structural_markers();

/// Structural markers plus the padding token (11 strings). These are the
/// reserved vocabulary entries the tokenizer must keep atomic.
const std::vector<std::string>& special_tokens();

struct RawRecipe {
    std::string title;
    std::vector<std::string> ingredients;
    std::vector<std::string> instructions;
    std::optional<std::string> cuisine;
    std::string source_id;
};

/// A recipe after normalization: lowercased, whitespace collapsed, no empty
/// fields, no reserved marker strings, serialized length within bounds.
struct CleanRecipe {
    std::string title;
    std::vector<std::string> ingredients;
    std::vector<std::string> instructions;
    std::optional<std::string> cuisine;

    bool operator==(const CleanRecipe&) const = default;
};

enum class RejectReason {
    kMissingField,
    kTooShort,
    kTooLong,
    kReservedMarker,
};

std::string_view to_string(RejectReason reason);

/// Bounds on the whitespace-token count of the serialized recipe.
struct LengthBounds {
    std::size_t min_tokens = 50;
    std::size_t max_tokens = 1024;
};

/// Rejection is a normal outcome of cleaning, not a fault.
struct CleanResult {
    std::optional<CleanRecipe> recipe;
    std::optional<RejectReason> reason;

    bool accepted() const { return recipe.has_value(); }
};

/// Normalizes a raw record or rejects it, naming the first failed rule.
CleanResult clean(const RawRecipe& raw, const LengthBounds& bounds = {});

/// Lowercase + collapse runs of whitespace to single spaces + trim.
std::string normalize_text(std::string_view text);

/// Single marker-delimited sequence; see parse() for the inverse. The
/// cuisine label has no slot in the marker grammar and is carried
/// out-of-band by the pipeline.
std::string serialize(const CleanRecipe& recipe);

/// Inverse of serialize(). Throws DataError naming the first missing or
/// out-of-order marker. The parsed recipe has no cuisine label.
CleanRecipe parse(std::string_view text);

/// Serialized sequence paired with the record it encodes.
struct StructuredRecipe {
    std::string text;
    CleanRecipe origin;
};

StructuredRecipe make_structured(const CleanRecipe& recipe);

/// Number of whitespace-separated tokens in the serialized form; the
/// quantity the length filter bounds.
std::size_t serialized_token_count(const CleanRecipe& recipe);

struct DatasetSplit {
    std::vector<CleanRecipe> train;
    std::vector<CleanRecipe> validation;
    std::vector<CleanRecipe> test;
    std::uint64_t seed = 0;
};

/// Seeded shuffle then slice floor(0.8n) / floor(0.1n) / remainder.
/// A pure function of (input order, seed); the shuffle is hand-rolled so
/// results do not depend on the standard library implementation.
/// Throws DataError for fewer than 10 recipes.
DatasetSplit split(std::vector<CleanRecipe> recipes, std::uint64_t seed);

struct CorpusStats {
    std::size_t total_recipes = 0;
    std::array<std::size_t, 3> split_sizes{};  // train, validation, test
    double avg_tokens_per_recipe = 0.0;
    std::size_t vocab_size_estimate = 0;
    std::string token_unit;  // "bpe" or "whitespace"
};

/// Mean encoded length over all recipes in all splits; vocabulary size is
/// the tokenizer's true post-augmentation size.
CorpusStats stats(const DatasetSplit& split, const tokenizer::Model& model);

/// Tokenizer-free variant used before a model exists: whitespace tokens,
/// with the distinct-word count as the vocabulary estimate.
CorpusStats word_stats(const DatasetSplit& split);

/// Two-column "Feature / Value" table of the dataset statistics.
std::string render_stats_table(const CorpusStats& stats);

struct IngestionReport {
    std::size_t total = 0;
    std::size_t accepted = 0;
    std::size_t rejected_missing_field = 0;
    std::size_t rejected_too_short = 0;
    std::size_t rejected_too_long = 0;
    std::size_t rejected_reserved_marker = 0;

    void count(const CleanResult& result);
};

/// Reads one recipe object per line (JSON records with fields title /
/// ingredients / instructions / cuisine / source_id). Throws DataError
/// with a line number on malformed records or duplicate source ids.
std::vector<RawRecipe> read_recipes_jsonl(const std::filesystem::path& path);

void write_ingestion_report(const std::filesystem::path& path, const IngestionReport& report);

} // namespace recipebench::corpus
