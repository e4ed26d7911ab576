#include "recipebench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "recipebench/tokenizer.hpp"

namespace recipebench::corpus {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t begin = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > begin) words.emplace_back(text.substr(begin, i - begin));
    }
    return words;
}

bool contains_reserved_marker(std::string_view text) {
    for (const auto& marker : special_tokens()) {
        if (text.find(marker) != std::string_view::npos) return true;
    }
    return false;
}

std::string join(const std::vector<std::string>& parts, std::string_view separator) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += separator;
        out += parts[i];
    }
    return out;
}

} // namespace

const std::vector<std::string>& structural_markers() {
    static const std::vector<std::string> markers = {
        std::string(kRecipeStart), std::string(kTitleStart), std::string(kTitleEnd),
        std::string(kIngrStart),   std::string(kNextIngr),   std::string(kIngrEnd),
        std::string(kInstrStart),  std::string(kNextInstr),  std::string(kInstrEnd),
        std::string(kRecipeEnd),
    };
    return markers;
}

const std::vector<std::string>& special_tokens() {
    static const std::vector<std::string> specials = [] {
        std::vector<std::string> s = structural_markers();
        s.emplace_back(kPadToken);
        return s;
    }();
    return specials;
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::kMissingField: return "missing_field";
        case RejectReason::kTooShort: return "too_short";
        case RejectReason::kTooLong: return "too_long";
        case RejectReason::kReservedMarker: return "reserved_marker";
    }
    return "unknown";
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

CleanResult clean(const RawRecipe& raw, const LengthBounds& bounds) {
    auto reject = [](RejectReason reason) {
        return CleanResult{std::nullopt, reason};
    };

    CleanRecipe out;
    out.title = normalize_text(raw.title);
    for (const auto& line : raw.ingredients) {
        std::string norm = normalize_text(line);
        if (!norm.empty()) out.ingredients.push_back(std::move(norm));
    }
    for (const auto& line : raw.instructions) {
        std::string norm = normalize_text(line);
        if (!norm.empty()) out.instructions.push_back(std::move(norm));
    }
    if (raw.cuisine) {
        std::string norm = normalize_text(*raw.cuisine);
        if (!norm.empty()) out.cuisine = std::move(norm);
    }

    if (out.title.empty() || out.ingredients.empty() || out.instructions.empty()) {
        return reject(RejectReason::kMissingField);
    }

    // Marker collisions are rejected, not escaped; checked on the raw text
    // since normalization lowercases the markers away.
    if (contains_reserved_marker(raw.title)) {
        return reject(RejectReason::kReservedMarker);
    }
    for (const auto& line : raw.ingredients) {
        if (contains_reserved_marker(line)) return reject(RejectReason::kReservedMarker);
    }
    for (const auto& line : raw.instructions) {
        if (contains_reserved_marker(line)) return reject(RejectReason::kReservedMarker);
    }

    std::size_t tokens = serialized_token_count(out);
    if (tokens < bounds.min_tokens) return reject(RejectReason::kTooShort);
    if (tokens > bounds.max_tokens) return reject(RejectReason::kTooLong);

    return CleanResult{std::move(out), std::nullopt};
}

std::string serialize(const CleanRecipe& recipe) {
    std::string out;
    out += kRecipeStart;
    out += ' ';
    out += kTitleStart;
    out += ' ';
    out += recipe.title;
    out += ' ';
    out += kTitleEnd;
    out += ' ';
    out += kIngrStart;
    out += ' ';
    out += join(recipe.ingredients, std::string(" ") + std::string(kNextIngr) + " ");
    out += ' ';
    out += kIngrEnd;
    out += ' ';
    out += kInstrStart;
    out += ' ';
    out += join(recipe.instructions, std::string(" ") + std::string(kNextInstr) + " ");
    out += ' ';
    out += kInstrEnd;
    out += ' ';
    out += kRecipeEnd;
    return out;
}

StructuredRecipe make_structured(const CleanRecipe& recipe) {
    return StructuredRecipe{serialize(recipe), recipe};
}

std::size_t serialized_token_count(const CleanRecipe& recipe) {
    return split_words(serialize(recipe)).size();
}

namespace {

class MarkerStream {
public:
    explicit MarkerStream(std::string_view text) : words_(split_words(text)) {}

    bool done() const { return pos_ >= words_.size(); }
    std::size_t position() const { return pos_; }
    const std::string& peek() const { return words_[pos_]; }
    const std::string& next() { return words_[pos_++]; }

    void expect(std::string_view marker) {
        if (done()) {
            throw DataError("malformed structure: missing " + std::string(marker) +
                            " at end of input");
        }
        if (words_[pos_] != marker) {
            throw DataError("malformed structure at token " + std::to_string(pos_) +
                            ": expected " + std::string(marker) + ", found " + words_[pos_]);
        }
        ++pos_;
    }

    static bool is_marker(const std::string& word) {
        const auto& markers = structural_markers();
        return std::find(markers.begin(), markers.end(), word) != markers.end();
    }

    // Collects content words until `terminator` or `separator`; any other
    // marker in content position is an out-of-order error.
    std::string content_until(std::string_view terminator, std::string_view separator,
                              bool& hit_separator) {
        std::vector<std::string> words;
        hit_separator = false;
        while (!done()) {
            const std::string& word = peek();
            if (word == terminator) {
                break;
            }
            if (!separator.empty() && word == separator) {
                hit_separator = true;
                break;
            }
            if (is_marker(word)) {
                throw DataError("malformed structure at token " + std::to_string(pos_) +
                                ": expected " + std::string(terminator) + ", found " + word);
            }
            words.push_back(next());
        }
        if (done()) {
            throw DataError("malformed structure: missing " + std::string(terminator) +
                            " at end of input");
        }
        if (words.empty()) {
            throw DataError("malformed structure at token " + std::to_string(pos_) +
                            ": empty content before " + peek());
        }
        return join(words, " ");
    }

private:
    std::vector<std::string> words_;
    std::size_t pos_ = 0;
};

} // namespace

CleanRecipe parse(std::string_view text) {
    MarkerStream stream(text);
    CleanRecipe recipe;
    bool hit_separator = false;

    stream.expect(kRecipeStart);
    stream.expect(kTitleStart);
    recipe.title = stream.content_until(kTitleEnd, "", hit_separator);
    stream.expect(kTitleEnd);

    stream.expect(kIngrStart);
    do {
        recipe.ingredients.push_back(stream.content_until(kIngrEnd, kNextIngr, hit_separator));
        if (hit_separator) stream.expect(kNextIngr);
    } while (hit_separator);
    stream.expect(kIngrEnd);

    stream.expect(kInstrStart);
    do {
        recipe.instructions.push_back(stream.content_until(kInstrEnd, kNextInstr, hit_separator));
        if (hit_separator) stream.expect(kNextInstr);
    } while (hit_separator);
    stream.expect(kInstrEnd);

    stream.expect(kRecipeEnd);
    if (!stream.done()) {
        throw DataError("malformed structure at token " + std::to_string(stream.position()) +
                        ": trailing content after " + std::string(kRecipeEnd));
    }
    return recipe;
}

DatasetSplit split(std::vector<CleanRecipe> recipes, std::uint64_t seed) {
    if (recipes.size() < 10) {
        throw DataError("too few recipes to split: " + std::to_string(recipes.size()) +
                        " (need at least 10)");
    }

    // Fisher-Yates with explicit draws; std::shuffle is not pinned down by
    // the standard and would break cross-platform determinism.
    std::mt19937_64 rng(seed);
    for (std::size_t i = recipes.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(recipes[i], recipes[j]);
    }

    const std::size_t n = recipes.size();
    const std::size_t n_train = n * 8 / 10;
    const std::size_t n_valid = n / 10;

    DatasetSplit out;
    out.seed = seed;
    out.train.assign(recipes.begin(), recipes.begin() + n_train);
    out.validation.assign(recipes.begin() + n_train, recipes.begin() + n_train + n_valid);
    out.test.assign(recipes.begin() + n_train + n_valid, recipes.end());
    return out;
}

namespace {

CorpusStats stats_impl(const DatasetSplit& split,
                       const std::function<std::size_t(const CleanRecipe&)>& token_count,
                       std::size_t vocab_size_estimate, std::string token_unit) {
    CorpusStats out;
    out.split_sizes = {split.train.size(), split.validation.size(), split.test.size()};
    out.total_recipes = out.split_sizes[0] + out.split_sizes[1] + out.split_sizes[2];
    out.vocab_size_estimate = vocab_size_estimate;
    out.token_unit = std::move(token_unit);

    std::size_t total_tokens = 0;
    for (const auto* part : {&split.train, &split.validation, &split.test}) {
        for (const auto& recipe : *part) total_tokens += token_count(recipe);
    }
    if (out.total_recipes > 0) {
        out.avg_tokens_per_recipe =
            static_cast<double>(total_tokens) / static_cast<double>(out.total_recipes);
    }
    return out;
}

} // namespace

CorpusStats stats(const DatasetSplit& split, const tokenizer::Model& model) {
    return stats_impl(
        split,
        [&model](const CleanRecipe& r) { return model.encode(serialize(r)).ids.size(); },
        model.vocab_size(), "bpe");
}

CorpusStats word_stats(const DatasetSplit& split) {
    std::unordered_set<std::string> vocab;
    for (const auto* part : {&split.train, &split.validation, &split.test}) {
        for (const auto& recipe : *part) {
            for (auto& word : split_words(serialize(recipe))) vocab.insert(std::move(word));
        }
    }
    return stats_impl(split, [](const CleanRecipe& r) { return serialized_token_count(r); },
                      vocab.size(), "whitespace");
}

std::string render_stats_table(const CorpusStats& stats) {
    std::ostringstream out;
    auto row = [&out](std::string_view feature, const std::string& value) {
        out << feature;
        for (std::size_t i = feature.size(); i < 34; ++i) out << ' ';
        out << value << '\n';
    };
    std::ostringstream avg;
    avg.precision(1);
    avg << std::fixed << stats.avg_tokens_per_recipe;

    out << "Feature                           Value\n";
    row("Total Recipes Processed", std::to_string(stats.total_recipes));
    row("Train Set Size (80%)", std::to_string(stats.split_sizes[0]));
    row("Validation Set Size (10%)", std::to_string(stats.split_sizes[1]));
    row("Test Set Size (10%)", std::to_string(stats.split_sizes[2]));
    row("Avg. Tokens per Recipe", avg.str() + " (" + stats.token_unit + ")");
    row("Vocabulary Size (Base + Special)", std::to_string(stats.vocab_size_estimate));
    return out.str();
}

void IngestionReport::count(const CleanResult& result) {
    ++total;
    if (result.accepted()) {
        ++accepted;
        return;
    }
    switch (*result.reason) {
        case RejectReason::kMissingField: ++rejected_missing_field; break;
        case RejectReason::kTooShort: ++rejected_too_short; break;
        case RejectReason::kTooLong: ++rejected_too_long; break;
        case RejectReason::kReservedMarker: ++rejected_reserved_marker; break;
    }
}

std::vector<RawRecipe> read_recipes_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open recipe file: " + path.string());

    std::vector<RawRecipe> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": not a JSON record");
        }
        try {
            RawRecipe raw;
            raw.title = record.value("title", std::string());
            for (const auto& item : record.value("ingredients", nlohmann::json::array())) {
                raw.ingredients.push_back(item.get<std::string>());
            }
            for (const auto& item : record.value("instructions", nlohmann::json::array())) {
                raw.instructions.push_back(item.get<std::string>());
            }
            if (record.contains("cuisine") && !record["cuisine"].is_null()) {
                raw.cuisine = record["cuisine"].get<std::string>();
            }
            raw.source_id = record.value("source_id", std::string());
            if (raw.source_id.empty()) {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": missing source_id");
            }
            if (!seen_ids.insert(raw.source_id).second) {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": duplicate source_id " + raw.source_id);
            }
            out.push_back(std::move(raw));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_ingestion_report(const std::filesystem::path& path, const IngestionReport& report) {
    nlohmann::json j{
        {"total", report.total},
        {"accepted", report.accepted},
        {"rejected",
         {{"missing_field", report.rejected_missing_field},
          {"too_short", report.rejected_too_short},
          {"too_long", report.rejected_too_long},
          {"reserved_marker", report.rejected_reserved_marker}}},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot write ingestion report: " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace recipebench::corpus
