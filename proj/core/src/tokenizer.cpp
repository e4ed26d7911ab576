#include "recipebench/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "recipebench/corpus.hpp"

namespace recipebench::tokenizer {

namespace {

bool is_space_byte(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_digit_byte(char c) {
    return c >= '0' && c <= '9';
}

std::uint64_t pair_key(TokenId left, TokenId right) {
    return (static_cast<std::uint64_t>(left) << 32) | right;
}

void validate_sealed_string(const std::string& token, const char* kind) {
    if (token.empty()) {
        throw DataError(std::string(kind) + " token must be non-empty");
    }
    for (char c : token) {
        if (is_space_byte(c)) {
            throw DataError(std::string(kind) + " token contains whitespace: " + token);
        }
    }
}

} // namespace

const std::vector<std::string>& default_fraction_tokens() {
    // Reduced proper fractions over the kitchen-measure denominators.
    static const std::vector<std::string> fractions = {
        "1/2",
        "1/3", "2/3",
        "1/4", "3/4",
        "1/5", "2/5", "3/5", "4/5",
        "1/6", "5/6",
        "1/8", "3/8", "5/8", "7/8",
        "1/16", "3/16", "5/16", "7/16", "9/16", "11/16", "13/16", "15/16",
    };
    return fractions;
}

TrainConfig TrainConfig::defaults(std::size_t target_vocab) {
    TrainConfig config;
    config.target_vocab = target_vocab;
    return config;
}

TokenId Model::pad_id() const {
    if (pad_token_.empty()) throw DataError("tokenizer has no padding token");
    auto id = token_to_id(pad_token_);
    if (!id) throw DataError("padding token missing from vocabulary: " + pad_token_);
    return *id;
}

std::optional<TokenId> Model::token_to_id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) return std::nullopt;
    return it->second;
}

const std::string& Model::id_to_token(TokenId id) const {
    if (id >= id_to_token_.size()) {
        throw DataError("unknown token id " + std::to_string(id) + " (vocabulary size " +
                        std::to_string(id_to_token_.size()) + ")");
    }
    return id_to_token_[id];
}

TokenId Model::register_token(const std::string& token) {
    auto [it, inserted] = token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
    if (!inserted) {
        throw DataError("duplicate token: " + escape_token(token));
    }
    id_to_token_.push_back(token);
    return it->second;
}

void Model::finalize() {
    sealed_by_length_.clear();
    for (const auto& s : specials_) sealed_by_length_.emplace_back(s, false);
    for (const auto& f : fractions_) sealed_by_length_.emplace_back(f, true);
    std::sort(sealed_by_length_.begin(), sealed_by_length_.end(),
              [](const auto& a, const auto& b) {
                  if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
                  return a.first < b.first;
              });

    merge_lookup_.clear();
    for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
        const auto& [left, right] = merges_[rank];
        auto l = token_to_id(left);
        auto r = token_to_id(right);
        auto merged = token_to_id(merges_[rank].first + merges_[rank].second);
        if (!l || !r || !merged) {
            throw DataError("merge rule references unknown token: " + escape_token(left) + " + " +
                            escape_token(right));
        }
        // first (lowest) rank wins when the same pair appears twice
        merge_lookup_.emplace(pair_key(*l, *r), std::make_pair(rank, *merged));
    }

    byte_ids_.fill(-1);
    for (int b = 0; b < 256; ++b) {
        auto id = token_to_id(std::string(1, static_cast<char>(b)));
        if (id) byte_ids_[static_cast<std::size_t>(b)] = static_cast<std::int64_t>(*id);
    }
}

std::vector<Segment> Model::pretokenize(std::string_view text) const {
    std::vector<Segment> segments;

    auto match_sealed_at = [&](std::string_view chunk, std::size_t pos) -> const std::string* {
        for (const auto& [token, is_fraction] : sealed_by_length_) {
            if (token.size() > chunk.size() - pos) continue;
            if (chunk.compare(pos, token.size(), token) != 0) continue;
            if (is_fraction) {
                // A fraction embedded in a longer digit run is not a quantity.
                if (pos > 0 && is_digit_byte(chunk[pos - 1])) continue;
                std::size_t end = pos + token.size();
                if (end < chunk.size() && is_digit_byte(chunk[end])) continue;
            }
            return &token;
        }
        return nullptr;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t begin = i;
        if (is_space_byte(text[i])) {
            while (i < text.size() && is_space_byte(text[i])) ++i;
            segments.push_back({std::string(text.substr(begin, i - begin)), false});
            continue;
        }
        while (i < text.size() && !is_space_byte(text[i])) ++i;
        std::string_view chunk = text.substr(begin, i - begin);

        std::size_t pending = 0;
        std::size_t j = 0;
        while (j < chunk.size()) {
            const std::string* sealed = match_sealed_at(chunk, j);
            if (sealed == nullptr) {
                ++j;
                continue;
            }
            if (j > pending) segments.push_back({std::string(chunk.substr(pending, j - pending)), false});
            segments.push_back({*sealed, true});
            j += sealed->size();
            pending = j;
        }
        if (pending < chunk.size()) {
            segments.push_back({std::string(chunk.substr(pending)), false});
        }
    }
    return segments;
}

std::vector<TokenId> Model::bpe_segment(std::string_view segment) const {
    std::vector<TokenId> symbols;
    symbols.reserve(segment.size());
    for (char c : segment) {
        std::int64_t id = byte_ids_[static_cast<unsigned char>(c)];
        if (id < 0) {
            throw DataError("byte " + std::to_string(static_cast<unsigned char>(c)) +
                            " is not encodable by this vocabulary");
        }
        symbols.push_back(static_cast<TokenId>(id));
    }

    while (symbols.size() >= 2) {
        std::size_t best_rank = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = merge_lookup_.find(pair_key(symbols[i], symbols[i + 1]));
            if (it != merge_lookup_.end() && it->second.first < best_rank) {
                best_rank = it->second.first;
            }
        }
        if (best_rank == std::numeric_limits<std::size_t>::max()) break;

        const auto& [left, right] = merges_[best_rank];
        TokenId left_id = *token_to_id(left);
        TokenId right_id = *token_to_id(right);
        TokenId merged_id = merge_lookup_.at(pair_key(left_id, right_id)).second;

        std::vector<TokenId> next;
        next.reserve(symbols.size());
        std::size_t i = 0;
        while (i < symbols.size()) {
            if (i + 1 < symbols.size() && symbols[i] == left_id && symbols[i + 1] == right_id) {
                next.push_back(merged_id);
                i += 2;
            } else {
                next.push_back(symbols[i]);
                ++i;
            }
        }
        symbols = std::move(next);
    }
    return symbols;
}

Model::Encoding Model::encode(std::string_view text) const {
    Encoding enc;
    std::size_t pos = 0;
    for (const Segment& segment : pretokenize(text)) {
        if (segment.sealed) {
            auto id = token_to_id(segment.text);
            if (!id) throw DataError("sealed token missing from vocabulary: " + segment.text);
            enc.ids.push_back(*id);
            enc.offsets.emplace_back(pos, pos + segment.text.size());
            pos += segment.text.size();
            continue;
        }
        for (TokenId id : bpe_segment(segment.text)) {
            std::size_t len = id_to_token_[id].size();
            enc.ids.push_back(id);
            enc.offsets.emplace_back(pos, pos + len);
            pos += len;
        }
    }
    return enc;
}

std::string Model::decode(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) out += id_to_token(id);
    return out;
}

Model train_bpe(const std::vector<std::string>& corpus_lines, const TrainConfig& config) {
    std::vector<std::string> specials = config.special_tokens;
    std::vector<std::string> fractions = config.fraction_tokens;
    std::string pad = config.pad_token;
    if (!pad.empty() &&
        std::find(specials.begin(), specials.end(), pad) == specials.end()) {
        specials.push_back(pad);
    }

    const std::size_t floor_vocab = 256 + specials.size() + fractions.size();
    if (config.target_vocab < floor_vocab) {
        throw std::invalid_argument("target vocabulary " + std::to_string(config.target_vocab) +
                                    " is below the " + std::to_string(floor_vocab) +
                                    " bytes + special + fraction tokens");
    }

    Model model;
    for (int b = 0; b < 256; ++b) model.register_token(std::string(1, static_cast<char>(b)));
    for (const auto& s : specials) {
        validate_sealed_string(s, "special");
        model.register_token(s);
    }
    for (const auto& f : fractions) {
        validate_sealed_string(f, "fraction");
        model.register_token(f);
    }
    model.specials_ = specials;
    model.fractions_ = fractions;
    model.pad_token_ = pad;
    model.finalize();

    // Unsealed-segment histogram; sealed segments never contribute pairs.
    std::unordered_map<std::string, std::uint64_t> histogram;
    bool any_content = false;
    for (const auto& line : corpus_lines) {
        for (const Segment& segment : model.pretokenize(line)) {
            any_content = true;
            if (!segment.sealed) ++histogram[segment.text];
        }
    }
    if (!any_content) throw DataError("training corpus is empty");

    struct Word {
        std::vector<TokenId> symbols;
        std::uint64_t count;
    };
    std::vector<Word> words;
    words.reserve(histogram.size());
    for (const auto& [text, count] : histogram) {
        words.push_back({model.bpe_segment(text), count});
    }

    while (model.vocab_size() < config.target_vocab) {
        std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
        for (const Word& word : words) {
            for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
                pair_counts[pair_key(word.symbols[i], word.symbols[i + 1])] += word.count;
            }
        }

        bool found = false;
        std::uint64_t best_count = 0;
        TokenId best_left = 0;
        TokenId best_right = 0;
        for (const auto& [key, count] : pair_counts) {
            TokenId left = static_cast<TokenId>(key >> 32);
            TokenId right = static_cast<TokenId>(key & 0xffffffffu);
            // Merging into an existing token (a sealed string in particular)
            // would collide in the vocabulary; such pairs are never learned.
            if (model.token_to_id(model.id_to_token_[left] + model.id_to_token_[right])) continue;
            if (found) {
                if (count < best_count) continue;
                if (count == best_count) {
                    const std::string& l = model.id_to_token_[left];
                    const std::string& r = model.id_to_token_[right];
                    const std::string& bl = model.id_to_token_[best_left];
                    const std::string& br = model.id_to_token_[best_right];
                    if (std::tie(l, r) >= std::tie(bl, br)) continue;
                }
            }
            found = true;
            best_count = count;
            best_left = left;
            best_right = right;
        }
        if (!found) break;  // nothing left to merge

        const std::string left_text = model.id_to_token_[best_left];
        const std::string right_text = model.id_to_token_[best_right];
        TokenId merged_id = model.register_token(left_text + right_text);
        model.merges_.emplace_back(left_text, right_text);

        for (Word& word : words) {
            if (word.symbols.size() < 2) continue;
            std::vector<TokenId> next;
            next.reserve(word.symbols.size());
            std::size_t i = 0;
            while (i < word.symbols.size()) {
                if (i + 1 < word.symbols.size() && word.symbols[i] == best_left &&
                    word.symbols[i + 1] == best_right) {
                    next.push_back(merged_id);
                    i += 2;
                } else {
                    next.push_back(word.symbols[i]);
                    ++i;
                }
            }
            word.symbols = std::move(next);
        }
    }

    model.finalize();
    return model;
}

Model augment(const Model& base, const std::vector<std::string>& markers,
              const std::vector<std::string>& fractions) {
    Model model = base;

    std::unordered_set<std::string> fresh;
    auto add = [&](const std::string& token, const char* kind) {
        validate_sealed_string(token, kind);
        if (!fresh.insert(token).second) {
            throw DataError("duplicate token: " + token);
        }
        if (model.token_to_id(token)) {
            throw DataError("duplicate token: " + token + " already in vocabulary");
        }
        model.register_token(token);
    };

    for (const auto& m : markers) {
        add(m, "special");
        model.specials_.push_back(m);
    }
    for (const auto& f : fractions) {
        add(f, "fraction");
        model.fractions_.push_back(f);
    }

    if (model.pad_token_.empty()) {
        auto it = std::find(model.specials_.begin(), model.specials_.end(),
                            std::string(corpus::kPadToken));
        if (it != model.specials_.end()) model.pad_token_ = *it;
    }

    model.finalize();
    return model;
}

std::string escape_token(std::string_view token) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        unsigned char b = static_cast<unsigned char>(c);
        if (c == '\\') {
            out += "\\\\";
        } else if (b <= 0x20 || b == 0x7f) {
            out += "\\x";
            out += hex[b >> 4];
            out += hex[b & 0xf];
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape_token(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    auto hex_value = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    while (i < text.size()) {
        if (text[i] != '\\') {
            out += text[i++];
            continue;
        }
        if (i + 1 < text.size() && text[i + 1] == '\\') {
            out += '\\';
            i += 2;
            continue;
        }
        if (i + 3 < text.size() && text[i + 1] == 'x') {
            int hi = hex_value(text[i + 2]);
            int lo = hex_value(text[i + 3]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>((hi << 4) | lo);
                i += 4;
                continue;
            }
        }
        throw DataError("bad escape sequence in token: " + std::string(text));
    }
    return out;
}

void Model::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);

    std::ofstream vocab(dir / "vocab.txt", std::ios::binary);
    if (!vocab) throw DataError("cannot write " + (dir / "vocab.txt").string());
    for (std::size_t id = 0; id < id_to_token_.size(); ++id) {
        vocab << escape_token(id_to_token_[id]) << '\t' << id << '\n';
    }

    std::ofstream merges(dir / "merges.txt", std::ios::binary);
    if (!merges) throw DataError("cannot write " + (dir / "merges.txt").string());
    for (const auto& [left, right] : merges_) {
        merges << escape_token(left) << ' ' << escape_token(right) << '\n';
    }

    nlohmann::json manifest{
        {"format", "recipebench-tokenizer"},
        {"version", 1},
        {"pad_token", pad_token_},
        {"special_tokens", specials_},
        {"fraction_tokens", fractions_},
    };
    std::ofstream out(dir / "tokenizer.json", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "tokenizer.json").string());
    out << manifest.dump(2) << '\n';
}

namespace {

void load_vocab_file(const std::filesystem::path& path, std::vector<std::string>& id_to_token,
                     std::unordered_map<std::string, TokenId>& token_to_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocab file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected token<TAB>id");
        }
        std::string token = unescape_token(std::string_view(line).substr(0, tab));
        std::uint64_t id = 0;
        try {
            id = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad token id");
        }
        entries.emplace_back(std::move(token), id);
    }
    id_to_token.assign(entries.size(), std::string());
    std::vector<bool> filled(entries.size(), false);
    for (auto& [token, id] : entries) {
        if (id >= entries.size() || filled[id]) {
            throw DataError(path.string() + ": token ids are not dense 0.." +
                            std::to_string(entries.size() - 1));
        }
        filled[id] = true;
        id_to_token[id] = std::move(token);
    }
    for (std::size_t id = 0; id < id_to_token.size(); ++id) {
        if (!token_to_id.emplace(id_to_token[id], static_cast<TokenId>(id)).second) {
            throw DataError(path.string() + ": duplicate token string at id " + std::to_string(id));
        }
    }
}

void load_merges_file(const std::filesystem::path& path,
                      std::vector<std::pair<std::string, std::string>>& merges) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open merges file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto space = line.find(' ');
        if (space == std::string::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected `left right`");
        }
        merges.emplace_back(unescape_token(std::string_view(line).substr(0, space)),
                            unescape_token(std::string_view(line).substr(space + 1)));
    }
}

} // namespace

Model load(const std::filesystem::path& dir) {
    Model model;
    load_vocab_file(dir / "vocab.txt", model.id_to_token_, model.token_to_id_);
    load_merges_file(dir / "merges.txt", model.merges_);

    std::ifstream in(dir / "tokenizer.json");
    if (!in) throw DataError("cannot open tokenizer manifest: " + (dir / "tokenizer.json").string());
    nlohmann::json manifest = nlohmann::json::parse(in, nullptr, false);
    if (manifest.is_discarded() || manifest.value("format", "") != "recipebench-tokenizer") {
        throw DataError("not a tokenizer manifest: " + (dir / "tokenizer.json").string());
    }
    model.pad_token_ = manifest.value("pad_token", "");
    for (const auto& s : manifest.value("special_tokens", nlohmann::json::array())) {
        model.specials_.push_back(s.get<std::string>());
    }
    for (const auto& f : manifest.value("fraction_tokens", nlohmann::json::array())) {
        model.fractions_.push_back(f.get<std::string>());
    }
    for (const auto& s : model.specials_) {
        if (!model.token_to_id(s)) throw DataError("special token missing from vocab: " + s);
    }
    for (const auto& f : model.fractions_) {
        if (!model.token_to_id(f)) throw DataError("fraction token missing from vocab: " + f);
    }
    model.finalize();
    return model;
}

Model import_base(const std::filesystem::path& vocab_path, const std::filesystem::path& merges_path) {
    Model model;
    load_vocab_file(vocab_path, model.id_to_token_, model.token_to_id_);
    load_merges_file(merges_path, model.merges_);
    model.finalize();
    return model;
}

} // namespace recipebench::tokenizer
