#include "recipebench/stemmer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace recipebench::metrics {

namespace {

// Working buffer for the Porter (1980) rules. b_ holds the current stem,
// lowercase a-z only.
class PorterBuffer {
public:
    explicit PorterBuffer(std::string word) : b_(std::move(word)) {}

    const std::string& str() const { return b_; }

    bool is_consonant(std::size_t i) const {
        char c = b_[i];
        if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
        if (c == 'y') return i == 0 ? true : !is_consonant(i - 1);
        return true;
    }

    // m in [C](VC)^m[V], measured over b_[0..end)
    std::size_t measure(std::size_t end) const {
        std::size_t m = 0;
        std::size_t i = 0;
        while (i < end && is_consonant(i)) ++i;
        while (i < end) {
            while (i < end && !is_consonant(i)) ++i;
            if (i >= end) break;
            ++m;
            while (i < end && is_consonant(i)) ++i;
        }
        return m;
    }

    bool has_vowel(std::size_t end) const {
        for (std::size_t i = 0; i < end; ++i) {
            if (!is_consonant(i)) return true;
        }
        return false;
    }

    bool double_consonant() const {
        std::size_t n = b_.size();
        if (n < 2 || b_[n - 1] != b_[n - 2]) return false;
        return is_consonant(n - 1);
    }

    // consonant-vowel-consonant ending where the final consonant is not
    // w, x or y; used to detect stems like "hop" that need a restored e.
    bool ends_cvc() const {
        std::size_t n = b_.size();
        if (n < 3) return false;
        if (!is_consonant(n - 3) || is_consonant(n - 2) || !is_consonant(n - 1)) return false;
        char c = b_[n - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends_with(std::string_view suffix) const {
        return b_.size() >= suffix.size() &&
               b_.compare(b_.size() - suffix.size(), suffix.size(), suffix) == 0;
    }

    std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

    void replace_suffix(std::string_view suffix, std::string_view replacement) {
        b_.resize(b_.size() - suffix.size());
        b_ += replacement;
    }

    void chop() { b_.pop_back(); }
    void append(char c) { b_ += c; }

private:
    std::string b_;
};

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// Applies the longest matching suffix whose stem measure exceeds
// min_measure. Returns true when a suffix matched (even if the measure
// condition failed, per the longest-match-then-test rule).
bool apply_rules(PorterBuffer& w, std::initializer_list<Rule> rules, std::size_t min_measure) {
    const Rule* best = nullptr;
    for (const Rule& rule : rules) {
        if (w.ends_with(rule.suffix) &&
            (best == nullptr || rule.suffix.size() > best->suffix.size())) {
            best = &rule;
        }
    }
    if (best == nullptr) return false;
    if (w.measure(w.stem_len(best->suffix)) > min_measure) {
        w.replace_suffix(best->suffix, best->replacement);
    }
    return true;
}

void step_1a(PorterBuffer& w) {
    if (w.ends_with("sses")) {
        w.replace_suffix("sses", "ss");
    } else if (w.ends_with("ies")) {
        w.replace_suffix("ies", "i");
    } else if (w.ends_with("ss")) {
        // keep
    } else if (w.ends_with("s")) {
        w.chop();
    }
}

void step_1b(PorterBuffer& w) {
    if (w.ends_with("eed")) {
        if (w.measure(w.stem_len("eed")) > 0) w.replace_suffix("eed", "ee");
        return;
    }
    bool stripped = false;
    if (w.ends_with("ed") && w.has_vowel(w.stem_len("ed"))) {
        w.replace_suffix("ed", "");
        stripped = true;
    } else if (w.ends_with("ing") && w.has_vowel(w.stem_len("ing"))) {
        w.replace_suffix("ing", "");
        stripped = true;
    }
    if (!stripped) return;

    if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
        w.append('e');
    } else if (w.double_consonant() && !(w.ends_with("l") || w.ends_with("s") || w.ends_with("z"))) {
        w.chop();
    } else if (w.measure(w.str().size()) == 1 && w.ends_cvc()) {
        w.append('e');
    }
}

void step_1c(PorterBuffer& w) {
    if (w.ends_with("y") && w.has_vowel(w.stem_len("y"))) {
        w.replace_suffix("y", "i");
    }
}

void step_2(PorterBuffer& w) {
    apply_rules(w,
                {{"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
                 {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
                 {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
                 {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
                 {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"}},
                0);
}

void step_3(PorterBuffer& w) {
    apply_rules(w,
                {{"icate", "ic"},
                 {"ative", ""},
                 {"alize", "al"},
                 {"iciti", "ic"},
                 {"ical", "ic"},
                 {"ful", ""},
                 {"ness", ""}},
                0);
}

void step_4(PorterBuffer& w) {
    static constexpr std::array<std::string_view, 18> suffixes = {
        "al",   "ance", "ence", "er", "ic",  "able", "ible", "ant", "ement",
        "ment", "ent",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
    std::string_view best;
    for (std::string_view suffix : suffixes) {
        if (w.ends_with(suffix) && suffix.size() > best.size()) best = suffix;
    }
    // `ion` competes too, but only after s or t
    if (w.ends_with("ion") && best.size() < 3) {
        std::size_t stem = w.stem_len("ion");
        if (stem > 0 && (w.str()[stem - 1] == 's' || w.str()[stem - 1] == 't')) best = "ion";
    }
    if (!best.empty() && w.measure(w.stem_len(best)) > 1) {
        w.replace_suffix(best, "");
    }
}

void step_5a(PorterBuffer& w) {
    if (!w.ends_with("e")) return;
    std::size_t m = w.measure(w.stem_len("e"));
    if (m > 1) {
        w.chop();
    } else if (m == 1) {
        // *o is tested on the stem without the final e
        PorterBuffer stem(std::string(w.str().substr(0, w.str().size() - 1)));
        if (!stem.ends_cvc()) w.chop();
    }
}

void step_5b(PorterBuffer& w) {
    if (w.double_consonant() && w.ends_with("l") && w.measure(w.str().size()) > 1) {
        w.chop();
    }
}

} // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    for (char c : word) {
        if (c < 'a' || c > 'z') return std::string(word);
    }

    PorterBuffer w{std::string(word)};
    step_1a(w);
    step_1b(w);
    step_1c(w);
    step_2(w);
    step_3(w);
    step_4(w);
    step_5a(w);
    step_5b(w);
    return w.str();
}

} // namespace recipebench::metrics
