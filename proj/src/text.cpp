#include "seqtag/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "seqtag/error.hpp"

namespace seqtag {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), is_space);
}

std::vector<std::string> split_whitespace(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    return in;
}

}  // namespace

std::string normalize_digits(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    bool in_run = false;
    for (char c : token) {
        if (is_digit(c)) {
            if (!in_run) out.push_back('#');
            in_run = true;
        } else {
            out.push_back(c);
            in_run = false;
        }
    }
    return out;
}

std::string lowercase(std::string_view token) {
    std::string out(token);
    for (char& c : out) {
        if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string normalize_word(std::string_view token) { return lowercase(normalize_digits(token)); }

std::array<std::uint8_t, 3> case_feature(std::string_view token) {
    std::array<std::uint8_t, 3> bits{0, 0, 0};
    std::size_t letters = 0, uppers = 0;
    for (char c : token) {
        if (is_upper(c)) {
            ++letters;
            ++uppers;
        } else if (is_lower(c)) {
            ++letters;
        }
    }
    if (letters == 0) return bits;
    if (uppers == 0) {
        bits[case_lower] = 1;
    } else if (uppers == letters) {
        bits[case_upper] = 1;
    } else if (is_upper(token.front()) && uppers == 1) {
        bits[case_leading_cap] = 1;
    }
    return bits;
}

std::string suffix2(std::string_view token) {
    // walk back over UTF-8 continuation bytes
    std::size_t pos = token.size();
    for (int points = 0; points < 2 && pos > 0; ++points) {
        --pos;
        while (pos > 0 && (static_cast<unsigned char>(token[pos]) & 0xC0) == 0x80) --pos;
    }
    return std::string(token.substr(pos));
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words) {
    words_.reserve(words.size() + 1);
    words_.emplace_back(unk_word);
    index_.emplace(std::string(unk_word), 0);
    for (auto& w : words) {
        if (w.empty()) throw Error(ErrorCode::invalid_argument, "vocabulary word is empty");
        if (!index_.emplace(w, words_.size()).second)
            throw Error(ErrorCode::invalid_argument, "duplicate vocabulary word '" + w + "'");
        words_.push_back(std::move(w));
    }
}

std::size_t Vocabulary::lookup(std::string_view normalized) const {
    auto it = index_.find(std::string(normalized));
    return it == index_.end() ? unk_id() : it->second;
}

bool Vocabulary::contains(std::string_view normalized) const {
    return index_.count(std::string(normalized)) != 0;
}

void Vocabulary::save(std::ostream& out) const {
    for (const auto& w : words_) out << w << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> words;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (lineno == 1) {
            if (line != unk_word)
                throw Error(ErrorCode::format, "vocabulary line 1: expected " + std::string(unk_word));
            continue;
        }
        if (line.empty() || std::any_of(line.begin(), line.end(), is_space))
            throw Error(ErrorCode::format, "vocabulary line " + std::to_string(lineno) + ": malformed word");
        words.push_back(line);
    }
    if (lineno == 0) throw Error(ErrorCode::format, "vocabulary file is empty");
    try {
        return Vocabulary(std::move(words));
    } catch (const Error& e) {
        throw Error(ErrorCode::format, e.what());
    }
}

void Vocabulary::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    save(out);
}

Vocabulary Vocabulary::load_file(const std::string& path) {
    auto in = open_input(path);
    return load(in);
}

void WordCounts::add(std::string_view raw_token) { ++counts_[normalize_word(raw_token)]; }

void WordCounts::add_sentence(std::span<const std::string> tokens) {
    for (const auto& t : tokens) add(t);
}

std::size_t WordCounts::count(const std::string& normalized) const {
    auto it = counts_.find(normalized);
    return it == counts_.end() ? 0 : it->second;
}

Vocabulary build_vocab(const WordCounts& counts, std::size_t max_common,
                       std::span<const std::string> must_include) {
    using Entry = std::pair<std::size_t, std::string>;
    std::vector<Entry> ranked;
    ranked.reserve(counts.counts().size());
    for (const auto& [word, n] : counts.counts()) {
        if (word != unk_word) ranked.emplace_back(n, word);
    }
    auto by_rank = [](const Entry& a, const Entry& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::sort(ranked.begin(), ranked.end(), by_rank);

    std::set<std::string> chosen;
    for (std::size_t i = 0; i < ranked.size() && i < max_common; ++i) chosen.insert(ranked[i].second);
    for (const auto& w : must_include) {
        std::string n = normalize_word(w);
        if (!n.empty() && n != unk_word) chosen.insert(std::move(n));
    }
    if (chosen.empty()) throw Error(ErrorCode::empty_input, "empty vocabulary");

    std::vector<Entry> selected;
    selected.reserve(chosen.size());
    for (const auto& w : chosen) selected.emplace_back(counts.count(w), w);
    std::sort(selected.begin(), selected.end(), by_rank);

    std::vector<std::string> words;
    words.reserve(selected.size());
    for (auto& e : selected) words.push_back(std::move(e.second));
    return Vocabulary(std::move(words));
}

// ---------------------------------------------------------------------------

TagSet::TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
    for (std::size_t i = 0; i < tags_.size(); ++i) {
        if (!index_.emplace(tags_[i], i).second)
            throw Error(ErrorCode::invalid_argument, "duplicate tag '" + tags_[i] + "'");
    }
}

TagSet TagSet::from_corpus(std::span<const TaggedSentence> corpus) {
    std::set<std::string> seen;
    for (const auto& s : corpus) seen.insert(s.tags.begin(), s.tags.end());
    return TagSet(std::vector<std::string>(seen.begin(), seen.end()));
}

std::optional<std::size_t> TagSet::find(std::string_view tag) const {
    auto it = index_.find(std::string(tag));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t TagSet::id(std::string_view tag) const {
    auto found = find(tag);
    if (!found) throw Error(ErrorCode::unknown_tag, "tag '" + std::string(tag) + "' is not in the training tag set");
    return *found;
}

// ---------------------------------------------------------------------------

std::size_t ExtraFeatureSpec::dimension() const noexcept {
    return (use_case_feature ? 3 : 0) + (use_suffix ? suffix_alphabet.size() + 1 : 0);
}

std::optional<std::size_t> ExtraFeatureSpec::suffix_slot(std::string_view suffix) const {
    auto it = std::lower_bound(suffix_alphabet.begin(), suffix_alphabet.end(), suffix);
    if (it == suffix_alphabet.end() || *it != suffix) return std::nullopt;
    return suffix_offset() + static_cast<std::size_t>(it - suffix_alphabet.begin());
}

ExtraFeatureSpec build_suffix_alphabet(std::span<const std::string> tokens, bool use_case_feature) {
    ExtraFeatureSpec spec;
    spec.use_case_feature = use_case_feature;
    std::set<std::string> suffixes;
    for (const auto& t : tokens) suffixes.insert(suffix2(normalize_word(t)));
    spec.suffix_alphabet.assign(suffixes.begin(), suffixes.end());
    spec.use_suffix = !spec.suffix_alphabet.empty();
    return spec;
}

void SparseFeature::set(std::size_t slot) {
    slots[count++] = static_cast<std::uint32_t>(slot);
}

SparseFeature extra_features(std::string_view raw_token, const ExtraFeatureSpec& spec) {
    SparseFeature f;
    if (spec.use_case_feature) {
        auto bits = case_feature(raw_token);
        for (std::size_t b = 0; b < 3; ++b) {
            if (bits[b]) f.set(b);
        }
    }
    if (spec.use_suffix) {
        auto slot = spec.suffix_slot(suffix2(normalize_word(raw_token)));
        f.set(slot ? *slot : spec.unknown_suffix_slot());
    }
    return f;
}

EncodedSentence encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                       const ExtraFeatureSpec& spec) {
    EncodedSentence out;
    out.feature_dim = spec.dimension();
    out.word_ids.reserve(tokens.size());
    out.features.reserve(tokens.size());
    for (const auto& t : tokens) {
        out.word_ids.push_back(vocab.id_of_token(t));
        out.features.push_back(extra_features(t, spec));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<TaggedSentence> read_tagged_corpus(std::istream& in) {
    std::vector<TaggedSentence> corpus;
    TaggedSentence current;
    std::string line;
    std::size_t lineno = 0;
    auto flush = [&] {
        if (!current.tokens.empty()) corpus.push_back(std::move(current));
        current = {};
    };
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (is_blank(line)) {
            flush();
            continue;
        }
        if (current.tokens.empty() && line.front() == '#') continue;

        auto tab = line.find('\t');
        bool ok = tab != std::string::npos && line.find('\t', tab + 1) == std::string::npos;
        std::string_view token, tag;
        if (ok) {
            token = std::string_view(line).substr(0, tab);
            tag = std::string_view(line).substr(tab + 1);
            ok = !token.empty() && !tag.empty() &&
                 std::none_of(token.begin(), token.end(), is_space) &&
                 std::none_of(tag.begin(), tag.end(), is_space);
        }
        if (!ok)
            throw Error(ErrorCode::format, "line " + std::to_string(lineno) +
                                               ": expected exactly two tab-separated fields");
        current.tokens.emplace_back(token);
        current.tags.emplace_back(tag);
    }
    flush();
    return corpus;
}

std::vector<TaggedSentence> read_tagged_corpus(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_tagged_corpus(in);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::vector<Sentence> read_plain_corpus(std::istream& in) {
    std::vector<Sentence> corpus;
    std::string line;
    while (std::getline(in, line)) {
        auto tokens = split_whitespace(line);
        if (!tokens.empty()) corpus.push_back(std::move(tokens));
    }
    return corpus;
}

std::vector<Sentence> read_plain_corpus(const std::string& path) {
    auto in = open_input(path);
    return read_plain_corpus(in);
}

void write_tagged_corpus(std::ostream& out, std::span<const TaggedSentence> corpus) {
    for (const auto& s : corpus) {
        for (std::size_t i = 0; i < s.tokens.size(); ++i) out << s.tokens[i] << '\t' << s.tags[i] << '\n';
        out << '\n';
    }
}

}  // namespace seqtag
