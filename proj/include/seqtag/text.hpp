#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqtag {

using Sentence = std::vector<std::string>;

struct TaggedSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
};

// ---------------------------------------------------------------------------
// Token normalization and surface features

/// Replaces each maximal run of ASCII digits 0-9 with a single '#'.
std::string normalize_digits(std::string_view token);

/// ASCII lowercase; bytes outside A-Z are left alone (UTF-8 safe).
std::string lowercase(std::string_view token);

/// lowercase(normalize_digits(token)): the form stored in a Vocabulary.
std::string normalize_word(std::string_view token);

enum CaseBit : std::size_t { case_lower = 0, case_upper = 1, case_leading_cap = 2 };

/// (full lowercase, full uppercase, leading capital) over the ASCII letters of
/// the original surface form. A single capital letter counts as full
/// uppercase. Tokens without letters, or with mixed case that fits neither
/// class, give all zeros.
std::array<std::uint8_t, 3> case_feature(std::string_view token);

/// Last two UTF-8 code points; shorter tokens are returned whole.
std::string suffix2(std::string_view token);

// ---------------------------------------------------------------------------
// Vocabulary and tag set

inline constexpr std::string_view unk_word = "<UNK>";

/// Word <-> id map. Id 0 is always the UNK sentinel; lookups of absent words
/// return it. Immutable once built.
class Vocabulary {
public:
    /// `words` must not contain the UNK sentinel; it is prepended.
    explicit Vocabulary(std::vector<std::string> words);

    std::size_t size() const noexcept { return words_.size(); }
    std::size_t unk_id() const noexcept { return 0; }
    const std::string& word(std::size_t id) const { return words_.at(id); }
    const std::vector<std::string>& words() const noexcept { return words_; }

    /// Exact lookup of an already normalized word.
    std::size_t lookup(std::string_view normalized) const;
    bool contains(std::string_view normalized) const;

    /// Normalizes the raw surface form before lookup.
    std::size_t id_of_token(std::string_view raw) const { return lookup(normalize_word(raw)); }

    void save(std::ostream& out) const;
    static Vocabulary load(std::istream& in);
    void save_file(const std::string& path) const;
    static Vocabulary load_file(const std::string& path);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Frequency table over normalized words.
class WordCounts {
public:
    void add(std::string_view raw_token);
    void add_sentence(std::span<const std::string> tokens);
    std::size_t count(const std::string& normalized) const;
    const std::map<std::string, std::size_t>& counts() const noexcept { return counts_; }
    bool empty() const noexcept { return counts_.empty(); }

private:
    std::map<std::string, std::size_t> counts_;
};

/// must_include  U  top-`max_common` words of `counts` (ties broken
/// lexicographically), plus UNK. Words are ordered by (count desc, word asc).
/// Throws empty_input "empty vocabulary" when nothing would be stored.
Vocabulary build_vocab(const WordCounts& counts, std::size_t max_common,
                       std::span<const std::string> must_include = {});

class TagSet {
public:
    TagSet() = default;
    explicit TagSet(std::vector<std::string> tags);

    /// Sorted set of distinct tags in the corpus.
    static TagSet from_corpus(std::span<const TaggedSentence> corpus);

    std::size_t size() const noexcept { return tags_.size(); }
    const std::string& tag(std::size_t id) const { return tags_.at(id); }
    const std::vector<std::string>& tags() const noexcept { return tags_; }
    std::optional<std::size_t> find(std::string_view tag) const;
    /// Throws unknown_tag naming the tag.
    std::size_t id(std::string_view tag) const;

    friend bool operator==(const TagSet& a, const TagSet& b) { return a.tags_ == b.tags_; }

private:
    std::vector<std::string> tags_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Extra features f(w)

/// Layout of the extra feature vector: [case bits (3)] [suffix slots] [unknown suffix].
struct ExtraFeatureSpec {
    bool use_case_feature = true;
    bool use_suffix = false;
    std::vector<std::string> suffix_alphabet;

    std::size_t dimension() const noexcept;
    std::size_t suffix_offset() const noexcept { return use_case_feature ? 3 : 0; }
    std::size_t unknown_suffix_slot() const noexcept { return suffix_offset() + suffix_alphabet.size(); }
    std::optional<std::size_t> suffix_slot(std::string_view suffix) const;

    friend bool operator==(const ExtraFeatureSpec&, const ExtraFeatureSpec&) = default;
};

/// Sorted distinct suffix2 values of the normalized tokens. An empty corpus
/// yields a spec with suffixes disabled.
ExtraFeatureSpec build_suffix_alphabet(std::span<const std::string> tokens, bool use_case_feature = true);

/// Sparse binary vector with at most two active slots.
struct SparseFeature {
    std::array<std::uint32_t, 2> slots{};
    std::uint8_t count = 0;

    void set(std::size_t slot);
    std::span<const std::uint32_t> active() const { return {slots.data(), count}; }
};

struct EncodedSentence {
    std::vector<std::size_t> word_ids;
    std::vector<SparseFeature> features;
    std::size_t feature_dim = 0;

    std::size_t size() const noexcept { return word_ids.size(); }
};

SparseFeature extra_features(std::string_view raw_token, const ExtraFeatureSpec& spec);
EncodedSentence encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                       const ExtraFeatureSpec& spec);

// ---------------------------------------------------------------------------
// Corpus files

/// Two tab-separated columns per line, blank line between sentences, `#`
/// comment lines allowed before the first token of a block. Malformed lines
/// raise `format` with the 1-based line number.
std::vector<TaggedSentence> read_tagged_corpus(std::istream& in);
std::vector<TaggedSentence> read_tagged_corpus(const std::string& path);

/// One whitespace-separated sentence per line; blank lines are skipped.
std::vector<Sentence> read_plain_corpus(std::istream& in);
std::vector<Sentence> read_plain_corpus(const std::string& path);

void write_tagged_corpus(std::ostream& out, std::span<const TaggedSentence> corpus);

}  // namespace seqtag
