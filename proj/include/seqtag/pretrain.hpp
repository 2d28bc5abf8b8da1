#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seqtag/embeddings.hpp"
#include "seqtag/model.hpp"
#include "seqtag/rng.hpp"
#include "seqtag/text.hpp"
#include "seqtag/train.hpp"

namespace seqtag {

inline constexpr std::uint8_t label_incorrect = 0;
inline constexpr std::uint8_t label_correct = 1;

struct CorruptionConfig {
    double replace_rate = 0.2;
    std::uint64_t seed = 1;
    bool exclude_unk = true;
    /// Draw replacements proportionally to corpus frequency instead of uniformly.
    bool frequency_weighted = false;

    void validate() const;
};

struct CorruptedSentence {
    Sentence tokens;
    std::vector<std::uint8_t> labels;
};

/// Distribution over vocabulary ids that replacements are drawn from.
class ReplacementSampler {
public:
    static ReplacementSampler uniform(const Vocabulary& vocab, bool exclude_unk);
    /// Words with zero count are never drawn.
    static ReplacementSampler weighted(const Vocabulary& vocab, const WordCounts& counts, bool exclude_unk);

    std::size_t draw(Rng& rng) const;
    std::size_t pool_size() const noexcept { return ids_.size(); }

private:
    std::vector<std::size_t> ids_;
    std::vector<double> cumulative_;  // empty for the uniform case
};

/// Replaces each position with probability `replace_rate` by a sampled word
/// different from the original (compared in normalized form). Replaced
/// positions get label_incorrect. Throws cannot_corrupt when the sampler pool
/// has fewer than two words.
CorruptedSentence corrupt(std::span<const std::string> sentence, const Vocabulary& vocab,
                          const ReplacementSampler& sampler, double replace_rate, Rng& rng);
CorruptedSentence corrupt(std::span<const std::string> sentence, const Vocabulary& vocab,
                          const CorruptionConfig& cfg, Rng& rng);

/// The binary discriminator tag set: id 0 "incorrect", id 1 "correct".
TagSet corruption_tags();

struct PretrainResult {
    EmbeddingTable embeddings;
    TaggerModel model;
    std::vector<double> epoch_nll;
};

/// Trains a two-tag BLSTM tagger to spot replaced words, re-corrupting the
/// corpus every epoch, and returns its W1. Runs `net.max_epochs` epochs; the
/// suffix feature is not used.
PretrainResult pretrain(std::span<const Sentence> corpus, const Vocabulary& vocab, const TrainConfig& net,
                        const CorruptionConfig& corruption);

}  // namespace seqtag
