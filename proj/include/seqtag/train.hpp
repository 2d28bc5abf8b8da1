#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "seqtag/embeddings.hpp"
#include "seqtag/model.hpp"
#include "seqtag/text.hpp"

namespace seqtag {

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t max_epochs = 20;
    std::size_t hidden_size = 100;
    std::size_t embed_dim = 100;
    std::uint64_t seed = 1;
    /// Epochs without dev improvement before stopping; 0 disables early stopping.
    std::size_t patience = 5;
    bool shuffle = true;
    bool case_feature = true;
    bool suffix2 = false;
    bool peepholes = true;
    double clip = 0.0;
    std::string embedding_init;

    /// Throws invalid_argument on lr <= 0, H == 0 or embed_dim == 0.
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_nll = 0.0;  // mean per token
    double dev_accuracy = 0.0;
};

struct EvalResult {
    double accuracy = 0.0;
    std::size_t tokens = 0;
    std::size_t correct = 0;
    /// confusion[gold][predicted]
    std::vector<std::vector<std::size_t>> confusion;
};

struct LabeledExample {
    EncodedSentence input;
    std::vector<std::size_t> tags;
};

/// Throws unknown_tag when a tag is missing from the model's tag set.
std::vector<LabeledExample> encode_corpus(const TaggerModel& model, std::span<const TaggedSentence> corpus);

/// One pass of per-sentence SGD in the given order. Returns the mean NLL per
/// token measured before each update.
double train_epoch(TaggerModel& model, std::span<const LabeledExample> examples,
                   std::span<const std::size_t> order, const SgdOptions& sgd);

/// Throws empty_input "no tokens" for an empty corpus.
EvalResult evaluate(const TaggerModel& model, std::span<const LabeledExample> examples);
EvalResult token_accuracy(const TaggerModel& model, std::span<const TaggedSentence> corpus);

/// Training words, plus every word of `external` when given.
Vocabulary default_vocab(std::span<const TaggedSentence> train, const EmbeddingMap* external = nullptr);

/// Builds and initializes a tagger whose tag set and suffix alphabet come from
/// `train`. `oov_rate`, when non-null, receives the external coverage gap.
TaggerModel make_tagger(std::span<const TaggedSentence> train, Vocabulary vocab, const TrainConfig& cfg,
                        const EmbeddingMap* external = nullptr, double* oov_rate = nullptr);

struct TrainResult {
    TaggerModel model;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;  // 0 means the initial model was kept
    double best_dev_accuracy = 0.0;
    double oov_rate = 1.0;
};

/// SGD epochs over `train` with dev-based model selection and early stopping.
/// With an empty dev set the training set is used for selection.
TrainResult train_tagger(TaggerModel model, std::span<const TaggedSentence> train,
                         std::span<const TaggedSentence> dev, const TrainConfig& cfg);

/// Convenience: builds the vocabulary (unless given), loads
/// cfg.embedding_init if set, then trains.
TrainResult train_tagger(std::span<const TaggedSentence> train, std::span<const TaggedSentence> dev,
                         const TrainConfig& cfg, std::optional<Vocabulary> vocab = std::nullopt);

// ---------------------------------------------------------------------------
// Experiment harnesses

struct SweepRecord {
    std::size_t hidden_size = 0;
    double dev_accuracy = 0.0;
    double train_seconds = 0.0;
    std::size_t best_epoch = 0;
};

std::vector<SweepRecord> hidden_size_sweep(std::span<const std::size_t> sizes, const TrainConfig& base,
                                           std::span<const TaggedSentence> train,
                                           std::span<const TaggedSentence> dev,
                                           std::optional<Vocabulary> vocab = std::nullopt);

enum class Variant { baseline, embeddings, suffix2, embeddings_suffix2 };

const char* variant_name(Variant v) noexcept;
/// Accepts "baseline", "we", "suffix2", "we+suffix2".
Variant parse_variant(std::string_view name);

struct AblationRow {
    std::string variant;
    double dev_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Trains each variant with the same seed and vocabulary. Variants using
/// pretrained embeddings read `embedding_path`, which must be non-empty.
std::vector<AblationRow> ablation_run(std::span<const Variant> variants, const TrainConfig& base,
                                      std::span<const TaggedSentence> train,
                                      std::span<const TaggedSentence> dev,
                                      std::span<const TaggedSentence> test,
                                      const std::string& embedding_path,
                                      std::optional<Vocabulary> vocab = std::nullopt);

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);
void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records);
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);

/// Decimal with 9 significant digits.
std::string format_decimal(double v);

}  // namespace seqtag
