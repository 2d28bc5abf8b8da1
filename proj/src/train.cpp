#include "seqtag/train.hpp"

#include <chrono>
#include <cstdio>
#include <numeric>

#include "seqtag/error.hpp"

namespace seqtag {

namespace {

constexpr std::uint64_t shuffle_stream = 0x5348;    // "SH"
constexpr std::uint64_t embedding_stream = 0x454D;  // "EM"

std::vector<std::string> words_of(std::span<const TaggedSentence> corpus) {
    std::vector<std::string> out;
    for (const auto& s : corpus) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
    if (hidden_size == 0) throw Error(ErrorCode::invalid_argument, "hidden size must be positive");
    if (embed_dim == 0) throw Error(ErrorCode::invalid_argument, "embedding dimension must be positive");
    if (clip < 0.0) throw Error(ErrorCode::invalid_argument, "clip must be >= 0");
}

std::vector<LabeledExample> encode_corpus(const TaggerModel& model, std::span<const TaggedSentence> corpus) {
    std::vector<LabeledExample> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) {
        LabeledExample ex;
        ex.input = encode(s.tokens, model.vocab(), model.features());
        ex.tags.reserve(s.tags.size());
        for (const auto& tag : s.tags) ex.tags.push_back(model.tags().id(tag));
        out.push_back(std::move(ex));
    }
    return out;
}

double train_epoch(TaggerModel& model, std::span<const LabeledExample> examples,
                   std::span<const std::size_t> order, const SgdOptions& sgd) {
    auto params = model.parameters();
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t idx : order) {
        const auto& ex = examples[idx];
        auto nll = sentence_nll(model, ex.input, ex.tags);
        backward(model, nll.trace, ex.tags);
        sgd_step(params, sgd);
        total += nll.loss;
        tokens += ex.tags.size();
    }
    return tokens ? total / static_cast<double>(tokens) : 0.0;
}

EvalResult evaluate(const TaggerModel& model, std::span<const LabeledExample> examples) {
    EvalResult r;
    const std::size_t m = model.tag_count();
    r.confusion.assign(m, std::vector<std::size_t>(m, 0));
    for (const auto& ex : examples) {
        if (ex.input.size() == 0) continue;
        auto predicted = predict_tags(model, ex.input);
        for (std::size_t t = 0; t < predicted.size(); ++t) {
            ++r.confusion[ex.tags[t]][predicted[t]];
            if (predicted[t] == ex.tags[t]) ++r.correct;
            ++r.tokens;
        }
    }
    if (r.tokens == 0) throw Error(ErrorCode::empty_input, "no tokens");
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.tokens);
    return r;
}

EvalResult token_accuracy(const TaggerModel& model, std::span<const TaggedSentence> corpus) {
    return evaluate(model, encode_corpus(model, corpus));
}

Vocabulary default_vocab(std::span<const TaggedSentence> train, const EmbeddingMap* external) {
    WordCounts counts;
    for (const auto& s : train) counts.add_sentence(s.tokens);
    auto must = words_of(train);
    if (external) must.insert(must.end(), external->words().begin(), external->words().end());
    return build_vocab(counts, 0, must);
}

TaggerModel make_tagger(std::span<const TaggedSentence> train, Vocabulary vocab, const TrainConfig& cfg,
                        const EmbeddingMap* external, double* oov_rate) {
    cfg.validate();
    if (train.empty()) throw Error(ErrorCode::empty_input, "training corpus is empty");
    ExtraFeatureSpec spec;
    if (cfg.suffix2) {
        spec = build_suffix_alphabet(words_of(train), cfg.case_feature);
    } else {
        spec.use_case_feature = cfg.case_feature;
    }
    TaggerModel model(std::move(vocab), TagSet::from_corpus(train), std::move(spec),
                      {cfg.embed_dim, cfg.hidden_size, cfg.peepholes});
    Rng rng(cfg.seed);
    model.initialize(rng);
    if (external) {
        Rng emb_rng = rng.fork(embedding_stream);
        auto init = init_tagger_embeddings(model.vocab(), external, cfg.embed_dim, emb_rng);
        model.embeddings.value = std::move(init.vectors);
        if (oov_rate) *oov_rate = init.oov_rate;
    } else if (oov_rate) {
        *oov_rate = 1.0;
    }
    return model;
}

TrainResult train_tagger(TaggerModel model, std::span<const TaggedSentence> train,
                         std::span<const TaggedSentence> dev, const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw Error(ErrorCode::empty_input, "training corpus is empty");
    const auto train_set = encode_corpus(model, train);
    const auto dev_set = dev.empty() ? std::vector<LabeledExample>{} : encode_corpus(model, dev);
    std::span<const LabeledExample> selection = dev.empty() ? std::span(train_set) : std::span(dev_set);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = Rng(cfg.seed).fork(shuffle_stream);
    const SgdOptions sgd{cfg.learning_rate, cfg.clip};

    TrainResult result{model, {}, 0, 0.0, 1.0};
    if (cfg.max_epochs == 0) return result;
    result.best_dev_accuracy = -1.0;

    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (cfg.shuffle) shuffle(std::span(order), shuffle_rng);
        const double nll = train_epoch(model, train_set, order, sgd);
        const double acc = evaluate(model, selection).accuracy;
        result.history.push_back({epoch, nll, acc});
        if (acc > result.best_dev_accuracy) {
            result.best_dev_accuracy = acc;
            result.best_epoch = epoch;
            result.model = model;
            stale = 0;
        } else if (cfg.patience > 0 && ++stale >= cfg.patience) {
            break;
        }
    }
    return result;
}

TrainResult train_tagger(std::span<const TaggedSentence> train, std::span<const TaggedSentence> dev,
                         const TrainConfig& cfg, std::optional<Vocabulary> vocab) {
    std::optional<EmbeddingMap> external;
    if (!cfg.embedding_init.empty()) external = import_embeddings(cfg.embedding_init);
    const EmbeddingMap* ext = external ? &*external : nullptr;
    Vocabulary v = vocab ? std::move(*vocab) : default_vocab(train, ext);
    double oov = 1.0;
    auto model = make_tagger(train, std::move(v), cfg, ext, &oov);
    auto result = train_tagger(std::move(model), train, dev, cfg);
    result.oov_rate = oov;
    return result;
}

// ---------------------------------------------------------------------------

std::vector<SweepRecord> hidden_size_sweep(std::span<const std::size_t> sizes, const TrainConfig& base,
                                           std::span<const TaggedSentence> train,
                                           std::span<const TaggedSentence> dev,
                                           std::optional<Vocabulary> vocab) {
    if (sizes.empty()) throw Error(ErrorCode::invalid_argument, "sweep needs at least one hidden size");
    std::vector<SweepRecord> out;
    for (std::size_t h : sizes) {
        TrainConfig cfg = base;
        cfg.hidden_size = h;
        const auto start = std::chrono::steady_clock::now();
        auto result = train_tagger(train, dev, cfg, vocab);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        out.push_back({h, result.best_dev_accuracy, elapsed.count(), result.best_epoch});
    }
    return out;
}

const char* variant_name(Variant v) noexcept {
    switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::embeddings: return "we";
    case Variant::suffix2: return "suffix2";
    case Variant::embeddings_suffix2: return "we+suffix2";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    for (Variant v : {Variant::baseline, Variant::embeddings, Variant::suffix2, Variant::embeddings_suffix2}) {
        if (name == variant_name(v)) return v;
    }
    throw Error(ErrorCode::invalid_argument, "unknown variant '" + std::string(name) +
                                                 "' (expected baseline, we, suffix2, we+suffix2)");
}

std::vector<AblationRow> ablation_run(std::span<const Variant> variants, const TrainConfig& base,
                                      std::span<const TaggedSentence> train,
                                      std::span<const TaggedSentence> dev,
                                      std::span<const TaggedSentence> test,
                                      const std::string& embedding_path,
                                      std::optional<Vocabulary> vocab) {
    bool needs_embeddings = false;
    for (Variant v : variants)
        needs_embeddings |= v == Variant::embeddings || v == Variant::embeddings_suffix2;
    std::optional<EmbeddingMap> external;
    if (needs_embeddings) {
        if (embedding_path.empty())
            throw Error(ErrorCode::io, "pretrained embedding variants need an embedding file");
        external = import_embeddings(embedding_path);
    }
    // one vocabulary for every variant so only the initialization differs
    Vocabulary shared = vocab ? std::move(*vocab) : default_vocab(train, external ? &*external : nullptr);

    std::vector<AblationRow> rows;
    for (Variant v : variants) {
        TrainConfig cfg = base;
        cfg.embedding_init.clear();
        cfg.suffix2 = v == Variant::suffix2 || v == Variant::embeddings_suffix2;
        const bool use_we = v == Variant::embeddings || v == Variant::embeddings_suffix2;
        auto model = make_tagger(train, shared, cfg, use_we ? &*external : nullptr);
        auto result = train_tagger(std::move(model), train, dev, cfg);
        rows.push_back({variant_name(v), result.best_dev_accuracy, token_accuracy(result.model, test).accuracy});
    }
    return rows;
}

std::string format_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
    out << "epoch,train_nll,dev_accuracy\n";
    for (const auto& r : history)
        out << r.epoch << ',' << format_decimal(r.train_nll) << ',' << format_decimal(r.dev_accuracy) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records) {
    out << "hidden_size,dev_accuracy,train_seconds,best_epoch\n";
    for (const auto& r : records)
        out << r.hidden_size << ',' << format_decimal(r.dev_accuracy) << ',' << format_decimal(r.train_seconds)
            << ',' << r.best_epoch << '\n';
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
    out << "variant,dev_accuracy,test_accuracy\n";
    for (const auto& r : rows)
        out << r.variant << ',' << format_decimal(r.dev_accuracy) << ',' << format_decimal(r.test_accuracy) << '\n';
}

}  // namespace seqtag
