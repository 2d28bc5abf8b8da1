#include "seqtag/pretrain.hpp"

#include <algorithm>
#include <numeric>

#include "seqtag/error.hpp"

namespace seqtag {

namespace {

constexpr std::uint64_t shuffle_stream = 0x5053;  // "PS"
constexpr std::uint64_t corrupt_stream = 0x5043;  // "PC"

}  // namespace

void CorruptionConfig::validate() const {
    if (!(replace_rate >= 0.0 && replace_rate <= 1.0))
        throw Error(ErrorCode::invalid_argument, "replace_rate must lie in [0, 1]");
}

ReplacementSampler ReplacementSampler::uniform(const Vocabulary& vocab, bool exclude_unk) {
    ReplacementSampler s;
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        if (exclude_unk && id == vocab.unk_id()) continue;
        s.ids_.push_back(id);
    }
    return s;
}

ReplacementSampler ReplacementSampler::weighted(const Vocabulary& vocab, const WordCounts& counts,
                                                bool exclude_unk) {
    ReplacementSampler s;
    double total = 0.0;
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        if (exclude_unk && id == vocab.unk_id()) continue;
        const std::size_t n = counts.count(vocab.word(id));
        if (n == 0) continue;
        total += static_cast<double>(n);
        s.ids_.push_back(id);
        s.cumulative_.push_back(total);
    }
    return s;
}

std::size_t ReplacementSampler::draw(Rng& rng) const {
    if (ids_.empty()) throw Error(ErrorCode::cannot_corrupt, "cannot corrupt: replacement pool is empty");
    if (cumulative_.empty()) return ids_[rng.uniform_index(ids_.size())];
    const double u = rng.uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
}

CorruptedSentence corrupt(std::span<const std::string> sentence, const Vocabulary& vocab,
                          const ReplacementSampler& sampler, double replace_rate, Rng& rng) {
    if (sentence.empty()) throw Error(ErrorCode::empty_input, "empty input");
    if (!(replace_rate >= 0.0 && replace_rate <= 1.0))
        throw Error(ErrorCode::invalid_argument, "replace_rate must lie in [0, 1]");
    if (sampler.pool_size() < 2)
        throw Error(ErrorCode::cannot_corrupt, "cannot corrupt: need at least two candidate replacement words");

    CorruptedSentence out;
    out.tokens.assign(sentence.begin(), sentence.end());
    out.labels.assign(sentence.size(), label_correct);
    for (std::size_t t = 0; t < sentence.size(); ++t) {
        if (!rng.bernoulli(replace_rate)) continue;
        const std::string original = normalize_word(sentence[t]);
        std::size_t pick = sampler.draw(rng);
        while (vocab.word(pick) == original) pick = sampler.draw(rng);
        out.tokens[t] = vocab.word(pick);
        out.labels[t] = label_incorrect;
    }
    return out;
}

CorruptedSentence corrupt(std::span<const std::string> sentence, const Vocabulary& vocab,
                          const CorruptionConfig& cfg, Rng& rng) {
    cfg.validate();
    return corrupt(sentence, vocab, ReplacementSampler::uniform(vocab, cfg.exclude_unk), cfg.replace_rate, rng);
}

TagSet corruption_tags() { return TagSet({"incorrect", "correct"}); }

PretrainResult pretrain(std::span<const Sentence> corpus, const Vocabulary& vocab, const TrainConfig& net,
                        const CorruptionConfig& corruption) {
    net.validate();
    corruption.validate();
    std::vector<const Sentence*> sentences;
    for (const auto& s : corpus) {
        if (!s.empty()) sentences.push_back(&s);
    }
    if (sentences.empty()) throw Error(ErrorCode::empty_input, "pretraining corpus is empty");

    ReplacementSampler sampler = ReplacementSampler::uniform(vocab, corruption.exclude_unk);
    if (corruption.frequency_weighted) {
        WordCounts counts;
        for (const Sentence* s : sentences) counts.add_sentence(*s);
        sampler = ReplacementSampler::weighted(vocab, counts, corruption.exclude_unk);
    }
    if (sampler.pool_size() < 2)
        throw Error(ErrorCode::cannot_corrupt, "cannot corrupt: need at least two candidate replacement words");

    ExtraFeatureSpec spec;
    spec.use_case_feature = net.case_feature;
    TaggerModel model(vocab, corruption_tags(), spec, {net.embed_dim, net.hidden_size, net.peepholes});
    Rng init_rng(net.seed);
    model.initialize(init_rng);

    Rng corrupt_rng = Rng(corruption.seed).fork(corrupt_stream);
    Rng shuffle_rng = Rng(net.seed).fork(shuffle_stream);
    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    const SgdOptions sgd{net.learning_rate, net.clip};
    auto params = model.parameters();

    std::vector<double> history;
    std::vector<std::size_t> labels;
    for (std::size_t epoch = 0; epoch < net.max_epochs; ++epoch) {
        if (net.shuffle) shuffle(std::span(order), shuffle_rng);
        double total = 0.0;
        std::size_t tokens = 0;
        for (std::size_t idx : order) {
            auto sample = corrupt(*sentences[idx], vocab, sampler, corruption.replace_rate, corrupt_rng);
            auto encoded = encode(sample.tokens, vocab, spec);
            labels.assign(sample.labels.begin(), sample.labels.end());
            auto nll = sentence_nll(model, encoded, labels);
            backward(model, nll.trace, labels);
            sgd_step(params, sgd);
            total += nll.loss;
            tokens += labels.size();
        }
        history.push_back(total / static_cast<double>(tokens));
    }

    EmbeddingTable table{vocab, model.embeddings.value};
    return {std::move(table), std::move(model), std::move(history)};
}

}  // namespace seqtag
