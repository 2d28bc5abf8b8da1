#include "seqtag/error.hpp"
#include "seqtag/model.hpp"

namespace seqtag {

GradCheckResult tiny_gradient_check(const TinyGradCheckOptions& options) {
    if (options.vocab_size < 2 || options.tag_count < 1 || options.length < 1)
        throw Error(ErrorCode::invalid_argument, "tiny gradient check needs vocab >= 2, tags >= 1, length >= 1");
    Rng rng(options.seed);

    std::vector<std::string> words;
    for (std::size_t i = 1; i < options.vocab_size; ++i) words.push_back("w" + std::to_string(i));
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < options.tag_count; ++i) tags.push_back("T" + std::to_string(i));
    ExtraFeatureSpec spec;
    spec.use_case_feature = true;
    spec.use_suffix = true;
    spec.suffix_alphabet = {"ed", "ly", "ng"};

    TaggerModel model(Vocabulary(std::move(words)), TagSet(std::move(tags)), spec,
                      {options.embed_dim, options.hidden_size, options.peepholes});
    for (Parameter* p : model.parameters()) {
        if (p->value.size() > 0) uniform_fill(p->value, -options.init_scale, options.init_scale, rng);
    }

    EncodedSentence sentence;
    sentence.feature_dim = spec.dimension();
    std::vector<std::size_t> gold;
    for (std::size_t t = 0; t < options.length; ++t) {
        sentence.word_ids.push_back(rng.uniform_index(options.vocab_size));
        SparseFeature f;
        f.set(rng.uniform_index(3));
        f.set(spec.suffix_offset() + rng.uniform_index(spec.suffix_alphabet.size() + 1));
        sentence.features.push_back(f);
        gold.push_back(rng.uniform_index(options.tag_count));
    }

    model.zero_grad();
    auto nll = sentence_nll(model, sentence, gold);
    backward(model, nll.trace, gold);

    auto params = model.parameters();
    return grad_check([&] { return sentence_nll(model, sentence, gold).loss; }, params, options.eps);
}

}  // namespace seqtag
