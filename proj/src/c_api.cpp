#include "seqtag/seqtag.h"

#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seqtag/config.hpp"
#include "seqtag/embeddings.hpp"
#include "seqtag/error.hpp"
#include "seqtag/model.hpp"
#include "seqtag/pretrain.hpp"
#include "seqtag/text.hpp"
#include "seqtag/train.hpp"

struct seqtag_config {
    seqtag::RunConfig config;
    std::string scratch;
};

struct seqtag_vocab {
    seqtag::Vocabulary vocab;
};

struct seqtag_model {
    seqtag::TaggerModel model;
};

namespace {

thread_local std::string last_error;

seqtag_status to_status(seqtag::ErrorCode code) {
    using seqtag::ErrorCode;
    switch (code) {
    case ErrorCode::invalid_argument: return SEQTAG_ERR_INVALID_ARGUMENT;
    case ErrorCode::unknown_key: return SEQTAG_ERR_UNKNOWN_KEY;
    case ErrorCode::io: return SEQTAG_ERR_IO;
    case ErrorCode::format: return SEQTAG_ERR_FORMAT;
    case ErrorCode::truncated: return SEQTAG_ERR_TRUNCATED;
    case ErrorCode::unsupported_version: return SEQTAG_ERR_UNSUPPORTED_VERSION;
    case ErrorCode::bad_magic: return SEQTAG_ERR_BAD_MAGIC;
    case ErrorCode::shape_mismatch: return SEQTAG_ERR_SHAPE_MISMATCH;
    case ErrorCode::empty_input: return SEQTAG_ERR_EMPTY_INPUT;
    case ErrorCode::unknown_tag: return SEQTAG_ERR_UNKNOWN_TAG;
    case ErrorCode::cannot_corrupt: return SEQTAG_ERR_CANNOT_CORRUPT;
    case ErrorCode::gradient_blowup: return SEQTAG_ERR_GRADIENT_BLOWUP;
    case ErrorCode::numeric: return SEQTAG_ERR_NUMERIC;
    }
    return SEQTAG_ERR_INTERNAL;
}

template <typename Fn>
seqtag_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return SEQTAG_OK;
    } catch (const seqtag::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return SEQTAG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return SEQTAG_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw seqtag::Error(seqtag::ErrorCode::invalid_argument, what);
}

bool is_std(const char* path) { return path && std::string(path) == "-"; }

// Runs `write` against stdout for "-" or the named file.
template <typename Fn>
void with_output(const char* path, Fn&& write) {
    if (is_std(path)) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw seqtag::Error(seqtag::ErrorCode::io, std::string("cannot write ") + path);
    write(out);
    if (!out) throw seqtag::Error(seqtag::ErrorCode::io, std::string("failed writing ") + path);
}

std::vector<seqtag::TaggedSentence> read_optional(const char* path) {
    if (!path || !*path) return {};
    return seqtag::read_tagged_corpus(std::string(path));
}

}  // namespace

extern "C" {

const char* seqtag_version(void) { return "1.0.0"; }

const char* seqtag_status_name(seqtag_status status) {
    switch (status) {
    case SEQTAG_OK: return "ok";
    case SEQTAG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SEQTAG_ERR_UNKNOWN_KEY: return "unknown key";
    case SEQTAG_ERR_IO: return "i/o error";
    case SEQTAG_ERR_FORMAT: return "format error";
    case SEQTAG_ERR_TRUNCATED: return "truncated container";
    case SEQTAG_ERR_UNSUPPORTED_VERSION: return "unsupported version";
    case SEQTAG_ERR_BAD_MAGIC: return "bad magic";
    case SEQTAG_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case SEQTAG_ERR_EMPTY_INPUT: return "empty input";
    case SEQTAG_ERR_UNKNOWN_TAG: return "unknown tag";
    case SEQTAG_ERR_CANNOT_CORRUPT: return "cannot corrupt";
    case SEQTAG_ERR_GRADIENT_BLOWUP: return "gradient blowup";
    case SEQTAG_ERR_NUMERIC: return "numeric failure";
    case SEQTAG_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* seqtag_last_error(void) { return last_error.c_str(); }

// ---- config ----------------------------------------------------------------

seqtag_status seqtag_config_create(seqtag_config** out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = new seqtag_config{};
    });
}

void seqtag_config_destroy(seqtag_config* config) { delete config; }

seqtag_status seqtag_config_set(seqtag_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config && key && value, "null argument");
        config->config.set(key, value);
    });
}

seqtag_status seqtag_config_load_file(seqtag_config* config, const char* path) {
    return guarded([&] {
        require(config && path, "null argument");
        config->config.load_file(path);
    });
}

const char* seqtag_config_get(const seqtag_config* config, const char* key) {
    if (!config || !key) return nullptr;
    try {
        return config->config.get(key).c_str();
    } catch (const std::exception&) {
        return nullptr;
    }
}

const char* seqtag_config_describe(seqtag_config* config) {
    if (!config) return "";
    config->scratch = config->config.describe();
    return config->scratch.c_str();
}

// ---- vocabulary --------------------------------------------------------------

seqtag_status seqtag_vocab_build(const seqtag_config* config, const char* const* tagged_paths,
                                 size_t tagged_count, const char* const* plain_paths, size_t plain_count,
                                 seqtag_vocab** out) {
    return guarded([&] {
        require(config && out, "null argument");
        require(tagged_count == 0 || tagged_paths, "tagged_paths is null");
        require(plain_count == 0 || plain_paths, "plain_paths is null");
        seqtag::WordCounts counts;
        std::vector<std::string> must;
        for (size_t i = 0; i < tagged_count; ++i) {
            for (const auto& s : seqtag::read_tagged_corpus(std::string(tagged_paths[i]))) {
                must.insert(must.end(), s.tokens.begin(), s.tokens.end());
                if (plain_count == 0) counts.add_sentence(s.tokens);
            }
        }
        for (size_t i = 0; i < plain_count; ++i) {
            for (const auto& s : seqtag::read_plain_corpus(std::string(plain_paths[i]))) counts.add_sentence(s);
        }
        auto vocab = seqtag::build_vocab(counts, config->config.max_common(), must);
        *out = new seqtag_vocab{std::move(vocab)};
    });
}

seqtag_status seqtag_vocab_load(const char* path, seqtag_vocab** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new seqtag_vocab{seqtag::Vocabulary::load_file(path)};
    });
}

seqtag_status seqtag_vocab_save(const seqtag_vocab* vocab, const char* path) {
    return guarded([&] {
        require(vocab && path, "null argument");
        with_output(path, [&](std::ostream& o) { vocab->vocab.save(o); });
    });
}

size_t seqtag_vocab_size(const seqtag_vocab* vocab) { return vocab ? vocab->vocab.size() : 0; }

void seqtag_vocab_destroy(seqtag_vocab* vocab) { delete vocab; }

// ---- tagger ------------------------------------------------------------------

seqtag_status seqtag_train(const seqtag_config* config, const char* train_path, const char* dev_path,
                           const seqtag_vocab* vocab, const char* history_csv, seqtag_model** out) {
    return guarded([&] {
        require(config && train_path && out, "null argument");
        auto train = seqtag::read_tagged_corpus(std::string(train_path));
        auto dev = read_optional(dev_path);
        std::optional<seqtag::Vocabulary> v;
        if (vocab) v = vocab->vocab;
        auto result = seqtag::train_tagger(train, dev, config->config.train_config(), std::move(v));
        if (history_csv)
            with_output(history_csv, [&](std::ostream& o) { seqtag::write_history_csv(o, result.history); });
        *out = new seqtag_model{std::move(result.model)};
    });
}

seqtag_status seqtag_model_load(const char* path, seqtag_model** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new seqtag_model{seqtag::load_model(std::string(path))};
    });
}

seqtag_status seqtag_model_save(const seqtag_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "null argument");
        seqtag::save_model(model->model, std::string(path));
    });
}

void seqtag_model_destroy(seqtag_model* model) { delete model; }

size_t seqtag_model_tag_count(const seqtag_model* model) { return model ? model->model.tag_count() : 0; }

const char* seqtag_model_tag_name(const seqtag_model* model, size_t id) {
    if (!model || id >= model->model.tag_count()) return nullptr;
    return model->model.tags().tag(id).c_str();
}

seqtag_status seqtag_model_predict(const seqtag_model* model, const char* const* tokens, size_t count,
                                   size_t* tag_ids) {
    return guarded([&] {
        require(model && tokens && tag_ids, "null argument");
        std::vector<std::string> sentence(tokens, tokens + count);
        auto encoded = seqtag::encode(sentence, model->model.vocab(), model->model.features());
        auto predicted = seqtag::predict_tags(model->model, encoded);
        std::copy(predicted.begin(), predicted.end(), tag_ids);
    });
}

seqtag_status seqtag_model_tag_file(const seqtag_model* model, const char* input_path, const char* output_path) {
    return guarded([&] {
        require(model && input_path && output_path, "null argument");
        std::vector<seqtag::Sentence> sentences;
        if (is_std(input_path)) {
            sentences = seqtag::read_plain_corpus(std::cin);
        } else {
            sentences = seqtag::read_plain_corpus(std::string(input_path));
        }
        const auto& m = model->model;
        with_output(output_path, [&](std::ostream& o) {
            for (const auto& s : sentences) {
                auto predicted = seqtag::predict_tags(m, seqtag::encode(s, m.vocab(), m.features()));
                for (size_t t = 0; t < s.size(); ++t) o << s[t] << '\t' << m.tags().tag(predicted[t]) << '\n';
                o << '\n';
            }
        });
    });
}

seqtag_status seqtag_model_evaluate(const seqtag_model* model, const char* tagged_path, seqtag_eval* out) {
    return guarded([&] {
        require(model && tagged_path && out, "null argument");
        auto corpus = seqtag::read_tagged_corpus(std::string(tagged_path));
        auto r = seqtag::token_accuracy(model->model, corpus);
        *out = seqtag_eval{r.accuracy, r.tokens, r.correct};
    });
}

seqtag_status seqtag_model_export_embeddings(const seqtag_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "null argument");
        seqtag::EmbeddingTable table{model->model.vocab(), model->model.embeddings.value};
        with_output(path, [&](std::ostream& o) { seqtag::export_embeddings(table, o); });
    });
}

// ---- pretraining -------------------------------------------------------------

seqtag_status seqtag_pretrain(const seqtag_config* config, const char* plain_path, const seqtag_vocab* vocab,
                              const char* embeddings_out, double* final_nll) {
    return guarded([&] {
        require(config && plain_path && embeddings_out, "null argument");
        auto corpus = seqtag::read_plain_corpus(std::string(plain_path));
        std::optional<seqtag::Vocabulary> v;
        if (vocab) {
            v = vocab->vocab;
        } else {
            seqtag::WordCounts counts;
            for (const auto& s : corpus) counts.add_sentence(s);
            v = seqtag::build_vocab(counts, config->config.max_common());
        }
        auto result = seqtag::pretrain(corpus, *v, config->config.train_config(),
                                       config->config.corruption_config());
        with_output(embeddings_out, [&](std::ostream& o) { seqtag::export_embeddings(result.embeddings, o); });
        if (final_nll) *final_nll = result.epoch_nll.empty() ? 0.0 : result.epoch_nll.back();
    });
}

// ---- harnesses -----------------------------------------------------------------

seqtag_status seqtag_sweep(const seqtag_config* config, const size_t* hidden_sizes, size_t size_count,
                           const char* train_path, const char* dev_path, const char* csv_out) {
    return guarded([&] {
        require(config && train_path && csv_out, "null argument");
        require(size_count == 0 || hidden_sizes, "hidden_sizes is null");
        auto train = seqtag::read_tagged_corpus(std::string(train_path));
        auto dev = read_optional(dev_path);
        std::vector<std::size_t> sizes(hidden_sizes, hidden_sizes + size_count);
        auto records = seqtag::hidden_size_sweep(sizes, config->config.train_config(), train, dev);
        with_output(csv_out, [&](std::ostream& o) { seqtag::write_sweep_csv(o, records); });
    });
}

seqtag_status seqtag_ablate(const seqtag_config* config, const char* const* variants, size_t variant_count,
                            const char* train_path, const char* dev_path, const char* test_path,
                            const char* csv_out) {
    return guarded([&] {
        require(config && variants && train_path && test_path && csv_out, "null argument");
        std::vector<seqtag::Variant> chosen;
        for (size_t i = 0; i < variant_count; ++i) chosen.push_back(seqtag::parse_variant(variants[i]));
        auto train = seqtag::read_tagged_corpus(std::string(train_path));
        auto dev = read_optional(dev_path);
        auto test = seqtag::read_tagged_corpus(std::string(test_path));
        auto cfg = config->config.train_config();
        auto rows = seqtag::ablation_run(chosen, cfg, train, dev, test, cfg.embedding_init);
        with_output(csv_out, [&](std::ostream& o) { seqtag::write_ablation_csv(o, rows); });
    });
}

seqtag_status seqtag_gradcheck(uint64_t seed, double* max_relative_error) {
    return guarded([&] {
        require(max_relative_error != nullptr, "null argument");
        seqtag::TinyGradCheckOptions options;
        options.seed = seed;
        *max_relative_error = seqtag::tiny_gradient_check(options).max_relative_error;
    });
}

}  // extern "C"
