/*
 * C interface to the seqtag bidirectional-LSTM sequence tagger.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns a seqtag_status; on failure the thread-local
 * message from seqtag_last_error() describes what went wrong.
 *
 * Paths named "-" refer to stdin (inputs) or stdout (outputs) where noted.
 */
#ifndef SEQTAG_SEQTAG_H
#define SEQTAG_SEQTAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(SEQTAG_BUILDING_LIBRARY)
#define SEQTAG_API __attribute__((visibility("default")))
#else
#define SEQTAG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum seqtag_status {
    SEQTAG_OK = 0,
    SEQTAG_ERR_INVALID_ARGUMENT = 1,
    SEQTAG_ERR_UNKNOWN_KEY = 2,
    SEQTAG_ERR_IO = 3,
    SEQTAG_ERR_FORMAT = 4,
    SEQTAG_ERR_TRUNCATED = 5,
    SEQTAG_ERR_UNSUPPORTED_VERSION = 6,
    SEQTAG_ERR_BAD_MAGIC = 7,
    SEQTAG_ERR_SHAPE_MISMATCH = 8,
    SEQTAG_ERR_EMPTY_INPUT = 9,
    SEQTAG_ERR_UNKNOWN_TAG = 10,
    SEQTAG_ERR_CANNOT_CORRUPT = 11,
    SEQTAG_ERR_GRADIENT_BLOWUP = 12,
    SEQTAG_ERR_NUMERIC = 13,
    SEQTAG_ERR_INTERNAL = 14
} seqtag_status;

typedef struct seqtag_config seqtag_config;
typedef struct seqtag_vocab seqtag_vocab;
typedef struct seqtag_model seqtag_model;

typedef struct seqtag_eval {
    double accuracy;
    size_t tokens;
    size_t correct;
} seqtag_eval;

SEQTAG_API const char* seqtag_version(void);
SEQTAG_API const char* seqtag_status_name(seqtag_status status);
/* Message for the most recent failure on this thread; "" if none. */
SEQTAG_API const char* seqtag_last_error(void);

/* ---- run configuration --------------------------------------------------- */

SEQTAG_API seqtag_status seqtag_config_create(seqtag_config** out);
SEQTAG_API void seqtag_config_destroy(seqtag_config* config);
/* Unknown keys give SEQTAG_ERR_UNKNOWN_KEY, bad values SEQTAG_ERR_INVALID_ARGUMENT. */
SEQTAG_API seqtag_status seqtag_config_set(seqtag_config* config, const char* key, const char* value);
SEQTAG_API seqtag_status seqtag_config_load_file(seqtag_config* config, const char* path);
/* NULL for unknown keys. Valid until the next call on this handle. */
SEQTAG_API const char* seqtag_config_get(const seqtag_config* config, const char* key);
/* "key=value ..." for every key. Valid until the next call on this handle. */
SEQTAG_API const char* seqtag_config_describe(seqtag_config* config);

/* ---- vocabulary ---------------------------------------------------------- */

/* Every word of the tagged corpora plus the max_common most frequent words of
 * the plain corpora (or of the tagged corpora when no plain corpus is given). */
SEQTAG_API seqtag_status seqtag_vocab_build(const seqtag_config* config,
                                            const char* const* tagged_paths, size_t tagged_count,
                                            const char* const* plain_paths, size_t plain_count,
                                            seqtag_vocab** out);
SEQTAG_API seqtag_status seqtag_vocab_load(const char* path, seqtag_vocab** out);
SEQTAG_API seqtag_status seqtag_vocab_save(const seqtag_vocab* vocab, const char* path);
SEQTAG_API size_t seqtag_vocab_size(const seqtag_vocab* vocab);
SEQTAG_API void seqtag_vocab_destroy(seqtag_vocab* vocab);

/* ---- tagger -------------------------------------------------------------- */

/* dev_path, vocab and history_csv may be NULL. */
SEQTAG_API seqtag_status seqtag_train(const seqtag_config* config, const char* train_path,
                                      const char* dev_path, const seqtag_vocab* vocab,
                                      const char* history_csv, seqtag_model** out);
SEQTAG_API seqtag_status seqtag_model_load(const char* path, seqtag_model** out);
SEQTAG_API seqtag_status seqtag_model_save(const seqtag_model* model, const char* path);
SEQTAG_API void seqtag_model_destroy(seqtag_model* model);

SEQTAG_API size_t seqtag_model_tag_count(const seqtag_model* model);
/* NULL when id is out of range. */
SEQTAG_API const char* seqtag_model_tag_name(const seqtag_model* model, size_t id);
/* Writes `count` tag ids into tag_ids. */
SEQTAG_API seqtag_status seqtag_model_predict(const seqtag_model* model, const char* const* tokens,
                                              size_t count, size_t* tag_ids);
/* Plain text in (one sentence per line), "token<TAB>tag" lines out with a
 * blank line after each sentence. Either path may be "-". */
SEQTAG_API seqtag_status seqtag_model_tag_file(const seqtag_model* model, const char* input_path,
                                               const char* output_path);
SEQTAG_API seqtag_status seqtag_model_evaluate(const seqtag_model* model, const char* tagged_path,
                                               seqtag_eval* out);
SEQTAG_API seqtag_status seqtag_model_export_embeddings(const seqtag_model* model, const char* path);

/* ---- embedding pretraining ----------------------------------------------- */

/* Corruption-detection pretraining on a plain corpus; writes the embedding
 * text file. When vocab is NULL the vocabulary is the max_common most
 * frequent corpus words. final_nll may be NULL. */
SEQTAG_API seqtag_status seqtag_pretrain(const seqtag_config* config, const char* plain_path,
                                         const seqtag_vocab* vocab, const char* embeddings_out,
                                         double* final_nll);

/* ---- experiment harnesses ------------------------------------------------ */

SEQTAG_API seqtag_status seqtag_sweep(const seqtag_config* config, const size_t* hidden_sizes,
                                      size_t size_count, const char* train_path, const char* dev_path,
                                      const char* csv_out);
/* Variant names: "baseline", "we", "suffix2", "we+suffix2". The embedding
 * file is taken from the config key emb_init. */
SEQTAG_API seqtag_status seqtag_ablate(const seqtag_config* config, const char* const* variants,
                                       size_t variant_count, const char* train_path, const char* dev_path,
                                       const char* test_path, const char* csv_out);
/* Finite-difference check of a seeded tiny model (vocab 20, embed 8, hidden 6
 * per direction, 4 tags, length 5, eps 1e-5). */
SEQTAG_API seqtag_status seqtag_gradcheck(uint64_t seed, double* max_relative_error);

#ifdef __cplusplus
}
#endif

#endif /* SEQTAG_SEQTAG_H */
