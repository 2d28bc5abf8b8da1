// seqtag command-line frontend. Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqtag/seqtag.h"

namespace {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numeric = 3 };

int exit_code_for(seqtag_status status) {
    switch (status) {
    case SEQTAG_OK: return exit_ok;
    case SEQTAG_ERR_INVALID_ARGUMENT:
    case SEQTAG_ERR_UNKNOWN_KEY: return exit_usage;
    case SEQTAG_ERR_GRADIENT_BLOWUP:
    case SEQTAG_ERR_NUMERIC: return exit_numeric;
    default: return exit_data;
    }
}

struct Failure {
    int code;
};

void check(seqtag_status status) {
    if (status == SEQTAG_OK) return;
    std::cerr << "seqtag: " << seqtag_status_name(status) << ": " << seqtag_last_error() << '\n';
    throw Failure{exit_code_for(status)};
}

struct ConfigHandle {
    seqtag_config* ptr = nullptr;
    ConfigHandle() { check(seqtag_config_create(&ptr)); }
    ~ConfigHandle() { seqtag_config_destroy(ptr); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
};

struct VocabHandle {
    seqtag_vocab* ptr = nullptr;
    ~VocabHandle() { seqtag_vocab_destroy(ptr); }
};

struct ModelHandle {
    seqtag_model* ptr = nullptr;
    ~ModelHandle() { seqtag_model_destroy(ptr); }
};

// Flags shared by every subcommand that map onto configuration keys.
struct RunFlags {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> sets;
    bool suffix2 = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value configuration file");
        auto value_flag = [&](const char* flag, const char* key, const char* help) {
            cmd->add_option_function<std::string>(
                flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
        };
        value_flag("--seed", "seed", "random seed");
        value_flag("--lr", "lr", "constant learning rate");
        value_flag("--hidden", "hidden", "hidden units per direction");
        value_flag("--embed-dim", "embed_dim", "embedding dimension");
        value_flag("--epochs", "epochs", "maximum training epochs");
        value_flag("--patience", "patience", "early-stopping patience (0 disables)");
        value_flag("--emb-init", "emb_init", "embedding file used to initialize W1");
        value_flag("--replace-rate", "replace_rate", "corruption replacement probability");
        value_flag("--max-common", "max_common", "number of most frequent words kept in a vocabulary");
        cmd->add_flag("--suffix2", suffix2, "append the two-character suffix feature");
        cmd->add_option("--set", sets, "additional key=value override (repeatable)");
    }

    void apply(ConfigHandle& cfg, const std::string& command) const {
        if (!config_path.empty()) check(seqtag_config_load_file(cfg.ptr, config_path.c_str()));
        for (const auto& kv : sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "seqtag: --set expects key=value, got '" << kv << "'\n";
                throw Failure{exit_usage};
            }
            check(seqtag_config_set(cfg.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
        }
        for (const auto& [k, v] : overrides) check(seqtag_config_set(cfg.ptr, k.c_str(), v.c_str()));
        if (suffix2) check(seqtag_config_set(cfg.ptr, "suffix2", "true"));
        std::cerr << "seqtag " << command << ": seed=" << seqtag_config_get(cfg.ptr, "seed")
                  << " config: " << seqtag_config_describe(cfg.ptr) << '\n';
    }
};

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
    std::vector<const char*> out;
    for (const auto& s : v) out.push_back(s.c_str());
    return out;
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seqtag: bidirectional LSTM sequence tagger"};
    app.require_subcommand(1);
    app.set_version_flag("--version", seqtag_version());

    RunFlags flags;
    std::string out_path, train_path, dev_path, test_path, vocab_path, history_path;
    std::string model_path, input_path = "-", data_path, corpus_path;
    std::vector<std::string> tagged_paths, plain_paths, variants;
    std::vector<std::size_t> sizes;
    double threshold = 1e-4;

    auto* build_vocab = app.add_subcommand("build-vocab", "build a vocabulary file");
    flags.attach(build_vocab);
    build_vocab->add_option("--tagged", tagged_paths, "tagged corpus whose words are always kept");
    build_vocab->add_option("--plain", plain_paths, "plain corpus for the frequency ranking");
    build_vocab->add_option("--out", out_path, "vocabulary file")->required();

    auto* pretrain = app.add_subcommand("pretrain", "train embeddings by corrupted-word detection");
    flags.attach(pretrain);
    pretrain->add_option("--corpus", corpus_path, "plain corpus, one sentence per line")->required();
    pretrain->add_option("--vocab", vocab_path, "vocabulary file");
    pretrain->add_option("--out", out_path, "embedding text file")->required();

    auto* train = app.add_subcommand("train", "train a tagger");
    flags.attach(train);
    train->add_option("--train", train_path, "tagged training corpus")->required();
    train->add_option("--dev", dev_path, "tagged development corpus");
    train->add_option("--vocab", vocab_path, "vocabulary file");
    train->add_option("--history", history_path, "per-epoch history CSV");
    train->add_option("--out", out_path, "model file")->required();

    auto* tag = app.add_subcommand("tag", "tag plain text");
    flags.attach(tag);
    tag->add_option("--model", model_path, "model file")->required();
    tag->add_option("--input", input_path, "plain text, '-' for stdin");
    tag->add_option("--out", out_path, "output, '-' for stdout");

    auto* eval = app.add_subcommand("eval", "token accuracy on a tagged corpus");
    flags.attach(eval);
    eval->add_option("--model", model_path, "model file")->required();
    eval->add_option("--data", data_path, "tagged corpus")->required();

    auto* sweep = app.add_subcommand("sweep", "hidden-size sweep");
    flags.attach(sweep);
    sweep->add_option("--train", train_path, "tagged training corpus")->required();
    sweep->add_option("--dev", dev_path, "tagged development corpus");
    sweep->add_option("--sizes", sizes, "hidden sizes")->delimiter(',')->required();
    sweep->add_option("--out", out_path, "CSV output, '-' for stdout");

    auto* ablate = app.add_subcommand("ablate", "compare baseline / we / suffix2 variants");
    flags.attach(ablate);
    ablate->add_option("--train", train_path, "tagged training corpus")->required();
    ablate->add_option("--dev", dev_path, "tagged development corpus");
    ablate->add_option("--test", test_path, "tagged test corpus")->required();
    ablate->add_option("--variants", variants, "baseline,we,suffix2,we+suffix2")->delimiter(',');
    ablate->add_option("--out", out_path, "CSV output, '-' for stdout");

    auto* export_emb = app.add_subcommand("export-emb", "write a model's embedding table");
    flags.attach(export_emb);
    export_emb->add_option("--model", model_path, "model file")->required();
    export_emb->add_option("--out", out_path, "embedding text file")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check on a tiny model");
    flags.attach(gradcheck);
    gradcheck->add_option("--threshold", threshold, "maximum accepted relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        ConfigHandle cfg;
        CLI::App* cmd = app.get_subcommands().front();
        flags.apply(cfg, cmd->get_name());
        if (out_path.empty()) out_path = "-";

        if (cmd == build_vocab) {
            auto t = c_strings(tagged_paths);
            auto p = c_strings(plain_paths);
            VocabHandle vocab;
            check(seqtag_vocab_build(cfg.ptr, t.data(), t.size(), p.data(), p.size(), &vocab.ptr));
            check(seqtag_vocab_save(vocab.ptr, out_path.c_str()));
            std::cerr << "vocabulary size " << seqtag_vocab_size(vocab.ptr) << '\n';
        } else if (cmd == pretrain) {
            VocabHandle vocab;
            if (!vocab_path.empty()) check(seqtag_vocab_load(vocab_path.c_str(), &vocab.ptr));
            double nll = 0.0;
            check(seqtag_pretrain(cfg.ptr, corpus_path.c_str(), vocab.ptr, out_path.c_str(), &nll));
            std::cerr << "final corruption NLL per token " << nll << '\n';
        } else if (cmd == train) {
            VocabHandle vocab;
            if (!vocab_path.empty()) check(seqtag_vocab_load(vocab_path.c_str(), &vocab.ptr));
            ModelHandle model;
            check(seqtag_train(cfg.ptr, train_path.c_str(), or_null(dev_path), vocab.ptr, or_null(history_path),
                               &model.ptr));
            check(seqtag_model_save(model.ptr, out_path.c_str()));
        } else if (cmd == tag) {
            ModelHandle model;
            check(seqtag_model_load(model_path.c_str(), &model.ptr));
            check(seqtag_model_tag_file(model.ptr, input_path.c_str(), out_path.c_str()));
        } else if (cmd == eval) {
            ModelHandle model;
            check(seqtag_model_load(model_path.c_str(), &model.ptr));
            seqtag_eval result{};
            check(seqtag_model_evaluate(model.ptr, data_path.c_str(), &result));
            std::printf("accuracy=%.9g tokens=%zu correct=%zu\n", result.accuracy, result.tokens, result.correct);
        } else if (cmd == sweep) {
            check(seqtag_sweep(cfg.ptr, sizes.data(), sizes.size(), train_path.c_str(), or_null(dev_path),
                               out_path.c_str()));
        } else if (cmd == ablate) {
            if (variants.empty()) variants = {"baseline", "we", "suffix2", "we+suffix2"};
            auto v = c_strings(variants);
            check(seqtag_ablate(cfg.ptr, v.data(), v.size(), train_path.c_str(), or_null(dev_path),
                                test_path.c_str(), out_path.c_str()));
        } else if (cmd == export_emb) {
            ModelHandle model;
            check(seqtag_model_load(model_path.c_str(), &model.ptr));
            check(seqtag_model_export_embeddings(model.ptr, out_path.c_str()));
        } else if (cmd == gradcheck) {
            const std::uint64_t seed = std::stoull(seqtag_config_get(cfg.ptr, "seed"));
            double error = 0.0;
            check(seqtag_gradcheck(seed, &error));
            std::printf("max_relative_error=%.6e threshold=%.1e\n", error, threshold);
            if (!(error < threshold)) return exit_numeric;
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return exit_ok;
}
