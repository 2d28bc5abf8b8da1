// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "corpus_files.hpp"
#include "files.hpp"
#include "seqtag/embeddings.hpp"
#include "seqtag/error.hpp"
#include "seqtag/model.hpp"
#include "seqtag/pretrain.hpp"
#include "seqtag/train.hpp"
#include "synthetic.hpp"

using namespace seqtag;
using testfiles::ScratchDir;

namespace {

const std::string cli = SEQTAG_CLI_PATH;
const std::string readme = SEQTAG_README_PATH;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome gradient_correctness() {
    const auto t0 = Clock::now();
    TinyGradCheckOptions opts;  // vocab 20, embed 8, H 6, 4 tags, length 5, eps 1e-5, seed 7
    auto r = tiny_gradient_check(opts);

    // every trainable scalar except untouched embedding rows
    std::size_t expected = 0;
    {
        std::vector<std::string> words, tags;
        for (std::size_t i = 1; i < opts.vocab_size; ++i) words.push_back("w" + std::to_string(i));
        for (std::size_t i = 0; i < opts.tag_count; ++i) tags.push_back("T" + std::to_string(i));
        ExtraFeatureSpec spec;
        spec.use_suffix = true;
        spec.suffix_alphabet = {"ed", "ly", "ng"};
        TaggerModel m(Vocabulary(words), TagSet(tags), spec, {opts.embed_dim, opts.hidden_size, true});
        for (const Parameter* p : std::as_const(m).parameters()) expected += p->value.size();
    }
    const double secs = seconds_since(t0);
    const bool pass = r.max_relative_error < 1e-4 && r.checked == expected && secs < 60.0;
    return {pass, fmt("max relative error %.3e (< 1e-4) over %zu/%zu scalars, worst %s, %.2fs (< 60s)",
                      r.max_relative_error, r.checked, expected, r.worst_parameter.c_str(), secs)};
}

Outcome overfit_capacity() {
    const auto t0 = Clock::now();
    auto train = synthetic::overfit_corpus(100, 3);
    WordCounts counts;
    for (const auto& s : train) counts.add_sentence(s.tokens);
    const std::size_t vocab = counts.counts().size();
    const std::size_t tags = TagSet::from_corpus(train).size();

    TrainConfig cfg;
    cfg.hidden_size = 16;
    cfg.embed_dim = 16;
    cfg.learning_rate = 0.05;
    cfg.max_epochs = 200;
    cfg.patience = 0;
    auto model = make_tagger(train, default_vocab(train), cfg);
    auto examples = encode_corpus(model, train);
    std::vector<std::size_t> order(examples.size());
    Rng shuffle_rng(cfg.seed);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t reached = 0;
    double acc = 0;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle(std::span(order), shuffle_rng);
        train_epoch(model, examples, order, {cfg.learning_rate, 0.0});
        acc = evaluate(model, examples).accuracy;
        if (acc >= 0.99) {
            reached = epoch;
            break;
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = reached > 0 && vocab <= 50 && tags == 5 && secs < 300.0;
    return {pass, fmt("train accuracy %.4f (>= 0.99) at epoch %zu (<= 200), vocab %zu, %zu tags, %.2fs (< 300s)", acc,
                      reached, vocab, tags, secs)};
}

Outcome contextual_disambiguation() {
    auto train = synthetic::context_corpus(500, 1);
    auto dev = synthetic::context_corpus(300, 2);
    TrainConfig cfg;
    cfg.hidden_size = 16;
    cfg.embed_dim = 16;
    cfg.learning_rate = 0.05;
    cfg.max_epochs = 30;
    cfg.patience = 5;
    auto r = train_tagger(train, dev, cfg);

    // per-word majority tag from the training data
    std::map<std::string, std::map<std::string, std::size_t>> seen;
    for (const auto& s : train)
        for (std::size_t i = 0; i < s.tokens.size(); ++i) ++seen[s.tokens[i]][s.tags[i]];
    std::map<std::string, std::string> majority;
    for (const auto& [w, tags] : seen)
        majority[w] = std::max_element(tags.begin(), tags.end(), [](auto& a, auto& b) { return a.second < b.second; })
                          ->first;

    std::size_t amb = 0, blstm = 0, base = 0;
    for (const auto& s : dev) {
        auto pred = predict_tags(r.model, encode(s.tokens, r.model.vocab(), r.model.features()));
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (s.tokens[i] != "amb") continue;
            ++amb;
            blstm += r.model.tags().tag(pred[i]) == s.tags[i];
            base += majority["amb"] == s.tags[i];
        }
    }
    const double a = static_cast<double>(blstm) / amb, b = static_cast<double>(base) / amb;
    return {amb > 0 && a >= 0.95 && b <= 0.60,
            fmt("ambiguous positions %zu: BLSTM %.4f (>= 0.95), per-word majority %.4f (<= 0.60)", amb, a, b)};
}

Outcome pretraining_benefit() {
    const auto t0 = Clock::now();
    ScratchDir dir("accept4");
    synthetic::ClassLanguage lang({6, 60, 150, 300}, 0.7);
    Rng data(2024);
    auto unlabeled = lang.plain_corpus(10000, data);
    auto train = lang.tagged_corpus(200, data);
    auto dev = lang.tagged_corpus(500, data);

    // one vocabulary for both arms: the unlabeled corpus plus every training word
    WordCounts counts;
    for (const auto& s : unlabeled) counts.add_sentence(s);
    std::vector<std::string> must;
    for (const auto& s : train) must.insert(must.end(), s.tokens.begin(), s.tokens.end());
    auto vocab = build_vocab(counts, 100000, must);

    TrainConfig net;
    net.embed_dim = 16;
    net.hidden_size = 16;
    net.learning_rate = 0.05;
    net.max_epochs = 5;
    auto pre = pretrain(unlabeled, vocab, net, {});
    const auto emb_path = dir.file("emb.txt");
    export_embeddings(pre.embeddings, emb_path);
    auto external = import_embeddings(emb_path);

    std::vector<int> labels;
    for (std::size_t id = 1; id < vocab.size(); ++id) labels.push_back(synthetic::ClassLanguage::class_of(vocab.word(id)));
    const auto& vectors = pre.embeddings.vectors;
    auto cos = synthetic::cosine_stats(labels, [&](std::size_t i) { return vectors.row(i + 1); });

    double random_mean = 0, pretrained_mean = 0;
    std::string per_seed;
    for (std::uint64_t seed : {1, 2, 3}) {
        TrainConfig cfg = net;
        cfg.max_epochs = 30;
        cfg.patience = 5;
        cfg.seed = seed;
        auto rnd = train_tagger(make_tagger(train, vocab, cfg), train, dev, cfg);
        auto pt = train_tagger(make_tagger(train, vocab, cfg, &external), train, dev, cfg);
        random_mean += rnd.best_dev_accuracy / 3;
        pretrained_mean += pt.best_dev_accuracy / 3;
        per_seed += fmt(" %.4f/%.4f", rnd.best_dev_accuracy, pt.best_dev_accuracy);
    }
    const bool pass = pretrained_mean >= random_mean && cos.within > cos.across;
    return {pass, fmt("mean dev accuracy pretrained %.4f >= random %.4f (per seed random/pretrained:%s); "
                      "cosine within %.4f > across %.4f; %.1fs",
                      pretrained_mean, random_mean, per_seed.c_str(), cos.within, cos.across, seconds_since(t0))};
}

Outcome corruption_statistics() {
    synthetic::ClassLanguage lang({6, 60, 150, 300}, 0.7);
    Rng data(5);
    auto corpus = lang.plain_corpus(2000, data);
    WordCounts counts;
    for (const auto& s : corpus) counts.add_sentence(s);
    auto vocab = build_vocab(counts, 100000);
    CorruptionConfig cfg;  // replace_rate 0.2
    Rng rng(cfg.seed);
    std::size_t positions = 0, replaced = 0, unchanged_replacements = 0, mislabeled = 0;
    for (const auto& s : corpus) {
        auto c = corrupt(s, vocab, cfg, rng);
        for (std::size_t i = 0; i < s.size(); ++i) {
            ++positions;
            if (c.labels[i] == label_incorrect) {
                ++replaced;
                unchanged_replacements += c.tokens[i] == s[i];
            } else {
                mislabeled += c.tokens[i] != s[i];
            }
        }
    }
    const double rate = static_cast<double>(replaced) / positions;
    const bool pass = positions >= 10000 && rate >= 0.18 && rate <= 0.22 && unchanged_replacements == 0 && mislabeled == 0;
    return {pass, fmt("%zu positions, replaced fraction %.4f in [0.18, 0.22], label-0 tokens equal to original: %zu, "
                      "changed tokens labelled 1: %zu",
                      positions, rate, unchanged_replacements, mislabeled)};
}

Outcome out_of_scope_documented() {
    const auto text = testfiles::read_text(readme);
    const bool numbers = text.find("97.26") != std::string::npos && text.find("97.40") != std::string::npos;
    const bool scope = text.find("out of scope") != std::string::npos;
    return {numbers && scope, fmt("README %s the 97.26/97.40 WSJ results and marks them out of scope",
                                  numbers && scope ? "names" : "does not document")};
}

Outcome determinism() {
    ScratchDir dir("accept7");
    testfiles::write_tagged(dir.file("train.tsv"), synthetic::context_corpus(200, 11));
    testfiles::write_tagged(dir.file("dev.tsv"), synthetic::context_corpus(50, 12));
    testfiles::write_text(dir.file("run.cfg"), "hidden = 12\nembed_dim = 12\nepochs = 5\nlr = 0.05\nseed = 17\n");
    std::string outputs[2];
    int codes[2];
    for (int i = 0; i < 2; ++i) {
        const auto out = dir.file("model" + std::to_string(i) + ".bin");
        codes[i] = testfiles::run(cli + " train --config " + quote(dir.file("run.cfg")) + " --train " +
                                  quote(dir.file("train.tsv")) + " --dev " + quote(dir.file("dev.tsv")) + " --out " +
                                  quote(out))
                       .exit_code;
        outputs[i] = testfiles::read_text(out);
    }
    const bool pass = codes[0] == 0 && codes[1] == 0 && !outputs[0].empty() && outputs[0] == outputs[1];
    return {pass, fmt("two CLI train runs: exit %d/%d, %zu and %zu bytes, %s", codes[0], codes[1], outputs[0].size(),
                      outputs[1].size(), outputs[0] == outputs[1] ? "identical" : "DIFFERENT")};
}

Outcome format_round_trips() {
    std::string detail;
    bool pass = true;

    // model container
    auto train = synthetic::overfit_corpus(20, 4);
    TrainConfig cfg;
    cfg.hidden_size = 6;
    cfg.embed_dim = 5;
    cfg.max_epochs = 2;
    cfg.suffix2 = true;
    auto model = train_tagger(train, {}, cfg).model;
    std::stringstream first;
    save_model(model, first);
    auto loaded = load_model(first);
    std::stringstream second;
    save_model(loaded, second);
    bool values_equal = true;
    auto pa = std::as_const(model).parameters(), pb = std::as_const(loaded).parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) values_equal &= pa[i]->value == pb[i]->value;
    const bool model_ok = first.str() == second.str() && values_equal && loaded.vocab() == model.vocab();
    pass &= model_ok;
    detail += model_ok ? "model bitwise equal" : "model MISMATCH";

    // embeddings
    EmbeddingTable table{model.vocab(), model.embeddings.value};
    std::stringstream emb;
    export_embeddings(table, emb);
    auto map = import_embeddings(emb);
    double worst = 0;
    bool words_ok = map.words() == table.vocab.words();
    for (std::size_t r = 0; r < table.vocab.size() && words_ok; ++r) {
        const Vector* v = map.find(table.vocab.word(r));
        for (std::size_t c = 0; c < v->size(); ++c) worst = std::max(worst, std::abs((*v)[c] - table.vectors(r, c)));
    }
    const bool emb_ok = words_ok && worst <= 1e-6;
    pass &= emb_ok;
    detail += fmt("; embeddings max |diff| %.1e (<= 1e-6)", worst);

    // reader line numbers
    struct Case {
        const char* text;
        std::size_t line;
    };
    const Case cases[] = {{"dogs NNS\n", 1}, {"a\tDT\nb\tNN\n\nc\tX\ty\n", 4}, {"# c\na\tDT\n\tNN\n", 3}, {"a\tDT\nb\n", 2}};
    std::size_t ok = 0;
    for (const auto& c : cases) {
        std::istringstream in(c.text);
        try {
            read_tagged_corpus(in);
        } catch (const Error& e) {
            ok += e.code() == ErrorCode::format &&
                  std::string(e.what()).find("line " + std::to_string(c.line) + ":") != std::string::npos;
        }
    }
    pass &= ok == std::size(cases);
    detail += fmt("; malformed lines reported correctly %zu/%zu", ok, std::size(cases));
    return {pass, detail};
}

Outcome sweep_harness() {
    ScratchDir dir("accept9");
    synthetic::ClassLanguage lang({6, 20, 40, 80}, 0.7);
    Rng data(7);
    testfiles::write_tagged(dir.file("train.tsv"), lang.tagged_corpus(200, data));
    testfiles::write_tagged(dir.file("dev.tsv"), lang.tagged_corpus(200, data));
    const auto csv = dir.file("sweep.csv");
    auto r = testfiles::run(cli + " sweep --train " + quote(dir.file("train.tsv")) + " --dev " +
                            quote(dir.file("dev.tsv")) + " --sizes 4,16,64 --embed-dim 16 --lr 0.05 --epochs 20" +
                            " --patience 3 --out " + quote(csv));

    std::istringstream in(testfiles::read_text(csv));
    std::string line;
    std::getline(in, line);
    const bool header = line == "hidden_size,dev_accuracy,train_seconds,best_epoch";
    std::map<std::size_t, double> acc;
    std::size_t records = 0, well_formed = 0;
    while (std::getline(in, line)) {
        ++records;
        std::vector<std::string> cols;
        std::istringstream fields(line);
        std::string f;
        while (std::getline(fields, f, ',')) cols.push_back(f);
        if (cols.size() != 4) continue;
        try {
            const double a = std::stod(cols[1]);
            if (a < 0.0 || a > 1.0) continue;
            acc[std::stoul(cols[0])] = a;
            ++well_formed;
        } catch (const std::exception&) {
        }
    }
    const bool pass = r.exit_code == 0 && header && records == 3 && well_formed == 3 && acc.count(4) && acc.count(64) &&
                      acc[64] >= acc[4] - 0.02;
    return {pass, fmt("exit %d, %zu records (%zu well formed), accuracy H=4 %.4f, H=16 %.4f, H=64 %.4f "
                      "(need H=64 >= H=4 - 0.02)",
                      r.exit_code, records, well_formed, acc[4], acc[16], acc[64])};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 gradient correctness", gradient_correctness},
        {"2 overfit capacity", overfit_capacity},
        {"3 contextual disambiguation", contextual_disambiguation},
        {"4 pretraining benefit", pretraining_benefit},
        {"5 corruption statistics", corruption_statistics},
        {"6 WSJ reproduction out of scope", out_of_scope_documented},
        {"7 determinism", determinism},
        {"8 format round trips", format_round_trips},
        {"9 sweep harness", sweep_harness},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
