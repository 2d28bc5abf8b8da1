#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "reference_blstm.hpp"
#include "seqtag/error.hpp"
#include "seqtag/model.hpp"

using namespace seqtag;

namespace {

struct Tiny {
    TaggerModel model;
    EncodedSentence sentence;
    std::vector<std::size_t> gold;
};

ExtraFeatureSpec tiny_spec() {
    ExtraFeatureSpec spec;
    spec.use_suffix = true;
    spec.suffix_alphabet = {"ed", "ly", "ng"};
    return spec;
}

TaggerModel make_model(std::size_t vocab, std::size_t tags, std::size_t E, std::size_t H, bool peep) {
    std::vector<std::string> words, tag_names;
    for (std::size_t i = 1; i < vocab; ++i) words.push_back("w" + std::to_string(i));
    for (std::size_t i = 0; i < tags; ++i) tag_names.push_back("T" + std::to_string(i));
    return TaggerModel(Vocabulary(words), TagSet(tag_names), tiny_spec(), {E, H, peep});
}

Tiny make_tiny(std::uint64_t seed, std::size_t length = 5, bool peep = true, double scale = 0.1) {
    Rng rng(seed);
    Tiny t{make_model(20, 4, 8, 6, peep), {}, {}};
    for (Parameter* p : t.model.parameters()) uniform_fill(p->value, -scale, scale, rng);
    const auto spec = t.model.features();
    t.sentence.feature_dim = spec.dimension();
    for (std::size_t i = 0; i < length; ++i) {
        t.sentence.word_ids.push_back(rng.uniform_index(20));
        SparseFeature f;
        f.set(rng.uniform_index(3));
        f.set(spec.suffix_offset() + rng.uniform_index(4));
        t.sentence.features.push_back(f);
        t.gold.push_back(rng.uniform_index(4));
    }
    return t;
}

// Fourth-order central difference of the long double reference loss.
long double reference_derivative(Tiny& t, double& slot) {
    const double h = 1e-4;
    const double saved = slot;
    auto at = [&](double delta) {
        slot = saved + delta;
        return reference::nll(t.model, t.sentence, t.gold);
    };
    const long double d = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0L * h);
    slot = saved;
    return d;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::numeric;
}

}  // namespace

TEST_CASE("input_vector matches the dense one-hot product") {
    auto t = make_tiny(3);
    for (std::size_t i = 0; i < t.sentence.size(); ++i) {
        auto fast = input_vector(t.model, t.sentence.word_ids[i], t.sentence.features[i]);
        auto ref = reference::input(t.model, t.sentence.word_ids[i], t.sentence.features[i]);
        REQUIRE(fast.size() == ref.size());
        for (std::size_t e = 0; e < fast.size(); ++e) CHECK(std::abs(fast[e] - (double)ref[e]) < 1e-15);
    }
}

TEST_CASE("zero weights: gates at one half, candidate zero") {
    LstmCellParams cell("c", 2, 3);
    std::vector<double> x{0.7, -1.2}, h{0.1, 0.2, 0.3}, c{1.0, -2.0, 0.5};
    auto s = lstm_cell_step(cell, x, h, c);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(s.input_gate[j] == 0.5);
        CHECK(s.forget_gate[j] == 0.5);
        CHECK(s.output_gate[j] == 0.5);
        CHECK(s.candidate[j] == 0.0);
        CHECK(s.c[j] == 0.5 * c[j]);
        CHECK(s.h[j] == doctest::Approx(0.5 * std::tanh(0.5 * c[j])).epsilon(1e-15));
    }
}

TEST_CASE("saturated forget gate carries the cell") {
    LstmCellParams cell("c", 2, 2);
    cell.biases[gate_forget].value.fill(50.0);
    cell.biases[gate_input].value.fill(-50.0);
    Rng rng(4);
    for (auto& w : cell.input_weights) uniform_fill(w.value, -0.1, 0.1, rng);
    std::vector<double> x{0.3, 0.4}, h{0.0, 0.5}, c{0.8, -0.3};
    auto s = lstm_cell_step(cell, x, h, c);
    CHECK(std::abs(s.c[0] - c[0]) < 1e-12);
    CHECK(std::abs(s.c[1] - c[1]) < 1e-12);
}

TEST_CASE("scalar cell against a hand expansion") {
    LstmCellParams cell("c", 1, 1);
    // x*Wx + h*Wh + b, peepholes on i, f (previous cell) and o (new cell)
    const double wx[4] = {0.5, -0.4, 0.3, 0.8}, wh[4] = {0.2, 0.1, -0.6, 0.7}, b[4] = {0.1, 0.2, -0.1, 0.05};
    const double peep[3] = {0.3, -0.2, 0.4};
    for (int g = 0; g < 4; ++g) {
        cell.input_weights[g].value(0, 0) = wx[g];
        cell.recurrent_weights[g].value(0, 0) = wh[g];
        cell.biases[g].value(0, 0) = b[g];
    }
    for (int p = 0; p < 3; ++p) cell.peepholes[p].value(0, 0) = peep[p];
    const double x = 1.5, hp = -0.25, cp = 0.6;
    auto sig = [](double v) { return 1 / (1 + std::exp(-v)); };
    const double i = sig(0.5 * x + 0.2 * hp + 0.1 + 0.3 * cp);
    const double f = sig(-0.4 * x + 0.1 * hp + 0.2 - 0.2 * cp);
    const double g = std::tanh(0.8 * x + 0.7 * hp + 0.05);
    const double c = f * cp + i * g;
    const double o = sig(0.3 * x - 0.6 * hp - 0.1 + 0.4 * c);
    std::vector<double> xv{x}, hv{hp}, cv{cp};
    auto s = lstm_cell_step(cell, xv, hv, cv);
    CHECK(s.c[0] == doctest::Approx(c).epsilon(1e-14));
    CHECK(s.h[0] == doctest::Approx(o * std::tanh(c)).epsilon(1e-14));

    auto nopeep = lstm_cell_step(cell, xv, hv, cv, false);
    const double i0 = sig(0.5 * x + 0.2 * hp + 0.1), f0 = sig(-0.4 * x + 0.1 * hp + 0.2);
    CHECK(nopeep.c[0] == doctest::Approx(f0 * cp + i0 * g).epsilon(1e-14));
}

TEST_CASE("forward pass matches the reference on random models") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        for (bool peep : {true, false}) {
            auto t = make_tiny(seed, 1 + seed * 2, peep, 0.5);
            auto trace = blstm_forward(t.model, t.sentence);
            auto ref = reference::probabilities(t.model, t.sentence);
            for (std::size_t i = 0; i < t.sentence.size(); ++i) {
                double sum = 0;
                for (std::size_t k = 0; k < 4; ++k) {
                    CHECK(std::abs(trace.probs(i, k) - (double)ref[i][k]) < 1e-12);
                    sum += trace.probs(i, k);
                }
                CHECK(std::abs(sum - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("length-one sentence sees the same state in both directions") {
    auto t = make_tiny(8, 1);
    t.model.backward_cell = t.model.forward_cell;
    auto trace = blstm_forward(t.model, t.sentence);
    for (std::size_t j = 0; j < 6; ++j) CHECK(trace.forward.hidden(0, j) == trace.backward.hidden(0, j));
}

TEST_CASE("reversing the sentence swaps the directions when cells are shared") {
    auto t = make_tiny(9, 7, true, 0.4);
    t.model.backward_cell = t.model.forward_cell;
    auto a = blstm_forward(t.model, t.sentence);
    EncodedSentence rev = t.sentence;
    std::reverse(rev.word_ids.begin(), rev.word_ids.end());
    std::reverse(rev.features.begin(), rev.features.end());
    auto b = blstm_forward(t.model, rev);
    const std::size_t n = t.sentence.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(std::abs(a.forward.hidden(i, j) - b.backward.hidden(n - 1 - i, j)) < 1e-12);
            CHECK(std::abs(a.backward.hidden(i, j) - b.forward.hidden(n - 1 - i, j)) < 1e-12);
        }
}

TEST_CASE("empty sentence is rejected") {
    auto m = make_model(5, 2, 3, 2, true);
    EncodedSentence empty;
    empty.feature_dim = m.features().dimension();
    CHECK(code_of([&] { blstm_forward(m, empty); }) == ErrorCode::empty_input);
}

TEST_CASE("uniform output gives n log m") {
    auto m = make_model(5, 4, 3, 2, true);
    EncodedSentence s;
    s.feature_dim = m.features().dimension();
    s.word_ids = {1, 2, 3};
    s.features.resize(3);
    std::vector<std::size_t> gold{0, 3, 1};
    CHECK(sentence_nll(m, s, gold).loss == doctest::Approx(3 * std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("nll is minus the log of the product of gold probabilities") {
    auto t = make_tiny(12, 6, true, 0.8);
    auto r = sentence_nll(t.model, t.sentence, t.gold);
    double product = 1.0;
    for (std::size_t i = 0; i < t.gold.size(); ++i) product *= r.trace.probs(i, t.gold[i]);
    CHECK(r.loss == doctest::Approx(-std::log(product)).epsilon(1e-12));
    CHECK(r.loss >= 0.0);
    CHECK(std::abs(r.loss - (double)reference::nll(t.model, t.sentence, t.gold)) < 1e-12);
}

TEST_CASE("only the embedding rows of the sentence receive gradient") {
    auto t = make_tiny(2, 4);
    t.sentence.word_ids = {2, 5, 2, 5};
    t.model.zero_grad();
    auto r = sentence_nll(t.model, t.sentence, t.gold);
    backward(t.model, r.trace, t.gold);
    std::set<std::size_t> touched(t.model.embeddings.touched_rows.begin(), t.model.embeddings.touched_rows.end());
    CHECK(touched == std::set<std::size_t>{2, 5});
    const auto& g = t.model.embeddings.grad;
    for (std::size_t row = 0; row < g.rows(); ++row) {
        double norm = 0;
        for (double v : g.row(row)) norm += std::abs(v);
        if (row == 2 || row == 5)
            CHECK(norm > 0.0);
        else
            CHECK(norm == 0.0);
    }
}

TEST_CASE("a certain prediction produces zero gradient") {
    auto t = make_tiny(6, 3);
    std::fill(t.gold.begin(), t.gold.end(), 1);
    t.model.output_bias.value(0, 1) = 1000.0;
    t.model.zero_grad();
    auto r = sentence_nll(t.model, t.sentence, t.gold);
    CHECK(r.loss == 0.0);
    backward(t.model, r.trace, t.gold);
    for (const Parameter* p : std::as_const(t.model).parameters())
        for (double v : p->grad.values()) CHECK(v == 0.0);
}

TEST_CASE("argmax breaks ties toward the lowest id") {
    CHECK(argmax(std::vector<double>{0.3, 0.3, 0.4}) == 2);
    CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
    CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
}

TEST_CASE("predictions are the argmax of the reference distribution") {
    auto t = make_tiny(21, 9, true, 0.7);
    auto pred = predict_tags(t.model, t.sentence);
    auto ref = reference::probabilities(t.model, t.sentence);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 4; ++k)
            if (ref[i][k] > ref[i][best]) best = k;
        CHECK(pred[i] == best);
    }
}

TEST_CASE("peephole parameters are excluded when disabled") {
    auto with = make_model(5, 2, 3, 2, true);
    auto without = make_model(5, 2, 3, 2, false);
    CHECK(with.parameters().size() == without.parameters().size() + 6);
    for (const Parameter* p : std::as_const(without).parameters()) CHECK(p->name.find("peep") == std::string::npos);
}

TEST_CASE("built-in tiny gradient check, seed 7") {
    auto r = tiny_gradient_check({});
    CHECK(r.checked > 0);
    CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("analytic gradients agree with the extended-precision reference") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        for (bool peep : {true, false}) {
            CAPTURE(seed);
            CAPTURE(peep);
            auto t = make_tiny(seed, 5, peep);
            t.model.zero_grad();
            auto r = sentence_nll(t.model, t.sentence, t.gold);
            backward(t.model, r.trace, t.gold);
            double worst = 0.0;
            std::string where;
            for (Parameter* p : t.model.parameters()) {
                for (std::size_t k = 0; k < p->value.size(); ++k) {
                    const double a = p->grad.values()[k];
                    const double n = (double)reference_derivative(t, p->value.values()[k]);
                    const double rel = std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n));
                    if (rel > worst) {
                        worst = rel;
                        where = p->name;
                    }
                }
            }
            CAPTURE(where);
            CHECK(worst < 1e-4);
        }
    }
}

TEST_CASE("model container round trip is exact") {
    auto t = make_tiny(30, 4, true, 0.3);
    std::stringstream first;
    save_model(t.model, first);
    const std::string bytes = first.str();
    std::istringstream in(bytes);
    auto loaded = load_model(in);
    CHECK(loaded.vocab() == t.model.vocab());
    CHECK(loaded.tags() == t.model.tags());
    CHECK(loaded.features() == t.model.features());
    auto pa = std::as_const(t.model).parameters();
    auto pb = std::as_const(loaded).parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
    CHECK(predict_tags(loaded, t.sentence) == predict_tags(t.model, t.sentence));
    std::stringstream second;
    save_model(loaded, second);
    CHECK(second.str() == bytes);
    CHECK(bytes.substr(0, 6) == "SEQTAG");
}

TEST_CASE("model container rejects damaged input") {
    auto t = make_tiny(31, 3);
    std::stringstream ss;
    save_model(t.model, ss);
    const std::string bytes = ss.str();
    auto load = [](const std::string& b) {
        std::istringstream in(b);
        return load_model(in);
    };

    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{9}, bytes.size() / 2, bytes.size() - 1})
        CHECK(code_of([&] { load(bytes.substr(0, cut)); }) == ErrorCode::truncated);

    std::string v99 = bytes;
    v99[6] = 99;
    v99[7] = v99[8] = v99[9] = 0;
    try {
        load(v99);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unsupported_version);
        CHECK(std::string(e.what()).find("99") != std::string::npos);
    }

    std::string magic = bytes;
    magic[0] = 'X';
    CHECK(code_of([&] { load(magic); }) == ErrorCode::bad_magic);

    // bump the stored row count of the embedding table
    std::string shape = bytes;
    const auto pos = shape.find("embeddings");
    REQUIRE(pos != std::string::npos);
    shape[pos + 10] += 1;
    CHECK(code_of([&] { load(shape); }) == ErrorCode::shape_mismatch);

    CHECK(code_of([&] { load(bytes + "x"); }) == ErrorCode::format);
}
