#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "seqtag/matrix.hpp"
#include "seqtag/nn.hpp"
#include "seqtag/rng.hpp"
#include "seqtag/text.hpp"

namespace seqtag {

enum Gate : std::size_t { gate_input = 0, gate_forget = 1, gate_output = 2, gate_cell = 3 };
inline constexpr std::size_t gate_count = 4;
inline constexpr std::size_t peephole_count = 3;  // input, forget, output

/// One LSTM direction with peephole connections:
///
///   i = sigmoid(x Wxi + h' Whi + pi * c' + bi)
///   f = sigmoid(x Wxf + h' Whf + pf * c' + bf)
///   g = tanh   (x Wxg + h' Whg + bg)
///   c = f * c' + i * g
///   o = sigmoid(x Wxo + h' Who + po * c + bo)
///   h = o * tanh(c)
///
/// where h', c' are the previous step's states. Weight matrices are stored
/// input-major (in_dim x H) so the pre-activations are row-vector products.
struct LstmCellParams {
    std::array<Parameter, gate_count> input_weights;      // in_dim x H
    std::array<Parameter, gate_count> recurrent_weights;  // H x H
    std::array<Parameter, gate_count> biases;             // 1 x H
    std::array<Parameter, peephole_count> peepholes;      // 1 x H

    LstmCellParams() = default;
    LstmCellParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden);

    std::size_t input_dim() const noexcept { return input_weights[0].value.rows(); }
    std::size_t hidden_size() const noexcept { return biases[0].value.cols(); }
};

struct LstmStep {
    Vector h, c;
    Vector input_gate, forget_gate, output_gate, candidate;
};

/// Single recurrence step; peepholes are ignored when `peepholes` is false.
LstmStep lstm_cell_step(const LstmCellParams& cell, std::span<const double> x,
                        std::span<const double> h_prev, std::span<const double> c_prev,
                        bool peepholes = true);

struct ModelShape {
    std::size_t embed_dim = 100;
    std::size_t hidden_size = 100;  // units per direction
    bool peepholes = true;
};

/// Embedding lookup + extra-feature projection, a bidirectional LSTM layer and
/// a softmax output over the tag set.
class TaggerModel {
public:
    /// All parameters start at zero; call initialize() for random weights.
    TaggerModel(Vocabulary vocab, TagSet tags, ExtraFeatureSpec features, ModelShape shape);

    /// Weights from U[-0.1, 0.1), output bias zero. Order: W1, W2, forward
    /// cell, backward cell, output weights.
    void initialize(Rng& rng);

    const Vocabulary& vocab() const noexcept { return vocab_; }
    const TagSet& tags() const noexcept { return tags_; }
    const ExtraFeatureSpec& features() const noexcept { return features_; }
    const ModelShape& shape() const noexcept { return shape_; }
    std::size_t tag_count() const noexcept { return tags_.size(); }

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    void zero_grad();

    Parameter embeddings;     // W1: |V| x E, row-sparse
    Parameter feature_proj;   // W2: F x E
    LstmCellParams forward_cell;
    LstmCellParams backward_cell;
    Parameter output_weights;  // 2H x m
    Parameter output_bias;     // 1 x m

private:
    Vocabulary vocab_;
    TagSet tags_;
    ExtraFeatureSpec features_;
    ModelShape shape_;
};

/// Per-direction activations, one row per time step (in sentence order).
struct DirectionTrace {
    Matrix input_gate, forget_gate, output_gate, candidate;
    Matrix cell, cell_tanh, hidden;
};

struct ForwardTrace {
    EncodedSentence input;
    Matrix inputs;  // n x E, the I_i vectors
    DirectionTrace forward;
    DirectionTrace backward;
    Matrix logits;  // n x m, pre-softmax
    Matrix probs;   // n x m

    std::size_t length() const noexcept { return input.size(); }
};

/// W1[word_id] + sum_k f_k W2[k]. Never materializes a one-hot vector.
Vector input_vector(const TaggerModel& model, std::size_t word_id, const SparseFeature& feature);

/// Throws empty_input for an empty sentence.
ForwardTrace blstm_forward(const TaggerModel& model, const EncodedSentence& encoded);

struct NllResult {
    double loss = 0.0;
    ForwardTrace trace;
};

/// -sum_i log max(P_i(y_i), 1e-300).
NllResult sentence_nll(const TaggerModel& model, const EncodedSentence& encoded,
                       std::span<const std::size_t> tag_ids);
double nll_from_trace(const ForwardTrace& trace, std::span<const std::size_t> tag_ids);

/// Accumulates d(loss)/d(theta) into every parameter's grad. Only the W1 rows
/// of words in the sentence receive gradient.
void backward(TaggerModel& model, const ForwardTrace& trace, std::span<const std::size_t> tag_ids);

/// Independent per-position argmax; ties go to the lowest tag id.
std::vector<std::size_t> predict_from_trace(const ForwardTrace& trace);
std::vector<std::size_t> predict_tags(const TaggerModel& model, const EncodedSentence& encoded);
std::size_t argmax(std::span<const double> values);

// ---------------------------------------------------------------------------
// Model container: see model_io.cpp for the byte layout.

inline constexpr std::uint32_t model_format_version = 1;

void save_model(const TaggerModel& model, std::ostream& out);
void save_model(const TaggerModel& model, const std::string& path);
TaggerModel load_model(std::istream& in);
TaggerModel load_model(const std::string& path);

// ---------------------------------------------------------------------------

struct TinyGradCheckOptions {
    std::uint64_t seed = 7;
    std::size_t vocab_size = 20;
    std::size_t embed_dim = 8;
    std::size_t hidden_size = 6;
    std::size_t tag_count = 4;
    std::size_t length = 5;
    double eps = 1e-5;
    bool peepholes = true;
    /// Weights are drawn from U[-init_scale, init_scale).
    double init_scale = 0.1;
};

/// Builds a seeded tiny model with case + suffix features and a random
/// sentence, then checks the sentence NLL gradients of every parameter.
GradCheckResult tiny_gradient_check(const TinyGradCheckOptions& options);

}  // namespace seqtag
