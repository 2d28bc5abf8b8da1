#include "seqtag/model.hpp"

#include <algorithm>
#include <cmath>

#include "seqtag/error.hpp"

namespace seqtag {

namespace {

constexpr double init_range = 0.1;
constexpr double log_floor = 1e-300;

const char* const gate_names[gate_count] = {"input", "forget", "output", "cell"};

DirectionTrace make_direction_trace(std::size_t n, std::size_t hidden) {
    DirectionTrace t;
    for (Matrix* m : {&t.input_gate, &t.forget_gate, &t.output_gate, &t.candidate, &t.cell,
                      &t.cell_tanh, &t.hidden})
        *m = Matrix(n, hidden);
    return t;
}

struct StepOut {
    std::span<double> i, f, o, g, c, tc, h;
};

void step_into(const LstmCellParams& cell, bool peepholes, std::span<const double> x,
               std::span<const double> h_prev, std::span<const double> c_prev, const StepOut& out) {
    const std::size_t hidden = cell.hidden_size();
    std::array<Vector, gate_count> pre;
    for (std::size_t gate = 0; gate < gate_count; ++gate) {
        auto bias = cell.biases[gate].value.row(0);
        pre[gate].assign(bias.begin(), bias.end());
        add_row_times(x, cell.input_weights[gate].value, pre[gate]);
        add_row_times(h_prev, cell.recurrent_weights[gate].value, pre[gate]);
    }
    for (std::size_t j = 0; j < hidden; ++j) {
        double ai = pre[gate_input][j];
        double af = pre[gate_forget][j];
        if (peepholes) {
            ai += cell.peepholes[gate_input].value(0, j) * c_prev[j];
            af += cell.peepholes[gate_forget].value(0, j) * c_prev[j];
        }
        out.i[j] = logistic(ai);
        out.f[j] = logistic(af);
        out.g[j] = std::tanh(pre[gate_cell][j]);
        out.c[j] = out.f[j] * c_prev[j] + out.i[j] * out.g[j];
        double ao = pre[gate_output][j];
        if (peepholes) ao += cell.peepholes[gate_output].value(0, j) * out.c[j];
        out.o[j] = logistic(ao);
        out.tc[j] = std::tanh(out.c[j]);
        out.h[j] = out.o[j] * out.tc[j];
    }
}

// Runs one direction over all positions. Rows of the trace stay in sentence
// order regardless of scan direction.
void scan(const LstmCellParams& cell, bool peepholes, const Matrix& inputs, bool reverse,
          DirectionTrace& tr) {
    const std::size_t n = inputs.rows();
    const std::size_t hidden = cell.hidden_size();
    const Vector zeros(hidden, 0.0);
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t t = reverse ? n - 1 - step : step;
        std::span<const double> h_prev = zeros, c_prev = zeros;
        if (step > 0) {
            const std::size_t p = reverse ? t + 1 : t - 1;
            h_prev = tr.hidden.row(p);
            c_prev = tr.cell.row(p);
        }
        step_into(cell, peepholes, inputs.row(t), h_prev, c_prev,
                  {tr.input_gate.row(t), tr.forget_gate.row(t), tr.output_gate.row(t),
                   tr.candidate.row(t), tr.cell.row(t), tr.cell_tanh.row(t), tr.hidden.row(t)});
    }
}

// BPTT for one direction. `dh_out` carries the output layer's gradient w.r.t.
// this direction's hidden states; input gradients are added to `dinputs`.
void backprop(LstmCellParams& cell, bool peepholes, const Matrix& inputs, const DirectionTrace& tr,
              const Matrix& dh_out, bool reverse, Matrix& dinputs) {
    const std::size_t n = inputs.rows();
    const std::size_t hidden = cell.hidden_size();
    const Vector zeros(hidden, 0.0);
    Vector dh_next(hidden, 0.0), dc_next(hidden, 0.0);
    std::array<Vector, gate_count> da;
    for (auto& v : da) v.assign(hidden, 0.0);
    Vector dc(hidden);

    for (std::size_t k = 0; k < n; ++k) {
        // walk the scan order backwards
        const std::size_t step = n - 1 - k;
        const std::size_t t = reverse ? n - 1 - step : step;
        std::span<const double> h_prev = zeros, c_prev = zeros;
        if (step > 0) {
            const std::size_t p = reverse ? t + 1 : t - 1;
            h_prev = tr.hidden.row(p);
            c_prev = tr.cell.row(p);
        }
        auto i = tr.input_gate.row(t), f = tr.forget_gate.row(t), o = tr.output_gate.row(t);
        auto g = tr.candidate.row(t), tc = tr.cell_tanh.row(t);
        auto dho = dh_out.row(t);

        for (std::size_t j = 0; j < hidden; ++j) {
            const double dh = dho[j] + dh_next[j];
            const double dao = dh * tc[j] * o[j] * (1.0 - o[j]);
            double dcj = dh * o[j] * (1.0 - tc[j] * tc[j]) + dc_next[j];
            if (peepholes) dcj += dao * cell.peepholes[gate_output].value(0, j);
            dc[j] = dcj;
            da[gate_output][j] = dao;
            da[gate_input][j] = dcj * g[j] * i[j] * (1.0 - i[j]);
            da[gate_forget][j] = dcj * c_prev[j] * f[j] * (1.0 - f[j]);
            da[gate_cell][j] = dcj * i[j] * (1.0 - g[j] * g[j]);
        }

        auto cur_c = tr.cell.row(t);
        for (std::size_t j = 0; j < hidden; ++j) {
            double dcp = dc[j] * f[j];
            if (peepholes) {
                dcp += da[gate_input][j] * cell.peepholes[gate_input].value(0, j);
                dcp += da[gate_forget][j] * cell.peepholes[gate_forget].value(0, j);
                cell.peepholes[gate_input].grad(0, j) += da[gate_input][j] * c_prev[j];
                cell.peepholes[gate_forget].grad(0, j) += da[gate_forget][j] * c_prev[j];
                cell.peepholes[gate_output].grad(0, j) += da[gate_output][j] * cur_c[j];
            }
            dc_next[j] = dcp;
        }

        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        auto dx = dinputs.row(t);
        for (std::size_t gate = 0; gate < gate_count; ++gate) {
            add_outer(cell.input_weights[gate].grad, inputs.row(t), da[gate]);
            add_outer(cell.recurrent_weights[gate].grad, h_prev, da[gate]);
            auto db = cell.biases[gate].grad.row(0);
            for (std::size_t j = 0; j < hidden; ++j) db[j] += da[gate][j];
            add_times_col(cell.input_weights[gate].value, da[gate], dx);
            add_times_col(cell.recurrent_weights[gate].value, da[gate], dh_next);
        }
    }
}

void check_tags(const TaggerModel& model, std::span<const std::size_t> tag_ids, std::size_t n) {
    if (tag_ids.size() != n)
        throw Error(ErrorCode::shape_mismatch, "tag sequence length does not match the sentence");
    for (std::size_t y : tag_ids) {
        if (y >= model.tag_count())
            throw Error(ErrorCode::unknown_tag, "tag id " + std::to_string(y) + " out of range");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

LstmCellParams::LstmCellParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden) {
    for (std::size_t gate = 0; gate < gate_count; ++gate) {
        const std::string g = gate_names[gate];
        input_weights[gate] = Parameter(prefix + ".wx_" + g, input_dim, hidden);
        recurrent_weights[gate] = Parameter(prefix + ".wh_" + g, hidden, hidden);
        biases[gate] = Parameter(prefix + ".b_" + g, 1, hidden);
    }
    for (std::size_t p = 0; p < peephole_count; ++p)
        peepholes[p] = Parameter(prefix + ".peep_" + std::string(gate_names[p]), 1, hidden);
}

LstmStep lstm_cell_step(const LstmCellParams& cell, std::span<const double> x,
                        std::span<const double> h_prev, std::span<const double> c_prev,
                        bool peepholes) {
    const std::size_t hidden = cell.hidden_size();
    require_size(x, cell.input_dim(), "lstm_cell_step x");
    require_size(h_prev, hidden, "lstm_cell_step h_prev");
    require_size(c_prev, hidden, "lstm_cell_step c_prev");
    LstmStep s;
    for (Vector* v : {&s.h, &s.c, &s.input_gate, &s.forget_gate, &s.output_gate, &s.candidate})
        v->assign(hidden, 0.0);
    Vector tc(hidden);
    step_into(cell, peepholes, x, h_prev, c_prev,
              {s.input_gate, s.forget_gate, s.output_gate, s.candidate, s.c, tc, s.h});
    return s;
}

TaggerModel::TaggerModel(Vocabulary vocab, TagSet tags, ExtraFeatureSpec features, ModelShape shape)
    : vocab_(std::move(vocab)), tags_(std::move(tags)), features_(std::move(features)), shape_(shape) {
    if (shape_.embed_dim == 0 || shape_.hidden_size == 0)
        throw Error(ErrorCode::invalid_argument, "embed_dim and hidden_size must be positive");
    if (tags_.size() == 0) throw Error(ErrorCode::invalid_argument, "tag set is empty");
    const std::size_t e = shape_.embed_dim, h = shape_.hidden_size;
    embeddings = Parameter("embeddings", vocab_.size(), e, /*row_sparse=*/true);
    feature_proj = Parameter("feature_proj", features_.dimension(), e);
    forward_cell = LstmCellParams("fwd", e, h);
    backward_cell = LstmCellParams("bwd", e, h);
    output_weights = Parameter("out.w", 2 * h, tags_.size());
    output_bias = Parameter("out.b", 1, tags_.size());
}

void TaggerModel::initialize(Rng& rng) {
    for (Parameter* p : parameters()) {
        if (p == &output_bias) {
            p->value.fill(0.0);
        } else if (p->value.size() > 0) {
            uniform_fill(p->value, -init_range, init_range, rng);
        }
    }
    if (!shape_.peepholes) {
        for (auto* cell : {&forward_cell, &backward_cell})
            for (auto& p : cell->peepholes) p.value.fill(0.0);
    }
}

namespace {

template <typename Cell, typename Out>
void append_cell(Cell& cell, bool peepholes, Out& out) {
    for (std::size_t g = 0; g < gate_count; ++g) {
        out.push_back(&cell.input_weights[g]);
        out.push_back(&cell.recurrent_weights[g]);
        out.push_back(&cell.biases[g]);
    }
    if (peepholes) {
        for (auto& p : cell.peepholes) out.push_back(&p);
    }
}

}  // namespace

std::vector<Parameter*> TaggerModel::parameters() {
    std::vector<Parameter*> out{&embeddings, &feature_proj};
    append_cell(forward_cell, shape_.peepholes, out);
    append_cell(backward_cell, shape_.peepholes, out);
    out.push_back(&output_weights);
    out.push_back(&output_bias);
    return out;
}

std::vector<const Parameter*> TaggerModel::parameters() const {
    auto mutable_params = const_cast<TaggerModel*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
}

void TaggerModel::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

// ---------------------------------------------------------------------------

Vector input_vector(const TaggerModel& model, std::size_t word_id, const SparseFeature& feature) {
    if (word_id >= model.embeddings.value.rows())
        throw Error(ErrorCode::shape_mismatch, "word id " + std::to_string(word_id) + " out of range");
    auto row = model.embeddings.value.row(word_id);
    Vector out(row.begin(), row.end());
    const Matrix& w2 = model.feature_proj.value;
    for (std::uint32_t slot : feature.active()) {
        if (slot >= w2.rows())
            throw Error(ErrorCode::shape_mismatch, "feature slot " + std::to_string(slot) +
                                                       " exceeds feature dimension " + std::to_string(w2.rows()));
        auto proj = w2.row(slot);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += proj[j];
    }
    return out;
}

ForwardTrace blstm_forward(const TaggerModel& model, const EncodedSentence& encoded) {
    const std::size_t n = encoded.size();
    if (n == 0) throw Error(ErrorCode::empty_input, "empty input");
    if (encoded.features.size() != n)
        throw Error(ErrorCode::shape_mismatch, "feature sequence length does not match word ids");
    if (encoded.feature_dim != model.feature_proj.value.rows())
        throw Error(ErrorCode::shape_mismatch, "feature dimension does not match the model");

    const std::size_t e = model.shape().embed_dim, h = model.shape().hidden_size;
    const std::size_t m = model.tag_count();
    ForwardTrace tr;
    tr.input = encoded;
    tr.inputs = Matrix(n, e);
    for (std::size_t t = 0; t < n; ++t) {
        Vector x = input_vector(model, encoded.word_ids[t], encoded.features[t]);
        std::copy(x.begin(), x.end(), tr.inputs.row(t).begin());
    }
    tr.forward = make_direction_trace(n, h);
    tr.backward = make_direction_trace(n, h);
    scan(model.forward_cell, model.shape().peepholes, tr.inputs, false, tr.forward);
    scan(model.backward_cell, model.shape().peepholes, tr.inputs, true, tr.backward);

    tr.logits = Matrix(n, m);
    tr.probs = Matrix(n, m);
    const Matrix& w = model.output_weights.value;
    for (std::size_t t = 0; t < n; ++t) {
        auto logits = tr.logits.row(t);
        auto b = model.output_bias.value.row(0);
        std::copy(b.begin(), b.end(), logits.begin());
        // [h_fwd; h_bwd] times W_out, split over the two row blocks
        auto hf = tr.forward.hidden.row(t), hb = tr.backward.hidden.row(t);
        for (std::size_t k = 0; k < h; ++k) {
            auto wf = w.row(k), wb = w.row(h + k);
            for (std::size_t j = 0; j < m; ++j) logits[j] += hf[k] * wf[j] + hb[k] * wb[j];
        }
        softmax_into(logits, tr.probs.row(t));
    }
    return tr;
}

double nll_from_trace(const ForwardTrace& trace, std::span<const std::size_t> tag_ids) {
    // log-sum-exp on the logits, reduced in extended precision so the result
    // is close to correctly rounded; finite-difference checks difference two
    // nearby losses and lose everything below the rounding noise
    static const long double log_min = std::log(static_cast<long double>(log_floor));
    long double loss = 0.0L;
    for (std::size_t t = 0; t < tag_ids.size(); ++t) {
        auto z = trace.logits.row(t);
        const long double top = *std::max_element(z.begin(), z.end());
        long double total = 0.0L;
        for (double v : z) total += std::exp(v - top);
        const long double log_p = z[tag_ids[t]] - top - std::log(total);
        loss -= std::max(log_p, log_min);
    }
    return static_cast<double>(loss);
}

NllResult sentence_nll(const TaggerModel& model, const EncodedSentence& encoded,
                       std::span<const std::size_t> tag_ids) {
    check_tags(model, tag_ids, encoded.size());
    NllResult r;
    r.trace = blstm_forward(model, encoded);
    r.loss = nll_from_trace(r.trace, tag_ids);
    return r;
}

void backward(TaggerModel& model, const ForwardTrace& trace, std::span<const std::size_t> tag_ids) {
    const std::size_t n = trace.length();
    const std::size_t e = model.shape().embed_dim, h = model.shape().hidden_size;
    const std::size_t m = model.tag_count();
    if (trace.probs.rows() != n || trace.probs.cols() != m || trace.inputs.cols() != e ||
        trace.forward.hidden.cols() != h || trace.input.feature_dim != model.feature_proj.value.rows())
        throw Error(ErrorCode::shape_mismatch, "trace does not match the model");
    check_tags(model, tag_ids, n);

    Matrix dh_fwd(n, h), dh_bwd(n, h);
    Vector dlogits(m);
    Matrix& w = model.output_weights.value;
    Matrix& dw = model.output_weights.grad;
    auto db = model.output_bias.grad.row(0);
    for (std::size_t t = 0; t < n; ++t) {
        auto p = trace.probs.row(t);
        for (std::size_t j = 0; j < m; ++j) dlogits[j] = p[j] - (j == tag_ids[t] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < m; ++j) db[j] += dlogits[j];
        auto hf = trace.forward.hidden.row(t), hb = trace.backward.hidden.row(t);
        auto dhf = dh_fwd.row(t), dhb = dh_bwd.row(t);
        for (std::size_t k = 0; k < h; ++k) {
            auto wf = w.row(k), wb = w.row(h + k);
            auto gf = dw.row(k), gb = dw.row(h + k);
            double accf = 0.0, accb = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                gf[j] += hf[k] * dlogits[j];
                gb[j] += hb[k] * dlogits[j];
                accf += wf[j] * dlogits[j];
                accb += wb[j] * dlogits[j];
            }
            dhf[k] = accf;
            dhb[k] = accb;
        }
    }

    Matrix dinputs(n, e);
    const bool peep = model.shape().peepholes;
    backprop(model.forward_cell, peep, trace.inputs, trace.forward, dh_fwd, false, dinputs);
    backprop(model.backward_cell, peep, trace.inputs, trace.backward, dh_bwd, true, dinputs);

    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t id = trace.input.word_ids[t];
        auto dx = dinputs.row(t);
        auto g1 = model.embeddings.grad.row(id);
        for (std::size_t j = 0; j < e; ++j) g1[j] += dx[j];
        model.embeddings.mark_row(id);
        for (std::uint32_t slot : trace.input.features[t].active()) {
            auto g2 = model.feature_proj.grad.row(slot);
            for (std::size_t j = 0; j < e; ++j) g2[j] += dx[j];
        }
    }
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j) {
        if (values[j] > values[best]) best = j;
    }
    return best;
}

std::vector<std::size_t> predict_from_trace(const ForwardTrace& trace) {
    std::vector<std::size_t> out(trace.length());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = argmax(trace.probs.row(t));
    return out;
}

std::vector<std::size_t> predict_tags(const TaggerModel& model, const EncodedSentence& encoded) {
    return predict_from_trace(blstm_forward(model, encoded));
}

}  // namespace seqtag
