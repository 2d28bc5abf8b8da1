// Model container layout (all integers little-endian, doubles IEEE-754
// binary64 little-endian):
//
//   magic        6 bytes  "SEQTAG"
//   version      u32      model_format_version
//   peepholes    u8
//   embed_dim    u64
//   hidden_size  u64
//   vocab        u64 count, then count strings (id order, entry 0 is <UNK>)
//   tags         u64 count, then count strings
//   features     u8 use_case, u8 use_suffix, u64 count, then count suffix strings
//   params       u64 count, then per parameter:
//                  string name, u64 rows, u64 cols, rows*cols f64 (row-major)
//
// A string is a u64 byte length followed by the UTF-8 bytes.

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "seqtag/error.hpp"
#include "seqtag/model.hpp"

namespace seqtag {

namespace {

constexpr char magic[6] = {'S', 'E', 'Q', 'T', 'A', 'G'};
// guards against absurd allocations from corrupted length fields
constexpr std::uint64_t max_reasonable_count = 1ULL << 34;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), n); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void strings(const std::vector<std::string>& v) {
        u64(v.size());
        for (const auto& s : v) str(s);
    }

private:
    void le(std::uint64_t v, int n) {
        unsigned char buf[8];
        for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(buf, n);
    }
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw Error(ErrorCode::truncated, "truncated container");
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::uint64_t count() {
        std::uint64_t n = u64();
        if (n > max_reasonable_count) throw Error(ErrorCode::format, "implausible length field in container");
        return n;
    }
    std::string str() {
        std::string s(count(), '\0');
        bytes(s.data(), s.size());
        return s;
    }
    std::vector<std::string> strings() {
        std::vector<std::string> v(count());
        for (auto& s : v) s = str();
        return v;
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::uint64_t le(int n) {
        unsigned char buf[8];
        bytes(buf, n);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    std::istream& in_;
};

// Every parameter is stored, including disabled peepholes, so the layout only
// depends on the shapes.
std::vector<const Parameter*> all_parameters(const TaggerModel& model) {
    std::vector<const Parameter*> out{&model.embeddings, &model.feature_proj};
    for (const LstmCellParams* cell : {&model.forward_cell, &model.backward_cell}) {
        for (std::size_t g = 0; g < gate_count; ++g) {
            out.push_back(&cell->input_weights[g]);
            out.push_back(&cell->recurrent_weights[g]);
            out.push_back(&cell->biases[g]);
        }
        for (const auto& p : cell->peepholes) out.push_back(&p);
    }
    out.push_back(&model.output_weights);
    out.push_back(&model.output_bias);
    return out;
}

}  // namespace

void save_model(const TaggerModel& model, std::ostream& out) {
    Writer w(out);
    w.bytes(magic, sizeof magic);
    w.u32(model_format_version);
    w.u8(model.shape().peepholes ? 1 : 0);
    w.u64(model.shape().embed_dim);
    w.u64(model.shape().hidden_size);
    w.strings(model.vocab().words());
    w.strings(model.tags().tags());
    w.u8(model.features().use_case_feature ? 1 : 0);
    w.u8(model.features().use_suffix ? 1 : 0);
    w.strings(model.features().suffix_alphabet);
    auto params = all_parameters(model);
    w.u64(params.size());
    for (const Parameter* p : params) {
        w.str(p->name);
        w.u64(p->value.rows());
        w.u64(p->value.cols());
        for (double v : p->value.values()) w.f64(v);
    }
    if (!out) throw Error(ErrorCode::io, "failed writing model container");
}

void save_model(const TaggerModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    save_model(model, out);
    out.close();
    if (!out) throw Error(ErrorCode::io, "failed writing " + path);
}

TaggerModel load_model(std::istream& in) {
    Reader r(in);
    char head[sizeof magic];
    r.bytes(head, sizeof head);
    if (std::memcmp(head, magic, sizeof magic) != 0)
        throw Error(ErrorCode::bad_magic, "not a model container (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != model_format_version)
        throw Error(ErrorCode::unsupported_version, "unsupported version " + std::to_string(version));

    ModelShape shape;
    shape.peepholes = r.u8() != 0;
    shape.embed_dim = r.u64();
    shape.hidden_size = r.u64();

    auto words = r.strings();
    if (words.empty() || words.front() != unk_word)
        throw Error(ErrorCode::format, "container vocabulary does not start with <UNK>");
    words.erase(words.begin());
    auto tags = r.strings();
    ExtraFeatureSpec spec;
    spec.use_case_feature = r.u8() != 0;
    spec.use_suffix = r.u8() != 0;
    spec.suffix_alphabet = r.strings();

    TaggerModel model = [&] {
        try {
            return TaggerModel(Vocabulary(std::move(words)), TagSet(std::move(tags)), std::move(spec), shape);
        } catch (const Error& e) {
            throw Error(ErrorCode::format, std::string("invalid container header: ") + e.what());
        }
    }();

    std::vector<Parameter*> params;
    for (const Parameter* p : all_parameters(model)) params.push_back(const_cast<Parameter*>(p));
    const std::uint64_t stored = r.u64();
    if (stored != params.size())
        throw Error(ErrorCode::shape_mismatch, "container holds " + std::to_string(stored) +
                                                   " parameters, expected " + std::to_string(params.size()));
    for (Parameter* p : params) {
        const std::string name = r.str();
        const std::uint64_t rows = r.u64(), cols = r.u64();
        if (name != p->name || rows != p->value.rows() || cols != p->value.cols())
            throw Error(ErrorCode::shape_mismatch,
                        "parameter '" + name + "' " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " does not match expected '" + p->name + "' " +
                            std::to_string(p->value.rows()) + "x" + std::to_string(p->value.cols()));
        for (double& v : p->value.values()) v = r.f64();
    }
    if (!r.at_end()) throw Error(ErrorCode::format, "trailing bytes after model container");
    return model;
}

TaggerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    return load_model(in);
}

}  // namespace seqtag
