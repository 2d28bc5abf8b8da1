#include "seqtag/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "seqtag/error.hpp"
#include "seqtag/nn.hpp"

namespace seqtag {

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (i < line.size()) {
        while (i < line.size() && space(line[i])) ++i;
        std::size_t start = i;
        while (i < line.size() && !space(line[i])) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_uint(std::string_view s, std::size_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

Error line_error(std::size_t lineno, const std::string& what) {
    return Error(ErrorCode::format, "embedding line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

const Vector* EmbeddingMap::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? nullptr : &vectors_[it->second];
}

void EmbeddingMap::add(std::string word, Vector v) {
    if (v.empty()) throw Error(ErrorCode::format, "embedding for '" + word + "' is empty");
    if (words_.empty()) dim_ = v.size();
    if (v.size() != dim_)
        throw Error(ErrorCode::format, "embedding for '" + word + "' has " + std::to_string(v.size()) +
                                           " values, expected " + std::to_string(dim_));
    if (!index_.emplace(word, words_.size()).second)
        throw Error(ErrorCode::format, "duplicate word '" + word + "'");
    words_.push_back(std::move(word));
    vectors_.push_back(std::move(v));
}

void export_embeddings(const EmbeddingTable& table, std::ostream& out) {
    if (table.vectors.rows() != table.vocab.size())
        throw Error(ErrorCode::shape_mismatch, "embedding table rows do not match the vocabulary");
    out << table.vectors.rows() << ' ' << table.vectors.cols() << '\n';
    char buf[64];
    for (std::size_t r = 0; r < table.vectors.rows(); ++r) {
        out << table.vocab.word(r);
        for (double v : table.vectors.row(r)) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
        }
        out << '\n';
    }
}

void export_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    export_embeddings(table, out);
    if (!out) throw Error(ErrorCode::io, "failed writing " + path);
}

EmbeddingMap import_embeddings(std::istream& in) {
    EmbeddingMap map;
    std::string line;
    std::size_t lineno = 0;
    bool seen_content = false;
    std::size_t header_count = 0, header_dim = 0;
    bool has_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = fields_of(line);
        if (fields.empty()) continue;
        if (!seen_content) {
            seen_content = true;
            std::size_t a = 0, b = 0;
            if (fields.size() == 2 && parse_uint(fields[0], a) && parse_uint(fields[1], b)) {
                has_header = true;
                header_count = a;
                header_dim = b;
                continue;
            }
        }
        if (fields.size() < 2) throw line_error(lineno, "expected a word followed by values");
        const std::size_t dim = fields.size() - 1;
        const std::size_t expected = has_header ? header_dim : (map.size() ? map.dim() : dim);
        if (dim != expected)
            throw line_error(lineno, "found " + std::to_string(dim) + " values, expected " +
                                         std::to_string(expected));
        Vector v(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            if (!parse_double(fields[k + 1], v[k]))
                throw line_error(lineno, "cannot parse value '" + std::string(fields[k + 1]) + "'");
        }
        std::string word(fields[0]);
        if (map.find(word)) throw line_error(lineno, "duplicate word '" + word + "'");
        map.add(std::move(word), std::move(v));
    }
    if (has_header && header_count != map.size())
        throw Error(ErrorCode::format, "embedding header declares " + std::to_string(header_count) +
                                           " words, file has " + std::to_string(map.size()));
    return map;
}

EmbeddingMap import_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    try {
        return import_embeddings(in);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

EmbeddingInit init_tagger_embeddings(const Vocabulary& vocab, const EmbeddingMap* external,
                                     std::size_t embed_dim, Rng& rng) {
    if (embed_dim == 0) throw Error(ErrorCode::invalid_argument, "embed_dim must be positive");
    if (external && external->size() > 0 && external->dim() != embed_dim)
        throw Error(ErrorCode::shape_mismatch, "external embedding dimension " + std::to_string(external->dim()) +
                                                   " does not match embed_dim " + std::to_string(embed_dim));
    EmbeddingInit init;
    init.vectors = Matrix(vocab.size(), embed_dim);
    for (std::size_t r = 0; r < vocab.size(); ++r) {
        auto row = init.vectors.row(r);
        const Vector* v = external ? external->find(vocab.word(r)) : nullptr;
        if (v) {
            std::copy(v->begin(), v->end(), row.begin());
            ++init.covered;
        } else {
            for (double& x : row) x = rng.uniform(-0.1, 0.1);
        }
    }
    init.oov_rate = vocab.size() == 0 ? 0.0
                                      : static_cast<double>(vocab.size() - init.covered) /
                                            static_cast<double>(vocab.size());
    return init;
}

}  // namespace seqtag
