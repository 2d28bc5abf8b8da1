#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqtag/matrix.hpp"
#include "seqtag/rng.hpp"
#include "seqtag/text.hpp"

namespace seqtag {

/// A trained W1 together with the vocabulary that indexes its rows.
struct EmbeddingTable {
    Vocabulary vocab;
    Matrix vectors;  // vocab.size() x dim
};

/// Word -> vector map as read from an embedding text file, in file order.
class EmbeddingMap {
public:
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return words_.size(); }
    const std::vector<std::string>& words() const noexcept { return words_; }
    const Vector& vector(std::size_t i) const { return vectors_.at(i); }
    const Vector* find(std::string_view word) const;

    /// Throws format if the word is already present or the length differs.
    void add(std::string word, Vector v);

private:
    std::size_t dim_ = 0;
    std::vector<std::string> words_;
    std::vector<Vector> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// "<count> <dim>" header, then "word v1 ... vdim" per row. Values use the
/// shortest representation that round-trips exactly.
void export_embeddings(const EmbeddingTable& table, std::ostream& out);
void export_embeddings(const EmbeddingTable& table, const std::string& path);

/// Accepts files with or without the header line. Inconsistent column counts
/// and duplicate words raise `format` naming the line.
EmbeddingMap import_embeddings(std::istream& in);
EmbeddingMap import_embeddings(const std::string& path);

struct EmbeddingInit {
    Matrix vectors;
    std::size_t covered = 0;
    /// Fraction of vocabulary rows (UNK included) without an external vector.
    double oov_rate = 1.0;
};

/// Copies external vectors for covered words; every other row is drawn from
/// U[-0.1, 0.1). Throws shape_mismatch if the external dim differs.
EmbeddingInit init_tagger_embeddings(const Vocabulary& vocab, const EmbeddingMap* external,
                                     std::size_t embed_dim, Rng& rng);

}  // namespace seqtag
