#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "shield/matrix.hpp"

namespace shield {

/// Term -> unit-length embedding vector, all of one dimension.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// `values` is row-major (terms.size() x dim). Vectors are L2-normalized
  /// when their norm deviates from 1 by more than 1e-6.
  EmbeddingStore(std::vector<std::string> terms, std::size_t dim, std::vector<double> values);

  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }

  std::optional<std::size_t> find(const std::string& term) const;
  bool contains(const std::string& term) const { return find(term).has_value(); }

  std::span<const double> vector(std::size_t index) const {
    return {values_.data() + index * dim_, dim_};
  }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.terms_ == b.terms_ && a.dim_ == b.dim_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> terms_;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Loads either the CSV form (`term,x1,...,xd`) or the SHEM binary form,
/// sniffed from the leading magic bytes. Components are rounded through
/// float32 in both cases so the two encodings of one file load identically.
EmbeddingStore load_embeddings(std::istream& source);

void write_embeddings_csv(std::ostream& out, const EmbeddingStore& store);
void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store);

/// Symmetric cosine-similarity matrix over an ordered PT list.
struct SimilarityMatrix {
  std::vector<std::string> terms;
  Matrix values;

  std::size_t size() const noexcept { return terms.size(); }
};

/// PTs from `pts` that have no vector in the store, in input order.
std::vector<std::string> missing_terms(const EmbeddingStore& store,
                                       std::span<const std::string> pts);

/// Throws MissingEmbedding listing every absent PT.
SimilarityMatrix cosine_similarity_submatrix(const EmbeddingStore& store,
                                             std::span<const std::string> pts);

/// Zeroes off-diagonal entries below tau; the diagonal stays 1.
SimilarityMatrix threshold_similarity(const SimilarityMatrix& s, double tau);

}  // namespace shield
