#include "shield/embed.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "shield/error.hpp"
#include "shield/simd/kernels.hpp"

namespace shield {

namespace {

constexpr std::string_view kMagic = "SHEM";
constexpr double kNormTolerance = 1e-6;

std::optional<double> parse_double(std::string_view text) {
  text = csv::trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    const auto b = take(4);
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[3])) << 24;
  }
  std::uint16_t u16() {
    const auto b = take(2);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[0]) |
                                      static_cast<unsigned char>(b[1]) << 8);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::SchemaError, "binary embedding file truncated at byte " +
                                              std::to_string(pos_));
    }
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), b.size());
}

EmbeddingStore load_binary(std::string_view bytes) {
  ByteReader in(bytes);
  in.take(kMagic.size());
  const std::uint32_t count = in.u32();
  const std::uint32_t dim = in.u32();
  std::vector<std::string> terms;
  std::vector<double> values;
  terms.reserve(count);
  values.reserve(static_cast<std::size_t>(count) * dim);
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto len = in.u16();
    terms.emplace_back(in.take(len));
    for (std::uint32_t d = 0; d < dim; ++d) values.push_back(static_cast<double>(in.f32()));
  }
  if (!in.done()) throw Error(ErrorCode::SchemaError, "trailing bytes after last embedding");
  return EmbeddingStore(std::move(terms), dim, std::move(values));
}

EmbeddingStore load_csv(std::string_view text) {
  const auto records = csv::parse(text);
  std::vector<std::string> terms;
  std::vector<double> values;
  std::size_t dim = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "line " + std::to_string(rec.line);
    if (r == 0 && rec.fields.size() > 1 &&
        std::none_of(rec.fields.begin() + 1, rec.fields.end(),
                     [](const std::string& f) { return parse_double(f).has_value(); })) {
      continue;  // header row
    }
    if (rec.fields.size() < 2) throw Error(ErrorCode::SchemaError, where + ": no vector values");
    const std::size_t row_dim = rec.fields.size() - 1;
    if (dim == 0) dim = row_dim;
    if (row_dim != dim) {
      throw Error(ErrorCode::SchemaError, where + ": vector has " + std::to_string(row_dim) +
                                              " values, expected " + std::to_string(dim));
    }
    terms.emplace_back(csv::trim(rec.fields[0]));
    for (std::size_t c = 1; c < rec.fields.size(); ++c) {
      const auto v = parse_double(rec.fields[c]);
      if (!v) {
        throw Error(ErrorCode::SchemaError,
                    where + ": '" + rec.fields[c] + "' is not a number");
      }
      values.push_back(static_cast<double>(static_cast<float>(*v)));
    }
  }
  return EmbeddingStore(std::move(terms), dim, std::move(values));
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::vector<std::string> terms, std::size_t dim,
                               std::vector<double> values)
    : terms_(std::move(terms)), dim_(dim), values_(std::move(values)) {
  if (dim_ < 2) throw Error(ErrorCode::SchemaError, "embedding dimension must be at least 2");
  if (values_.size() != terms_.size() * dim_) {
    throw Error(ErrorCode::SchemaError, "embedding values do not match terms x dimension");
  }
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    std::span<double> v{values_.data() + t * dim_, dim_};
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
      throw Error(ErrorCode::InvalidVector, "non-finite component in vector for '" + terms_[t] + "'");
    }
    const double norm = std::sqrt(simd::dot(v, v));
    if (norm == 0.0) throw Error(ErrorCode::InvalidVector, "zero-norm vector for '" + terms_[t] + "'");
    if (std::abs(norm - 1.0) > kNormTolerance) {
      for (double& x : v) x /= norm;
    }
    if (!index_.emplace(terms_[t], t).second) {
      throw Error(ErrorCode::DuplicateTerm, "duplicate embedding term '" + terms_[t] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& term) const {
  const auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore load_embeddings(std::istream& source) {
  const std::string bytes = csv::read_all(source);
  if (std::string_view(bytes).starts_with(kMagic)) return load_binary(bytes);
  return load_csv(bytes);
}

void write_embeddings_csv(std::ostream& out, const EmbeddingStore& store) {
  std::array<char, 64> buf{};
  for (std::size_t t = 0; t < store.size(); ++t) {
    out << csv::escape(store.terms()[t]);
    for (double x : store.vector(t)) {
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(x));
      out << ',' << std::string_view(buf.data(), res.ptr - buf.data());
    }
    out << '\n';
  }
}

void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  put_u32(out, static_cast<std::uint32_t>(store.dim()));
  for (std::size_t t = 0; t < store.size(); ++t) {
    const auto& name = store.terms()[t];
    if (name.size() > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "term name too long");
    const auto len = static_cast<std::uint16_t>(name.size());
    const std::array<char, 2> lb{static_cast<char>(len & 0xFF), static_cast<char>(len >> 8)};
    out.write(lb.data(), 2);
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (double x : store.vector(t)) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
}

std::vector<std::string> missing_terms(const EmbeddingStore& store,
                                       std::span<const std::string> pts) {
  std::vector<std::string> missing;
  for (const auto& pt : pts) {
    if (!store.contains(pt)) missing.push_back(pt);
  }
  return missing;
}

SimilarityMatrix cosine_similarity_submatrix(const EmbeddingStore& store,
                                             std::span<const std::string> pts) {
  const auto missing = missing_terms(store, pts);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + ("'" + m + "'");
    throw Error(ErrorCode::MissingEmbedding,
                std::to_string(missing.size()) + " PT(s) without embedding: " + list);
  }

  const std::size_t m = pts.size();
  std::vector<std::size_t> idx(m);
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    idx[i] = *store.find(pts[i]);
    const auto v = store.vector(idx[i]);
    norms[i] = std::sqrt(simd::dot(v, v));
  }

  SimilarityMatrix out{std::vector<std::string>(pts.begin(), pts.end()), Matrix(m, m)};
  for (std::size_t i = 0; i < m; ++i) {
    out.values(i, i) = 1.0;
    const auto vi = store.vector(idx[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      const double cos = simd::dot(vi, store.vector(idx[j])) / (norms[i] * norms[j]);
      const double clamped = std::clamp(cos, -1.0, 1.0);
      out.values(i, j) = clamped;
      out.values(j, i) = clamped;
    }
  }
  return out;
}

SimilarityMatrix threshold_similarity(const SimilarityMatrix& s, double tau) {
  SimilarityMatrix out = s;
  const std::size_t m = s.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && out.values(i, j) < tau) out.values(i, j) = 0.0;
    }
    out.values(i, i) = 1.0;
  }
  return out;
}

}  // namespace shield
