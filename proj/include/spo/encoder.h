#ifndef SPO_ENCODER_H_
#define SPO_ENCODER_H_

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spo/types.h"

namespace spo {

using Embedding = std::vector<double>;

// Maps a document to a fixed-dimension vector. Deterministic and shareable
// across threads.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::vector<Embedding> encode_batch(
      std::span<const Document> docs) const = 0;

  Embedding encode(const Document& doc) const;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  // Throws std::invalid_argument on a dimension mismatch.
  void add(const std::string& token, Embedding vector);
  const Embedding* find(const std::string& token) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, Embedding> vectors_;
};

// GloVe-style text: "token v1 ... vd" per line. Dimension is taken from the
// first line; later lines must agree.
EmbeddingTable load_embeddings(const std::string& path);

// Mean of the in-vocabulary token embeddings (looked up by norm). All-OOV or
// empty documents encode to the zero vector.
class StaticEmbeddingEncoder : public SentenceEncoder {
 public:
  explicit StaticEmbeddingEncoder(EmbeddingTable table);

  std::size_t dimension() const override { return table_.dimension(); }
  std::vector<Embedding> encode_batch(
      std::span<const Document> docs) const override;

  const EmbeddingTable& table() const { return table_; }

 private:
  EmbeddingTable table_;
};

// POST /encode {"texts": [...]} -> {"vectors": [[d floats], ...]}. The
// dimension is fixed by the first response.
class HttpEncoder : public SentenceEncoder {
 public:
  explicit HttpEncoder(std::string url, int max_retries = 2);

  std::size_t dimension() const override;
  std::vector<Embedding> encode_batch(
      std::span<const Document> docs) const override;

 private:
  std::string url_;
  int max_retries_;
  mutable std::mutex mu_;
  mutable std::size_t dimension_ = 0;
};

// Cosine similarity; 0 when either vector has norm below 1e-12.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

double use_score(const SentenceEncoder& encoder, const Document& x,
                 const Document& x_adv);

// "static:PATH" or "http://host:port".
std::shared_ptr<const SentenceEncoder> open_encoder(const std::string& spec);

}  // namespace spo

#endif  // SPO_ENCODER_H_
