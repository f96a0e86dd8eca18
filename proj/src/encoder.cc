#include "spo/encoder.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "http_json.h"
#include "spo/victim.h"

namespace spo {

Embedding SentenceEncoder::encode(const Document& doc) const {
  return encode_batch(std::span<const Document>(&doc, 1)).front();
}

void EmbeddingTable::add(const std::string& token, Embedding vector) {
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_ || dimension_ == 0) {
    throw std::invalid_argument("embedding for '" + token + "' has dimension " +
                                std::to_string(vector.size()) + ", expected " +
                                std::to_string(dimension_));
  }
  vectors_.insert_or_assign(token, std::move(vector));
}

const Embedding* EmbeddingTable::find(const std::string& token) const {
  const auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings: " + path);
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    Embedding vector;
    std::string value;
    while (fields >> value) {
      try {
        std::size_t used = 0;
        vector.push_back(std::stod(value, &used));
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw FormatError(path, line_no, "bad number '" + value + "'");
      }
    }
    try {
      table.add(to_lower(token), std::move(vector));
    } catch (const std::invalid_argument& e) {
      throw FormatError(path, line_no, e.what());
    }
  }
  return table;
}

StaticEmbeddingEncoder::StaticEmbeddingEncoder(EmbeddingTable table)
    : table_(std::move(table)) {}

std::vector<Embedding> StaticEmbeddingEncoder::encode_batch(
    std::span<const Document> docs) const {
  std::vector<Embedding> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    Embedding mean(table_.dimension(), 0.0);
    std::size_t hits = 0;
    for (const Token& token : doc.tokens) {
      const Embedding* v = table_.find(token.norm);
      if (!v) continue;
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (*v)[i];
      ++hits;
    }
    if (hits > 0) {
      for (double& x : mean) x /= static_cast<double>(hits);
    }
    out.push_back(std::move(mean));
  }
  return out;
}

HttpEncoder::HttpEncoder(std::string url, int max_retries)
    : url_(std::move(url)), max_retries_(max_retries) {
  while (!url_.empty() && url_.back() == '/') url_.pop_back();
}

std::size_t HttpEncoder::dimension() const {
  std::lock_guard<std::mutex> lock(mu_);
  return dimension_;
}

std::vector<Embedding> HttpEncoder::encode_batch(
    std::span<const Document> docs) const {
  nlohmann::json body = {{"texts", nlohmann::json::array()}};
  for (const auto& doc : docs) body["texts"].push_back(doc.text());
  const auto res = internal::http_post_json(url_, "/encode", body, max_retries_);
  if (!res.is_object() || !res.contains("vectors") ||
      !res["vectors"].is_array() || res["vectors"].size() != docs.size()) {
    throw ProtocolError(url_ + "/encode: expected one vector per text");
  }
  std::vector<Embedding> out;
  out.reserve(docs.size());
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& row : res["vectors"]) {
    Embedding v;
    try {
      v = row.get<Embedding>();
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError(url_ + "/encode: vector is not a number array");
    }
    if (dimension_ == 0) dimension_ = v.size();
    if (v.size() != dimension_ || v.empty()) {
      throw ProtocolError(url_ + "/encode: inconsistent vector dimension");
    }
    out.push_back(std::move(v));
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine of vectors with different dimension");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return dot / (na * nb);
}

double use_score(const SentenceEncoder& encoder, const Document& x,
                 const Document& x_adv) {
  const Document pair[] = {x, x_adv};
  const auto vectors = encoder.encode_batch(pair);
  return cosine_similarity(vectors[0], vectors[1]);
}

std::shared_ptr<const SentenceEncoder> open_encoder(const std::string& spec) {
  constexpr std::string_view kStatic = "static:";
  if (spec.starts_with(kStatic)) {
    return std::make_shared<StaticEmbeddingEncoder>(
        load_embeddings(spec.substr(kStatic.size())));
  }
  if (spec.starts_with("http://")) return std::make_shared<HttpEncoder>(spec);
  throw std::invalid_argument("unknown encoder '" + spec +
                              "' (expected static:PATH or http://...)");
}

}  // namespace spo
