#ifndef SPO_VICTIM_H_
#define SPO_VICTIM_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "spo/types.h"

namespace spo {

// Endpoint unreachable, non-2xx status, or a broken connection. Retriable.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The peer answered, but the payload violates the wire contract. Fatal.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// softmax(scores / temperature) with max-subtraction. Throws
// std::invalid_argument on a non-finite score or temperature <= 0.
LabelDistribution score_softmax(std::span<const double> scores,
                                double temperature = 1.0);

// A black-box scorer. Implementations must be deterministic and safe to call
// from several threads at once.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual int num_labels() const = 0;
  virtual std::vector<std::string> label_names() const = 0;
  virtual std::vector<LabelDistribution> classify(
      std::span<const std::string> texts) const = 0;
};

// Bag-of-words linear model: score_k = bias_k + sum over tokens of
// weight(norm)_k, then a tempered softmax. Unknown tokens contribute zero.
class LinearMockModel : public Classifier {
 public:
  LinearMockModel(std::vector<double> biases,
                  std::map<std::string, std::vector<double>> weights,
                  double temperature = 1.0);

  // {"biases": [...], "weights": {"word": [...]}, "temperature": 1.0}
  static LinearMockModel from_json(const nlohmann::json& j);
  static LinearMockModel load(const std::string& path);
  nlohmann::json to_json() const;

  int num_labels() const override { return static_cast<int>(biases_.size()); }
  std::vector<std::string> label_names() const override;
  std::vector<LabelDistribution> classify(
      std::span<const std::string> texts) const override;

  std::vector<double> scores(const std::string& text) const;

  const std::vector<double>& biases() const { return biases_; }
  const std::map<std::string, std::vector<double>>& weights() const {
    return weights_;
  }
  double temperature() const { return temperature_; }

 private:
  std::vector<double> biases_;
  std::map<std::string, std::vector<double>> weights_;
  double temperature_;
};

// Client for a model server speaking the JSON wire protocol:
//   GET  /info     -> {"num_labels": K, "label_names": [...]}
//   POST /classify {"texts": [...]} -> {"probabilities": [[K floats], ...]}
class HttpClassifier : public Classifier {
 public:
  // `url` is "http://host:port". Fetches /info; throws TransportError or
  // ProtocolError when that fails.
  explicit HttpClassifier(std::string url, int max_retries = 2);

  int num_labels() const override { return num_labels_; }
  std::vector<std::string> label_names() const override {
    return label_names_;
  }
  std::vector<LabelDistribution> classify(
      std::span<const std::string> texts) const override;

  const std::string& url() const { return url_; }

 private:
  std::string url_;
  int max_retries_;
  int num_labels_ = 0;
  std::vector<std::string> label_names_;
};

// Per-caller query accounting. The handle's global counter and any tally
// passed in are advanced by the same amount.
struct QueryTally {
  std::uint64_t queries = 0;
  std::uint64_t cache_hits = 0;
};

// The only channel through which attacks see the victim.
class ClassifierHandle {
 public:
  explicit ClassifierHandle(std::shared_ptr<const Classifier> backend,
                            bool enable_cache = false);

  // One distribution per document, in order. query_count grows by the number
  // of documents actually sent to the backend (cache hits are not queries).
  std::vector<LabelDistribution> classify_batch(std::span<const Document> docs,
                                                QueryTally* tally = nullptr);
  LabelDistribution classify(const Document& doc, QueryTally* tally = nullptr);

  int num_labels() const { return num_labels_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  std::uint64_t query_count() const { return queries_.load(); }
  std::uint64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::shared_ptr<const Classifier> backend_;
  int num_labels_;
  std::vector<std::string> label_names_;
  bool cache_enabled_;
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::mutex cache_mu_;
  std::unordered_map<std::string, LabelDistribution> cache_;
};

// "builtin:linear:PATH" or "http://host:port".
std::shared_ptr<const Classifier> open_victim(const std::string& spec);

}  // namespace spo

#endif  // SPO_VICTIM_H_
