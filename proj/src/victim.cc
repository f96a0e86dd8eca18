#include "spo/victim.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "http_json.h"

namespace spo {

LabelDistribution score_softmax(std::span<const double> scores,
                                double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("softmax temperature must be > 0");
  }
  if (scores.empty()) throw std::invalid_argument("softmax of empty scores");
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
    max_scaled = std::max(max_scaled, s / temperature);
  }
  LabelDistribution dist;
  dist.probs.resize(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    dist.probs[k] = std::exp(scores[k] / temperature - max_scaled);
    total += dist.probs[k];
  }
  for (double& p : dist.probs) p /= total;
  return dist;
}

LinearMockModel::LinearMockModel(
    std::vector<double> biases,
    std::map<std::string, std::vector<double>> weights, double temperature)
    : biases_(std::move(biases)),
      weights_(std::move(weights)),
      temperature_(temperature) {
  if (biases_.size() < 2) {
    throw std::invalid_argument("linear model needs at least 2 labels");
  }
  if (!(temperature_ > 0.0)) {
    throw std::invalid_argument("linear model temperature must be > 0");
  }
  for (const auto& [word, row] : weights_) {
    if (row.size() != biases_.size()) {
      throw std::invalid_argument("weight row for '" + word +
                                  "' has wrong dimension");
    }
  }
}

LinearMockModel LinearMockModel::from_json(const nlohmann::json& j) {
  try {
    auto biases = j.at("biases").get<std::vector<double>>();
    std::map<std::string, std::vector<double>> weights;
    if (j.contains("weights")) {
      for (const auto& [word, row] : j.at("weights").items()) {
        weights.emplace(to_lower(word), row.get<std::vector<double>>());
      }
    }
    const double temperature = j.value("temperature", 1.0);
    return LinearMockModel(std::move(biases), std::move(weights), temperature);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad linear model JSON: ") +
                                e.what());
  }
}

LinearMockModel LinearMockModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open linear model: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json LinearMockModel::to_json() const {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [word, row] : weights_) weights[word] = row;
  return {{"biases", biases_},
          {"weights", std::move(weights)},
          {"temperature", temperature_}};
}

std::vector<std::string> LinearMockModel::label_names() const {
  std::vector<std::string> names;
  for (int k = 0; k < num_labels(); ++k) names.push_back(std::to_string(k));
  return names;
}

std::vector<double> LinearMockModel::scores(const std::string& text) const {
  std::vector<double> out = biases_;
  for (const Token& token : tokenize(text)) {
    const auto it = weights_.find(token.norm);
    if (it == weights_.end()) continue;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += it->second[k];
  }
  return out;
}

std::vector<LabelDistribution> LinearMockModel::classify(
    std::span<const std::string> texts) const {
  std::vector<LabelDistribution> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    out.push_back(score_softmax(scores(text), temperature_));
  }
  return out;
}

HttpClassifier::HttpClassifier(std::string url, int max_retries)
    : url_(std::move(url)), max_retries_(max_retries) {
  while (!url_.empty() && url_.back() == '/') url_.pop_back();
  const auto info = internal::http_get_json(url_, "/info", max_retries_);
  if (!info.is_object() || !info.contains("num_labels") ||
      !info["num_labels"].is_number_integer()) {
    throw ProtocolError(url_ + "/info: missing integer num_labels");
  }
  num_labels_ = info["num_labels"].get<int>();
  if (num_labels_ < 2) throw ProtocolError(url_ + "/info: num_labels < 2");
  if (info.contains("label_names") && info["label_names"].is_array()) {
    for (const auto& name : info["label_names"]) {
      label_names_.push_back(name.is_string() ? name.get<std::string>()
                                              : name.dump());
    }
  }
  if (label_names_.empty()) {
    for (int k = 0; k < num_labels_; ++k) {
      label_names_.push_back(std::to_string(k));
    }
  }
}

std::vector<LabelDistribution> HttpClassifier::classify(
    std::span<const std::string> texts) const {
  nlohmann::json body = {{"texts", nlohmann::json::array()}};
  for (const auto& text : texts) body["texts"].push_back(text);
  const auto res = internal::http_post_json(url_, "/classify", body,
                                            max_retries_);
  if (!res.is_object() || !res.contains("probabilities") ||
      !res["probabilities"].is_array()) {
    throw ProtocolError(url_ + "/classify: missing probabilities array");
  }
  const auto& rows = res["probabilities"];
  if (rows.size() != texts.size()) {
    throw ProtocolError(url_ + "/classify: expected " +
                        std::to_string(texts.size()) + " rows, got " +
                        std::to_string(rows.size()));
  }
  std::vector<LabelDistribution> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    LabelDistribution dist;
    try {
      dist.probs = row.get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError(url_ + "/classify: row is not a number array");
    }
    if (static_cast<int>(dist.num_labels()) != num_labels_ ||
        !dist.is_valid()) {
      throw ProtocolError(url_ + "/classify: row is not a distribution over " +
                          std::to_string(num_labels_) + " labels");
    }
    out.push_back(std::move(dist));
  }
  return out;
}

ClassifierHandle::ClassifierHandle(std::shared_ptr<const Classifier> backend,
                                   bool enable_cache)
    : backend_(std::move(backend)), cache_enabled_(enable_cache) {
  if (!backend_) throw std::invalid_argument("null classifier backend");
  num_labels_ = backend_->num_labels();
  if (num_labels_ < 2) throw std::invalid_argument("classifier needs K >= 2");
  label_names_ = backend_->label_names();
}

std::vector<LabelDistribution> ClassifierHandle::classify_batch(
    std::span<const Document> docs, QueryTally* tally) {
  if (docs.empty()) throw std::invalid_argument("classify_batch: empty batch");
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& doc : docs) texts.push_back(doc.text());

  std::vector<LabelDistribution> out(texts.size());
  std::vector<std::size_t> pending;
  if (cache_enabled_) {
    std::lock_guard<std::mutex> lock(cache_mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto it = cache_.find(texts[i]);
      if (it != cache_.end()) {
        out[i] = it->second;
      } else {
        pending.push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < texts.size(); ++i) pending.push_back(i);
  }

  const std::uint64_t hits = texts.size() - pending.size();
  if (!pending.empty()) {
    std::vector<std::string> batch;
    batch.reserve(pending.size());
    for (std::size_t i : pending) batch.push_back(texts[i]);
    auto results = backend_->classify(batch);
    if (results.size() != batch.size()) {
      throw ProtocolError("backend returned wrong number of distributions");
    }
    for (std::size_t j = 0; j < pending.size(); ++j) {
      out[pending[j]] = std::move(results[j]);
    }
    if (cache_enabled_) {
      std::lock_guard<std::mutex> lock(cache_mu_);
      for (std::size_t i : pending) cache_.emplace(texts[i], out[i]);
    }
  }
  queries_ += pending.size();
  cache_hits_ += hits;
  if (tally) {
    tally->queries += pending.size();
    tally->cache_hits += hits;
  }
  return out;
}

LabelDistribution ClassifierHandle::classify(const Document& doc,
                                             QueryTally* tally) {
  return classify_batch(std::span<const Document>(&doc, 1), tally).front();
}

std::shared_ptr<const Classifier> open_victim(const std::string& spec) {
  constexpr std::string_view kLinear = "builtin:linear:";
  if (spec.starts_with(kLinear)) {
    return std::make_shared<LinearMockModel>(
        LinearMockModel::load(spec.substr(kLinear.size())));
  }
  if (spec.starts_with("http://")) {
    return std::make_shared<HttpClassifier>(spec);
  }
  throw std::invalid_argument("unknown victim '" + spec +
                              "' (expected http://... or builtin:linear:PATH)");
}

}  // namespace spo
