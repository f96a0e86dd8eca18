#ifndef SPO_TESTS_TESTING_TEST_SERVER_H_
#define SPO_TESTS_TESTING_TEST_SERVER_H_

// In-process model server speaking the wire protocol, backed by a linear
// model and a static embedding encoder. Stands in for the reference model
// service in tests.

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "spo/encoder.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace spo::testing {

enum class ServerFault {
  kNone,
  kMalformedJson,    // /classify answers with a non-JSON body
  kWrongRowCount,    // /classify drops the last row
  kBadDistribution,  // /classify rows do not sum to one
  kServerError,      // /classify answers 500 {"error": ...}
};

class TestModelServer {
 public:
  TestModelServer(LinearMockModel model, EmbeddingTable embeddings,
                  ServerFault fault = ServerFault::kNone)
      : model_(std::move(model)),
        encoder_(std::move(embeddings)),
        fault_(fault) {
    server_.Get("/info", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json j = {{"num_labels", model_.num_labels()},
                          {"label_names", model_.label_names()}};
      res.set_content(j.dump(), "application/json");
    });
    server_.Post("/classify", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      ++classify_calls_;
      std::vector<std::string> texts;
      if (!parse_texts(req, res, texts)) return;
      if (fault_ == ServerFault::kMalformedJson) {
        res.set_content("{not json", "application/json");
        return;
      }
      if (fault_ == ServerFault::kServerError) {
        res.status = 500;
        res.set_content(R"({"error": "boom"})", "application/json");
        return;
      }
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& dist : model_.classify(texts)) {
        std::vector<double> probs = dist.probs;
        if (fault_ == ServerFault::kBadDistribution) probs[0] += 0.5;
        rows.push_back(probs);
      }
      if (fault_ == ServerFault::kWrongRowCount && !rows.empty()) {
        rows.erase(rows.size() - 1);
      }
      res.set_content(nlohmann::json{{"probabilities", rows}}.dump(),
                      "application/json");
    });
    server_.Post("/encode", [this](const httplib::Request& req,
                                   httplib::Response& res) {
      std::vector<std::string> texts;
      if (!parse_texts(req, res, texts)) return;
      std::vector<Document> docs;
      for (const auto& text : texts) docs.push_back(make_document(text, 0));
      nlohmann::json vectors = encoder_.encode_batch(docs);
      res.set_content(nlohmann::json{{"vectors", vectors}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~TestModelServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  TestModelServer(const TestModelServer&) = delete;
  TestModelServer& operator=(const TestModelServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int classify_calls() const { return classify_calls_.load(); }

 private:
  static bool parse_texts(const httplib::Request& req, httplib::Response& res,
                          std::vector<std::string>& texts) {
    try {
      texts = nlohmann::json::parse(req.body).at("texts")
                  .get<std::vector<std::string>>();
      return true;
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(),
                      "application/json");
      return false;
    }
  }

  LinearMockModel model_;
  StaticEmbeddingEncoder encoder_;
  ServerFault fault_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> classify_calls_{0};
};

}  // namespace spo::testing

#endif  // SPO_TESTS_TESTING_TEST_SERVER_H_
