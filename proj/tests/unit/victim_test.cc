#include "spo/victim.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "testing/fixtures.h"
#include "testing/test_server.h"

namespace spo {
namespace {

LinearMockModel sentiment_model() {
  return LinearMockModel({0.0, 0.0}, {{"good", {2.0, 0.0}},
                                      {"bad", {0.0, 2.0}},
                                      {"movie", {0.1, 0.0}}});
}

std::vector<Document> docs_of(const std::vector<std::string>& texts) {
  std::vector<Document> docs;
  for (const auto& t : texts) docs.push_back(make_document(t, 0));
  return docs;
}

// Reference values computed with 20-digit arbitrary precision arithmetic.
TEST(ScoreSoftmaxTest, MatchesHighPrecisionOracle) {
  const std::vector<double> scores = {1.0, 2.0, 3.0};
  const auto dist = score_softmax(scores);
  EXPECT_NEAR(dist[0], 0.090030573170380457998, 1e-15);
  EXPECT_NEAR(dist[1], 0.24472847105479765247, 1e-15);
  EXPECT_NEAR(dist[2], 0.66524095577482188953, 1e-15);

  const std::vector<double> two = {2.0, 0.0};
  EXPECT_NEAR(score_softmax(two)[0], 0.88079707797788244406, 1e-15);
}

TEST(ScoreSoftmaxTest, StableForLargeScores) {
  const std::vector<double> scores = {1000.0, 1000.0};
  const auto dist = score_softmax(scores);
  EXPECT_DOUBLE_EQ(dist[0], 0.5);
  EXPECT_TRUE(dist.is_valid());
}

TEST(ScoreSoftmaxTest, TemperatureFlattens) {
  const std::vector<double> scores = {4.0, 0.0};
  EXPECT_NEAR(score_softmax(scores, 2.0)[0], 0.88079707797788244406, 1e-15);
  EXPECT_THROW(score_softmax(scores, 0.0), std::invalid_argument);
  const std::vector<double> bad = {NAN, 0.0};
  EXPECT_THROW(score_softmax(bad), std::invalid_argument);
}

TEST(LinearMockModelTest, ScoresSumWeightsByNorm) {
  const auto model = sentiment_model();
  EXPECT_EQ(model.scores("Good GOOD movie ."), (std::vector<double>{4.1, 0.0}));
  EXPECT_EQ(model.num_labels(), 2);
  EXPECT_EQ(model.label_names(), (std::vector<std::string>{"0", "1"}));
}

TEST(LinearMockModelTest, JsonRoundTrip) {
  const auto model = sentiment_model();
  const auto copy = LinearMockModel::from_json(model.to_json());
  EXPECT_EQ(copy.biases(), model.biases());
  EXPECT_EQ(copy.weights(), model.weights());
  EXPECT_THROW(LinearMockModel({0.0}, {}), std::invalid_argument);
  EXPECT_THROW(LinearMockModel({0.0, 0.0}, {{"x", {1.0}}}),
               std::invalid_argument);
}

TEST(ClassifierHandleTest, CountsEveryDocumentSent) {
  auto handle = testing::make_handle(sentiment_model());
  QueryTally tally;
  const auto docs = docs_of({"good", "bad", "good"});
  handle->classify_batch(docs, &tally);
  handle->classify(docs[0], &tally);
  EXPECT_EQ(handle->query_count(), 4u);
  EXPECT_EQ(tally.queries, 4u);
  EXPECT_THROW(handle->classify_batch(std::span<const Document>()),
               std::invalid_argument);
}

TEST(ClassifierHandleTest, CacheHitsAreNotQueries) {
  ClassifierHandle handle(std::make_shared<LinearMockModel>(sentiment_model()),
                          true);
  QueryTally tally;
  const auto docs = docs_of({"good", "bad"});
  const auto first = handle.classify_batch(docs, &tally);
  const auto second = handle.classify_batch(docs, &tally);
  EXPECT_EQ(tally.queries, 2u);
  EXPECT_EQ(tally.cache_hits, 2u);
  EXPECT_EQ(handle.query_count(), 2u);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_EQ(first[i].probs, second[i].probs);
  }
}

TEST(ClassifierHandleTest, BatchEqualsLoop) {
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"good", "bad", "movie", "x", "."};
  auto handle = testing::make_handle(sentiment_model());
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> texts;
    for (int d = 0; d < 5; ++d) {
      std::string text;
      for (int w = 0; w < 4; ++w) text += words[rng() % words.size()] + " ";
      texts.push_back(text);
    }
    const auto docs = docs_of(texts);
    const auto batch = handle->classify_batch(docs);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto single = handle->classify(docs[i]);
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(single[k], batch[i][k], 1e-9);
      EXPECT_TRUE(single.is_valid());
    }
  }
}

class HttpClassifierTest : public ::testing::Test {
 protected:
  EmbeddingTable embeddings() {
    EmbeddingTable table(2);
    table.add("good", {1.0, 0.0});
    return table;
  }
};

TEST_F(HttpClassifierTest, MatchesLocalModel) {
  testing::TestModelServer server(sentiment_model(), embeddings());
  HttpClassifier remote(server.url());
  EXPECT_EQ(remote.num_labels(), 2);
  const std::vector<std::string> texts = {"good movie", "bad", "unknown"};
  const auto got = remote.classify(texts);
  const auto want = sentiment_model().classify(texts);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(got[i][k], want[i][k], 1e-12);
  }
  EXPECT_EQ(server.classify_calls(), 1);
}

TEST_F(HttpClassifierTest, HandleAccountingOverHttp) {
  testing::TestModelServer server(sentiment_model(), embeddings());
  ClassifierHandle handle(open_victim(server.url()));
  QueryTally tally;
  handle.classify_batch(docs_of({"a", "b", "c"}), &tally);
  EXPECT_EQ(tally.queries, 3u);
  EXPECT_EQ(server.classify_calls(), 1);
}

TEST_F(HttpClassifierTest, MalformedJsonIsProtocolError) {
  testing::TestModelServer server(sentiment_model(), embeddings(),
                                  testing::ServerFault::kMalformedJson);
  HttpClassifier remote(server.url());
  const std::vector<std::string> texts = {"good"};
  EXPECT_THROW(remote.classify(texts), ProtocolError);
}

TEST_F(HttpClassifierTest, WrongRowCountIsProtocolError) {
  testing::TestModelServer server(sentiment_model(), embeddings(),
                                  testing::ServerFault::kWrongRowCount);
  HttpClassifier remote(server.url());
  const std::vector<std::string> texts = {"good", "bad"};
  EXPECT_THROW(remote.classify(texts), ProtocolError);
}

TEST_F(HttpClassifierTest, InvalidDistributionIsProtocolError) {
  testing::TestModelServer server(sentiment_model(), embeddings(),
                                  testing::ServerFault::kBadDistribution);
  HttpClassifier remote(server.url());
  const std::vector<std::string> texts = {"good"};
  EXPECT_THROW(remote.classify(texts), ProtocolError);
}

TEST_F(HttpClassifierTest, ServerErrorIsTransportErrorAfterRetries) {
  testing::TestModelServer server(sentiment_model(), embeddings(),
                                  testing::ServerFault::kServerError);
  HttpClassifier remote(server.url(), 2);
  const std::vector<std::string> texts = {"good"};
  try {
    remote.classify(texts);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
  EXPECT_EQ(server.classify_calls(), 3);
}

TEST(HttpClassifierUnreachableTest, ConstructorThrowsTransportError) {
  // Reserve an ephemeral port, then close it so nothing listens there.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);
  ::close(fd);
  EXPECT_THROW(HttpClassifier("http://127.0.0.1:" + std::to_string(port), 0),
               TransportError);
}

TEST(OpenVictimTest, BuiltinLinear) {
  testing::TempDir dir;
  const auto path =
      dir.write("m.json", sentiment_model().to_json().dump());
  const auto victim = open_victim("builtin:linear:" + path);
  EXPECT_EQ(victim->num_labels(), 2);
  EXPECT_THROW(open_victim("ftp://x"), std::invalid_argument);
}

}  // namespace
}  // namespace spo
