#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"
#include "spo/eval.h"
#include "testing/fixtures.h"
#include "testing/test_server.h"

namespace spo {
namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SPO_BINARY) + " " + args + " 2>&1";
  Result result;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.out.append(buf.data(), n);
  }
  const int status = ::pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LinearMockModel model() {
  return LinearMockModel({1.0, 0.0}, {{"bad", {0.0, 3.0}}, {"meh", {0.0, 0.5}}});
}

class CliTest : public ::testing::Test {
 protected:
  CliTest() {
    model_path_ = dir_.write("model.json", model().to_json().dump());
    synonyms_ = dir_.write("syn.tsv", "good\t*\tbad|meh\nfine\t*\tmeh\n");
    embeddings_ = dir_.write("emb.txt", "good 1 0\nbad 0 1\nfilm 1 1\n");
    dataset_ = dir_.write(
        "data.jsonl",
        "{\"id\": \"b\", \"text\": \"good film\", \"label\": 0}\n"
        "{\"id\": \"a\", \"text\": \"fine film\", \"label\": 0}\n"
        "{\"id\": \"c\", \"text\": \"good\", \"label\": 1}\n");
  }

  std::string common() const {
    return "--victim builtin:linear:" + model_path_ + " --synonyms " + synonyms_ +
           " --embeddings " + embeddings_;
  }

  testing::TempDir dir_;
  std::string model_path_, synonyms_, embeddings_, dataset_;
};

TEST_F(CliTest, UnknownMethodIsUsageError) {
  EXPECT_EQ(run("eval " + common() + " --dataset " + dataset_ + " --method pso").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("attack " + common()).code, 1);
}

TEST_F(CliTest, MissingResourceIsRuntimeError) {
  EXPECT_EQ(run("eval --victim builtin:linear:" + dir_.file("none.json") +
                " --dataset " + dataset_).code,
            2);
}

TEST_F(CliTest, EvalWritesReportAndExport) {
  const auto out = dir_.file("report.json");
  const auto exp = dir_.file("adv.jsonl");
  const Result r = run("eval " + common() + " --dataset " + dataset_ +
                       " --out " + out + " --export " + exp);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("ASR"), std::string::npos);
  const auto report = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(report.at("n_total"), 3);
  EXPECT_EQ(report.at("n_skipped"), 1);
  EXPECT_EQ(report.at("n_success"), 1);
  EXPECT_EQ(report.at("records").at(0).at("id"), "a");
  EXPECT_EQ(load_export(exp).size(), 2u);
}

TEST_F(CliTest, ReportsAreByteIdenticalAcrossRuns) {
  for (const char* method : {"bu-spo", "bu-spof", "rand", "static", "wsa"}) {
    const auto first = dir_.file(std::string("r1_") + method);
    const auto second = dir_.file(std::string("r2_") + method);
    const std::string base =
        "eval " + common() + " --dataset " + dataset_ + " --method " + method +
        " --seed 5";
    ASSERT_EQ(run(base + " --out " + first).code, 0);
    ASSERT_EQ(run(base + " --jobs 3 --out " + second).code, 0);
    EXPECT_EQ(slurp(first), slurp(second)) << method;
  }
}

TEST_F(CliTest, AttackSingleTextOverHttp) {
  EmbeddingTable table(2);
  table.add("good", {1.0, 0.0});
  testing::TestModelServer server(model(), std::move(table));
  const Result r = run("attack --victim " + server.url() + " --encoder " +
                       server.url() + " --synonyms " + synonyms_ +
                       " --text 'Good film' --label 0");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("status"), "success");
  EXPECT_EQ(j.at("adversarial_text"), "Bad film");
  EXPECT_EQ(j.at("method"), "bu-spo");
}

TEST_F(CliTest, ServeCheckPassesAgainstConformingServer) {
  EmbeddingTable table(2);
  table.add("good", {1.0, 0.0});
  testing::TestModelServer server(model(), std::move(table));
  const Result r = run("serve-check --victim " + server.url());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST_F(CliTest, ServeCheckFlagsBrokenServer) {
  EmbeddingTable table(2);
  table.add("good", {1.0, 0.0});
  testing::TestModelServer server(model(), std::move(table),
                                  testing::ServerFault::kBadDistribution);
  const Result r = run("serve-check --victim " + server.url());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace spo
