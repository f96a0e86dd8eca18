// Command-line front-end: attack one document, evaluate a dataset, or check a
// model server for wire-protocol conformance.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spo/encoder.h"
#include "spo/eval.h"
#include "spo/lexicon.h"
#include "spo/search.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

const std::vector<std::string> kMethodNames = {
    "u-spo", "hu-spo", "bu-spo", "bu-spof", "static", "rand", "wsa"};

struct CommonFlags {
  std::string victim;
  std::string encoder;
  std::string embeddings;
  spo::ResourcePaths resources;
  std::string method = "bu-spo";
  int max_replacements = 20;
  std::optional<int> targeted;
  std::uint64_t seed = 0;
  bool skip_stopwords = false;
  bool cache = false;
};

void add_common_flags(CLI::App& cmd, CommonFlags& flags) {
  cmd.add_option("--victim", flags.victim,
                 "Victim model: http://HOST:PORT or builtin:linear:PATH")
      ->required();
  auto* encoder = cmd.add_option(
      "--encoder", flags.encoder,
      "Sentence encoder: static:PATH or http://HOST:PORT");
  auto* embeddings = cmd.add_option(
      "--embeddings", flags.embeddings,
      "Embedding text file for the static encoder (same as static:PATH)");
  encoder->excludes(embeddings);
  cmd.add_option("--synonyms", flags.resources.synonyms, "synonyms.tsv");
  cmd.add_option("--sememes", flags.resources.sememes, "sememes.tsv");
  cmd.add_option("--ne", flags.resources.named_entities, "ne.tsv");
  cmd.add_option("--pos", flags.resources.pos, "pos.tsv");
  cmd.add_option("--method", flags.method, "Attack method")
      ->check(CLI::IsMember(kMethodNames))
      ->capture_default_str();
  cmd.add_option("--max-replacements", flags.max_replacements,
                 "Replacement cap M")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--targeted", flags.targeted,
                 "Targeted attack towards LABEL")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--seed", flags.seed, "Seed for the rand baseline")
      ->capture_default_str();
  cmd.add_flag("--skip-stopwords", flags.skip_stopwords,
               "Never attack common function words");
  cmd.add_flag("--cache", flags.cache,
               "Cache victim answers per text (hits are not counted as "
               "queries)");
}

struct Runtime {
  spo::Lexicon lexicon;
  std::shared_ptr<const spo::Classifier> backend;
  std::unique_ptr<spo::ClassifierHandle> handle;
  std::shared_ptr<const spo::SentenceEncoder> encoder;
  spo::AttackConfig config;
};

Runtime open_runtime(const CommonFlags& flags) {
  Runtime rt;
  rt.lexicon = spo::load_resources(flags.resources);
  rt.backend = spo::open_victim(flags.victim);
  rt.handle = std::make_unique<spo::ClassifierHandle>(rt.backend, flags.cache);
  if (!flags.encoder.empty()) {
    rt.encoder = spo::open_encoder(flags.encoder);
  } else if (!flags.embeddings.empty()) {
    rt.encoder = spo::open_encoder("static:" + flags.embeddings);
  }
  rt.config.method = *spo::parse_method(flags.method);
  rt.config.max_replacements = flags.max_replacements;
  rt.config.seed = flags.seed;
  if (flags.targeted) rt.config.mode = spo::AttackMode::targeted_at(*flags.targeted);
  rt.config.stopword_skip = flags.skip_stopwords;
  if (flags.skip_stopwords) rt.config.stopwords = spo::default_stopwords();
  return rt;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

int run_attack(const CommonFlags& flags, const std::string& text_flag,
               const std::string& file_flag, std::optional<int> label) {
  Runtime rt = open_runtime(flags);
  const std::string text = text_flag.empty() ? read_file(file_flag) : text_flag;
  spo::Document doc = spo::make_document(text, 0, "cli");
  if (doc.tokens.empty()) throw std::runtime_error("empty input text");
  rt.lexicon.annotate(doc);

  spo::QueryTally tally;
  const spo::LabelDistribution clean = rt.handle->classify(doc, &tally);
  // Without a gold label the clean prediction plays that role.
  doc.gold_label = label ? *label : spo::argmax_label(clean);
  if (doc.gold_label >= rt.handle->num_labels()) {
    throw std::runtime_error("--label outside [0, K)");
  }
  const spo::Attacker attacker(rt.lexicon, *rt.handle, rt.encoder.get(),
                               rt.config);
  const spo::AttackOutcome outcome =
      attacker.attack_classified(doc, clean, tally);
  nlohmann::json j = spo::record_to_json(spo::make_record(doc, outcome));
  j["method"] = flags.method;
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int run_eval(const CommonFlags& flags, const std::string& dataset_path,
             const std::string& out_path, const std::string& export_path,
             std::optional<std::size_t> limit, std::size_t jobs) {
  Runtime rt = open_runtime(flags);
  const auto dataset = spo::load_dataset(dataset_path);
  spo::SuiteOptions options;
  options.jobs = jobs;
  options.limit = limit;
  options.model_id = flags.victim;
  const spo::RunReport report =
      spo::run_suite(dataset, rt.lexicon, *rt.handle, rt.encoder.get(),
                     rt.config, options);
  if (!out_path.empty()) {
    write_file(out_path, spo::report_to_json(report).dump(2) + "\n");
  }
  if (!export_path.empty()) spo::export_adversarial(report, export_path);
  std::cout << spo::render_table(report);
  return 0;
}

// Returns the number of failed checks.
int run_serve_check(const std::string& victim_url, std::string encoder_url) {
  if (encoder_url.empty()) encoder_url = victim_url;
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << ": " << detail;
    std::cout << std::endl;
    if (!ok) ++failures;
  };

  const std::vector<spo::Document> probes = {
      spo::make_document("the movie was good", 0),
      spo::make_document("a terrible , boring film", 0),
      spo::make_document("news about the market", 0),
  };

  std::unique_ptr<spo::HttpClassifier> victim;
  try {
    victim = std::make_unique<spo::HttpClassifier>(victim_url);
    report("/info", true,
           "num_labels=" + std::to_string(victim->num_labels()));
  } catch (const std::exception& e) {
    report("/info", false, e.what());
  }
  if (victim) {
    try {
      spo::ClassifierHandle handle(
          std::shared_ptr<const spo::Classifier>(std::move(victim)));
      const auto first = handle.classify_batch(probes);
      report("/classify rows", first.size() == probes.size(),
             std::to_string(first.size()) + " rows");
      bool sums = true;
      for (const auto& d : first) sums = sums && d.is_valid();
      report("/classify rows sum to 1", sums, "");
      const auto second = handle.classify_batch(probes);
      bool same = true;
      for (std::size_t i = 0; i < first.size(); ++i) {
        same = same && first[i].probs == second[i].probs;
      }
      report("/classify deterministic", same, "");
      bool loop_equal = true;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto single = handle.classify(probes[i]);
        for (std::size_t k = 0; k < single.probs.size(); ++k) {
          loop_equal = loop_equal &&
                       std::abs(single.probs[k] - first[i].probs[k]) <= 1e-9;
        }
      }
      report("/classify batch equals per-text", loop_equal, "");
    } catch (const std::exception& e) {
      report("/classify", false, e.what());
    }
  }
  try {
    spo::HttpEncoder encoder(encoder_url);
    const auto vectors = encoder.encode_batch(probes);
    bool fixed = vectors.size() == probes.size();
    for (const auto& v : vectors) fixed = fixed && v.size() == vectors[0].size();
    report("/encode", fixed,
           "d=" + std::to_string(vectors.empty() ? 0 : vectors[0].size()));
  } catch (const std::exception& e) {
    report("/encode", false, e.what());
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box adversarial text attacks (SPO / SPOF)"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonFlags attack_flags;
  std::string text, file;
  std::optional<int> label;
  auto* attack = app.add_subcommand("attack", "Attack a single document");
  add_common_flags(*attack, attack_flags);
  auto* text_opt = attack->add_option("--text", text, "Text to attack");
  auto* file_opt =
      attack->add_option("--file", file, "Plain-text file to attack");
  text_opt->excludes(file_opt);
  attack->add_option("--label", label,
                     "Gold label (default: the clean prediction)")
      ->check(CLI::NonNegativeNumber);

  CommonFlags eval_flags;
  std::string dataset, out, export_path;
  std::optional<std::size_t> limit;
  std::size_t jobs = 1;
  auto* eval = app.add_subcommand("eval", "Run an attack over a dataset");
  add_common_flags(*eval, eval_flags);
  eval->add_option("--dataset", dataset, "JSON-lines dataset")->required();
  eval->add_option("--out", out, "Write the JSON report here");
  eval->add_option("--export", export_path,
                   "Write adversarial examples as JSON lines");
  eval->add_option("--limit", limit,
                   "Attack only the first N clean-correct documents")
      ->check(CLI::PositiveNumber);
  eval->add_option("--jobs", jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string check_victim, check_encoder;
  auto* serve_check = app.add_subcommand(
      "serve-check", "Probe /info, /classify and /encode for conformance");
  serve_check->add_option("--victim", check_victim, "http://HOST:PORT")
      ->required();
  serve_check->add_option("--encoder", check_encoder,
                          "http://HOST:PORT (default: the victim URL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  if (attack->parsed() && text.empty() && file.empty()) {
    std::cerr << "attack: one of --text or --file is required\n"
              << attack->help();
    return kUsageError;
  }
  if (serve_check->parsed() && !check_victim.starts_with("http://")) {
    std::cerr << "serve-check: --victim must be an http:// URL\n";
    return kUsageError;
  }

  try {
    if (attack->parsed()) return run_attack(attack_flags, text, file, label);
    if (eval->parsed()) {
      return run_eval(eval_flags, dataset, out, export_path, limit, jobs);
    }
    return run_serve_check(check_victim, check_encoder) == 0 ? 0
                                                             : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntimeError;
  }
}
