#include "spo/eval.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace spo {

namespace {

constexpr std::size_t kCleanBatch = 64;

struct Pending {
  std::size_t index;  // into dataset
  Document annotated;
  LabelDistribution clean;
};

DocumentRecord errored_record(const Document& doc, const std::string& what) {
  DocumentRecord record;
  record.id = doc.id;
  record.original_text = doc.text();
  record.gold_label = doc.gold_label;
  record.status = AttackStatus::kError;
  record.error = what;
  return record;
}

std::string format_optional(const std::optional<double>& value,
                            const char* fmt) {
  if (!value) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, *value);
  return buf;
}

Replacement replacement_from_json(const nlohmann::json& j) {
  const auto span = j.at("span").get<std::vector<std::size_t>>();
  if (span.size() != 2 || span[1] < span[0]) {
    throw std::invalid_argument("bad replacement span");
  }
  return {{span[0], span[1] - span[0] + 1},
          j.at("original").get<std::string>(),
          j.at("substitute").get<std::string>()};
}

}  // namespace

DocumentRecord make_record(const Document& doc, const AttackOutcome& outcome) {
  DocumentRecord record;
  record.id = doc.id;
  record.original_text = doc.text();
  if (outcome.adversarial) record.adversarial_text = outcome.adversarial->text();
  record.gold_label = doc.gold_label;
  record.clean_label = outcome.clean_label;
  record.predicted_label = outcome.predicted_label;
  record.status = outcome.status;
  record.words_replaced = outcome.words_replaced;
  record.use_score = outcome.use_score;
  record.queries = outcome.queries;
  record.generations_used = outcome.generations_used;
  record.replacements = outcome.replaced_units;
  record.error = outcome.error;
  return record;
}

void aggregate(RunReport& report) {
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const DocumentRecord& a, const DocumentRecord& b) {
                     return a.id < b.id;
                   });
  report.n_total = report.records.size();
  report.n_correct = report.n_success = report.n_skipped = report.n_errored = 0;
  double words = 0.0, similarity = 0.0, queries = 0.0;
  for (const auto& record : report.records) {
    switch (record.status) {
      case AttackStatus::kSuccess:
        ++report.n_success;
        words += record.words_replaced;
        similarity += record.use_score;
        [[fallthrough]];
      case AttackStatus::kFailure:
        ++report.n_correct;
        queries += static_cast<double>(record.queries);
        break;
      case AttackStatus::kSkipped:
        ++report.n_skipped;
        break;
      case AttackStatus::kError:
        ++report.n_errored;
        break;
    }
  }
  report.asr = report.n_correct == 0
                   ? 0.0
                   : static_cast<double>(report.n_success) /
                         static_cast<double>(report.n_correct);
  report.awr.reset();
  report.mean_use.reset();
  if (report.n_success > 0) {
    report.awr = words / static_cast<double>(report.n_success);
    report.mean_use = similarity / static_cast<double>(report.n_success);
  }
  report.mean_queries = report.n_correct == 0
                            ? 0.0
                            : queries / static_cast<double>(report.n_correct);
}

RunReport run_suite(const std::vector<Document>& dataset,
                    const Lexicon& lexicon, ClassifierHandle& handle,
                    const SentenceEncoder* encoder, const AttackConfig& config,
                    const SuiteOptions& options) {
  const Attacker attacker(lexicon, handle, encoder, config);
  RunReport report;
  report.method = std::string(method_name(config.method));
  report.model_id = options.model_id;
  report.target_label = config.mode.target_label;
  report.max_replacements = config.max_replacements;
  report.seed = config.seed;

  // Clean pass, in dataset order, until `limit` attackable documents exist.
  std::vector<Pending> pending;
  std::vector<DocumentRecord> records;
  auto want_more = [&] {
    return !options.limit || pending.size() < *options.limit;
  };
  auto admit = [&](std::size_t i, Document annotated, LabelDistribution clean) {
    const Document& doc = dataset[i];
    if (doc.gold_label >= handle.num_labels()) {
      records.push_back(errored_record(doc, "gold label outside [0, K)"));
      return;
    }
    const bool attackable =
        argmax_label(clean) == doc.gold_label &&
        !(config.mode.targeted() && *config.mode.target_label == doc.gold_label);
    if (attackable && want_more()) {
      pending.push_back({i, std::move(annotated), std::move(clean)});
    } else if (!attackable) {
      QueryTally one{1, 0};
      records.push_back(
          make_record(doc, attacker.attack_classified(annotated, clean, one)));
    }
  };

  std::size_t next = 0;
  while (next < dataset.size() && want_more()) {
    // With a limit, classify one at a time so no query is spent past it.
    const std::size_t batch =
        options.limit ? 1 : std::min(kCleanBatch, dataset.size() - next);
    std::vector<Document> annotated(dataset.begin() + next,
                                    dataset.begin() + next + batch);
    for (auto& doc : annotated) lexicon.annotate(doc);
    try {
      auto clean = handle.classify_batch(annotated);
      for (std::size_t j = 0; j < batch; ++j) {
        admit(next + j, std::move(annotated[j]), std::move(clean[j]));
      }
    } catch (const std::exception&) {
      // Isolate the failing documents.
      for (std::size_t j = 0; j < batch; ++j) {
        try {
          auto clean = handle.classify(annotated[j]);
          admit(next + j, std::move(annotated[j]), std::move(clean));
        } catch (const std::exception& e) {
          records.push_back(errored_record(dataset[next + j], e.what()));
        }
      }
    }
    next += batch;
  }

  std::vector<DocumentRecord> attacked(pending.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t i = cursor++; i < pending.size(); i = cursor++) {
      const Pending& item = pending[i];
      const Document& doc = dataset[item.index];
      try {
        QueryTally tally{1, 0};
        attacked[i] = make_record(
            doc, attacker.attack_classified(item.annotated, item.clean, tally));
      } catch (const std::exception& e) {
        attacked[i] = errored_record(doc, e.what());
      }
    }
  };
  const std::size_t jobs =
      std::max<std::size_t>(1, std::min(options.jobs, pending.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }

  records.insert(records.end(), std::make_move_iterator(attacked.begin()),
                 std::make_move_iterator(attacked.end()));
  report.records = std::move(records);
  aggregate(report);
  return report;
}

nlohmann::json replacement_to_json(const Replacement& replacement) {
  return {{"span",
           {replacement.span.begin,
            replacement.span.begin + replacement.span.length - 1}},
          {"original", replacement.original},
          {"substitute", replacement.substitute}};
}

nlohmann::json record_to_json(const DocumentRecord& record) {
  nlohmann::json replacements = nlohmann::json::array();
  for (const auto& r : record.replacements) {
    replacements.push_back(replacement_to_json(r));
  }
  nlohmann::json j = {
      {"id", record.id},
      {"original_text", record.original_text},
      {"adversarial_text", record.adversarial_text
                               ? nlohmann::json(*record.adversarial_text)
                               : nlohmann::json(nullptr)},
      {"gold_label", record.gold_label},
      {"clean_label", record.clean_label},
      {"predicted_label", record.predicted_label},
      {"status", std::string(status_name(record.status))},
      {"success", record.success()},
      {"words_replaced", record.words_replaced},
      {"use_score", record.use_score},
      {"queries", record.queries},
      {"generations_used", record.generations_used},
      {"replacements", std::move(replacements)},
  };
  if (!record.error.empty()) j["error"] = record.error;
  return j;
}

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& record : report.records) {
    records.push_back(record_to_json(record));
  }
  auto optional_number = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {
      {"method", report.method},
      {"model_id", report.model_id},
      {"mode", report.target_label ? "targeted" : "untargeted"},
      {"target_label", report.target_label ? nlohmann::json(*report.target_label)
                                           : nlohmann::json(nullptr)},
      {"max_replacements", report.max_replacements},
      {"seed", report.seed},
      {"n_total", report.n_total},
      {"n_correct", report.n_correct},
      {"n_success", report.n_success},
      {"n_skipped", report.n_skipped},
      {"n_errored", report.n_errored},
      {"asr", report.asr},
      {"awr", optional_number(report.awr)},
      {"mean_use", optional_number(report.mean_use)},
      {"mean_queries", report.mean_queries},
      {"records", std::move(records)},
  };
}

std::string render_table(const RunReport& report) {
  std::vector<std::pair<std::string, std::string>> rows = {
      {"method", report.method},
      {"model", report.model_id.empty() ? "-" : report.model_id},
      {"mode", report.target_label
                   ? "targeted -> " + std::to_string(*report.target_label)
                   : "untargeted"},
      {"documents", std::to_string(report.n_total)},
      {"clean-correct", std::to_string(report.n_correct)},
      {"successes", std::to_string(report.n_success)},
      {"skipped", std::to_string(report.n_skipped)},
      {"errored", std::to_string(report.n_errored)},
      {"ASR", format_optional(report.asr * 100.0, "%.2f%%")},
      {"AWR", format_optional(report.awr, "%.3f")},
      {"mean USE", format_optional(report.mean_use, "%.4f")},
      {"mean queries", format_optional(report.mean_queries, "%.1f")},
  };
  std::size_t width = 0;
  for (const auto& [key, value] : rows) width = std::max(width, key.size());
  std::ostringstream out;
  for (const auto& [key, value] : rows) {
    out << key << std::string(width - key.size() + 2, ' ') << value << '\n';
  }
  return out.str();
}

void export_adversarial(const RunReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write export: " + path);
  for (const auto& record : report.records) {
    if (!record.attacked()) continue;
    nlohmann::json replacements = nlohmann::json::array();
    for (const auto& r : record.replacements) {
      replacements.push_back(replacement_to_json(r));
    }
    const nlohmann::json j = {
        {"id", record.id},
        {"original_text", record.original_text},
        {"adversarial_text", record.adversarial_text
                                 ? nlohmann::json(*record.adversarial_text)
                                 : nlohmann::json(nullptr)},
        {"gold_label", record.gold_label},
        {"predicted_label", record.predicted_label},
        {"success", record.success()},
        {"words_replaced", record.words_replaced},
        {"use_score", record.use_score},
        {"queries", record.queries},
        {"replacements", std::move(replacements)},
    };
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<DocumentRecord> load_export(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open export: " + path);
  std::vector<DocumentRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DocumentRecord record;
      record.id = j.at("id").get<std::string>();
      record.original_text = j.at("original_text").get<std::string>();
      if (!j.at("adversarial_text").is_null()) {
        record.adversarial_text = j["adversarial_text"].get<std::string>();
      }
      record.gold_label = j.at("gold_label").get<int>();
      record.clean_label = record.gold_label;
      record.predicted_label = j.at("predicted_label").get<int>();
      record.status = j.at("success").get<bool>() ? AttackStatus::kSuccess
                                                  : AttackStatus::kFailure;
      record.words_replaced = j.at("words_replaced").get<int>();
      record.use_score = j.at("use_score").get<double>();
      record.queries = j.at("queries").get<std::uint64_t>();
      for (const auto& r : j.at("replacements")) {
        record.replacements.push_back(replacement_from_json(r));
      }
      records.push_back(std::move(record));
    } catch (const std::exception& e) {
      throw FormatError(path, line_no, e.what());
    }
  }
  return records;
}

}  // namespace spo
