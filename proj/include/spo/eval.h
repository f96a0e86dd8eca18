#ifndef SPO_EVAL_H_
#define SPO_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spo/encoder.h"
#include "spo/lexicon.h"
#include "spo/search.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace spo {

struct DocumentRecord {
  std::string id;
  std::string original_text;
  std::optional<std::string> adversarial_text;
  int gold_label = 0;
  int clean_label = 0;
  int predicted_label = 0;
  AttackStatus status = AttackStatus::kFailure;
  int words_replaced = 0;
  double use_score = 0.0;
  std::uint64_t queries = 0;
  int generations_used = 0;
  std::vector<Replacement> replacements;
  std::string error;

  bool success() const { return status == AttackStatus::kSuccess; }
  // Success or failure; skipped and errored documents were not attacked.
  bool attacked() const {
    return status == AttackStatus::kSuccess || status == AttackStatus::kFailure;
  }
};

struct RunReport {
  std::string method;
  std::string model_id;
  std::optional<int> target_label;
  int max_replacements = 0;
  std::uint64_t seed = 0;

  std::size_t n_total = 0;    // documents examined
  std::size_t n_correct = 0;  // attacked: clean-correct and not errored
  std::size_t n_success = 0;
  std::size_t n_skipped = 0;  // misclassified when clean, or gold == target
  std::size_t n_errored = 0;

  double asr = 0.0;  // n_success / n_correct, 0 when n_correct == 0
  std::optional<double> awr;       // over successes only
  std::optional<double> mean_use;  // over successes only
  double mean_queries = 0.0;       // over attacked documents

  std::vector<DocumentRecord> records;  // sorted by id
};

struct SuiteOptions {
  std::size_t jobs = 1;
  // Attack only the first N clean-correct documents.
  std::optional<std::size_t> limit;
  std::string model_id;
};

// Sorts records by id and recomputes every count and metric from them.
void aggregate(RunReport& report);

// Per-document classifier failures mark that document errored and the run
// continues. Deterministic for a fixed configuration, whatever `jobs` is.
RunReport run_suite(const std::vector<Document>& dataset,
                    const Lexicon& lexicon, ClassifierHandle& handle,
                    const SentenceEncoder* encoder, const AttackConfig& config,
                    const SuiteOptions& options = {});

DocumentRecord make_record(const Document& doc, const AttackOutcome& outcome);

nlohmann::json replacement_to_json(const Replacement& replacement);
nlohmann::json record_to_json(const DocumentRecord& record);
nlohmann::json report_to_json(const RunReport& report);
// Aligned plain-text summary.
std::string render_table(const RunReport& report);

// One JSON object per attacked document, one per line.
void export_adversarial(const RunReport& report, const std::string& path);
std::vector<DocumentRecord> load_export(const std::string& path);

}  // namespace spo

#endif  // SPO_EVAL_H_
