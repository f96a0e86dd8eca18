#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "spo/encoder.h"
#include "spo/eval.h"
#include "spo/lexicon.h"
#include "spo/search.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace py = pybind11;

namespace {

// Resources, victim and configuration bundled for repeated attacks.
class Engine {
 public:
  Engine(const std::string& victim, const std::string& method,
         std::optional<std::string> encoder, spo::ResourcePaths resources,
         int max_replacements, std::optional<int> targeted,
         std::uint64_t seed, bool skip_stopwords, bool cache)
      : lexicon_(spo::load_resources(resources)),
        handle_(spo::open_victim(victim), cache),
        victim_(victim) {
    const auto parsed = spo::parse_method(method);
    if (!parsed) throw std::invalid_argument("unknown method: " + method);
    config_.method = *parsed;
    config_.max_replacements = max_replacements;
    config_.seed = seed;
    if (targeted) config_.mode = spo::AttackMode::targeted_at(*targeted);
    config_.stopword_skip = skip_stopwords;
    if (skip_stopwords) config_.stopwords = spo::default_stopwords();
    if (encoder) encoder_ = spo::open_encoder(*encoder);
    config_.validate();
  }

  std::string attack(const std::string& text, std::optional<int> label) {
    spo::Document doc = spo::make_document(text, 0, "py");
    if (doc.tokens.empty()) throw std::invalid_argument("empty text");
    lexicon_.annotate(doc);
    spo::QueryTally tally;
    const spo::LabelDistribution clean = handle_.classify(doc, &tally);
    doc.gold_label = label ? *label : spo::argmax_label(clean);
    if (doc.gold_label < 0 || doc.gold_label >= handle_.num_labels()) {
      throw std::invalid_argument("label outside [0, K)");
    }
    const spo::Attacker attacker(lexicon_, handle_, encoder_.get(), config_);
    py::gil_scoped_release release;
    const auto outcome = attacker.attack_classified(doc, clean, tally);
    return spo::record_to_json(spo::make_record(doc, outcome)).dump();
  }

  std::string evaluate(const std::string& dataset, std::size_t jobs,
                       std::optional<std::size_t> limit) {
    const auto docs = spo::load_dataset(dataset);
    spo::SuiteOptions options;
    options.jobs = jobs;
    options.limit = limit;
    options.model_id = victim_;
    py::gil_scoped_release release;
    return spo::report_to_json(spo::run_suite(docs, lexicon_, handle_,
                                              encoder_.get(), config_, options))
        .dump();
  }

  std::vector<std::vector<double>> classify(const std::vector<std::string>& texts) {
    std::vector<spo::Document> docs;
    for (const auto& t : texts) docs.push_back(spo::make_document(t, 0));
    std::vector<std::vector<double>> out;
    for (const auto& d : handle_.classify_batch(docs)) out.push_back(d.probs);
    return out;
  }

  int num_labels() const { return handle_.num_labels(); }
  std::uint64_t query_count() const { return handle_.query_count(); }

 private:
  spo::Lexicon lexicon_;
  spo::ClassifierHandle handle_;
  std::shared_ptr<const spo::SentenceEncoder> encoder_;
  spo::AttackConfig config_;
  std::string victim_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Black-box adversarial text attacks";

  py::register_exception<spo::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<spo::TransportError>(m, "TransportError", PyExc_ConnectionError);
  py::register_exception<spo::ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  py::class_<Engine>(m, "Engine")
      .def(py::init([](const std::string& victim, const std::string& method,
                       std::optional<std::string> encoder,
                       std::optional<std::string> synonyms,
                       std::optional<std::string> sememes,
                       std::optional<std::string> named_entities,
                       std::optional<std::string> pos, int max_replacements,
                       std::optional<int> targeted, std::uint64_t seed,
                       bool skip_stopwords, bool cache) {
             spo::ResourcePaths paths;
             paths.synonyms = synonyms.value_or("");
             paths.sememes = sememes.value_or("");
             paths.named_entities = named_entities.value_or("");
             paths.pos = pos.value_or("");
             return std::make_unique<Engine>(victim, method, encoder, paths,
                                             max_replacements, targeted, seed,
                                             skip_stopwords, cache);
           }),
           py::arg("victim"), py::kw_only(), py::arg("method") = "bu-spo",
           py::arg("encoder") = py::none(), py::arg("synonyms") = py::none(),
           py::arg("sememes") = py::none(), py::arg("named_entities") = py::none(),
           py::arg("pos") = py::none(), py::arg("max_replacements") = 20,
           py::arg("targeted") = py::none(), py::arg("seed") = 0,
           py::arg("skip_stopwords") = false, py::arg("cache") = false)
      .def("attack_json", &Engine::attack, py::arg("text"),
           py::arg("label") = py::none())
      .def("evaluate_json", &Engine::evaluate, py::arg("dataset"),
           py::arg("jobs") = 1, py::arg("limit") = py::none())
      .def("classify", &Engine::classify, py::arg("texts"))
      .def_property_readonly("num_labels", &Engine::num_labels)
      .def_property_readonly("query_count", &Engine::query_count);

  m.def("tokenize", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& t : spo::tokenize(text)) out.push_back(t.surface);
    return out;
  });
  m.def("softmax", [](const std::vector<double>& scores, double temperature) {
    return spo::score_softmax(scores, temperature).probs;
  }, py::arg("scores"), py::arg("temperature") = 1.0);
  m.def("use_score", [](const std::string& encoder, const std::string& a,
                        const std::string& b) {
    const auto enc = spo::open_encoder(encoder);
    return spo::use_score(*enc, spo::make_document(a, 0), spo::make_document(b, 0));
  }, py::arg("encoder"), py::arg("original"), py::arg("adversarial"));
  m.def("methods", [] {
    return std::vector<std::string>{"u-spo", "hu-spo", "bu-spo", "bu-spof",
                                    "static", "rand", "wsa"};
  });
}
