#ifndef SPO_TESTS_TESTING_FIXTURES_H_
#define SPO_TESTS_TESTING_FIXTURES_H_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "spo/encoder.h"
#include "spo/lexicon.h"
#include "spo/types.h"
#include "spo/victim.h"

namespace spo::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spo_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string write(const std::string& name, const std::string& content) const {
    const auto file = path_ / name;
    std::ofstream out(file, std::ios::binary);
    out << content;
    return file.string();
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::shared_ptr<ClassifierHandle> make_handle(LinearMockModel model) {
  return std::make_shared<ClassifierHandle>(
      std::make_shared<LinearMockModel>(std::move(model)));
}

inline Document annotated(const Lexicon& lexicon, const std::string& text,
                          int gold_label, std::string id = "doc") {
  Document doc = make_document(text, gold_label, std::move(id));
  lexicon.annotate(doc);
  return doc;
}

}  // namespace spo::testing

#endif  // SPO_TESTS_TESTING_FIXTURES_H_
