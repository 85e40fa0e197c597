#pragma once

#include <unistd.h>

#include <filesystem>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/error.hpp"
#include "pvml/example.hpp"
#include "doctest.h"

namespace testing {

/// Code of the pvml::Error thrown by `fn`; fails the test when nothing is thrown.
inline pvml::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const pvml::Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return pvml::ErrorCode::InvalidValue;
}

inline std::string data_path(const std::string& name) { return std::string(PVML_TEST_DATA_DIR) + "/" + name; }

inline pvml::Example ex(std::initializer_list<std::pair<const char*, double>> features, pvml::Output output,
                        double weight = 1.0) {
  std::vector<pvml::FeatureValue> fv;
  for (const auto& [n, v] : features) fv.push_back({n, v});
  return pvml::make_example(std::move(fv), std::move(output), weight);
}

inline pvml::Output lab(const std::string& l) { return pvml::Output::categorical(l); }
inline pvml::Output real(double v) { return pvml::Output::real(v); }

inline pvml::Dataset dataset_of(std::vector<pvml::Example> examples, const std::string& description = "fixture") {
  const pvml::InMemorySource source(std::move(examples), description);
  return pvml::build_dataset(source);
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pvml-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
