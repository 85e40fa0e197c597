#pragma once

#include <vector>

#include "pvml/dataset.hpp"
#include "support.hpp"

namespace testing {

/// 50 copies each of x = -1 -> "n" and x = 1 -> "p".
inline pvml::Dataset separable_1d() {
  std::vector<pvml::Example> examples;
  for (int i = 0; i < 50; ++i) {
    examples.push_back(ex({{"x", -1.0}}, lab("n")));
    examples.push_back(ex({{"x", 1.0}}, lab("p")));
  }
  return dataset_of(std::move(examples));
}

inline pvml::Dataset xor_data() {
  std::vector<pvml::Example> examples;
  for (int rep = 0; rep < 5; ++rep) {
    examples.push_back(ex({{"a", 0.0}, {"b", 0.0}}, lab("no")));
    examples.push_back(ex({{"a", 1.0}, {"b", 1.0}}, lab("no")));
    examples.push_back(ex({{"a", 0.0}, {"b", 1.0}}, lab("yes")));
    examples.push_back(ex({{"a", 1.0}, {"b", 0.0}}, lab("yes")));
  }
  return dataset_of(std::move(examples));
}

/// 8x8 grid labelled by the diagonal x + y > 7; no single stump separates it.
inline pvml::Dataset diagonal_grid() {
  std::vector<pvml::Example> examples;
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      examples.push_back(ex({{"x", static_cast<double>(x)}, {"y", static_cast<double>(y)}}, lab(x + y > 7 ? "hi" : "lo")));
    }
  }
  return dataset_of(std::move(examples));
}

}  // namespace testing
