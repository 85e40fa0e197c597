#include "pvml/domain.hpp"

#include <algorithm>
#include <cmath>

#include "pvml/error.hpp"

namespace pvml {

namespace {

struct Moments {
  double min;
  double max;
  double mean;
  double variance;
};

// Two passes: mean first, then centred squares.
Moments moments(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double mean = std::clamp(sum / n, *lo, *hi);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {*lo, *hi, mean, ss / n};
}

}  // namespace

FeatureDomain FeatureDomain::from_examples(std::span<const Example> examples) {
  std::map<std::string, std::vector<double>> observed;
  for (const auto& e : examples) {
    for (const auto& f : e.features()) observed[f.name].push_back(f.value);
  }
  std::vector<FeatureStats> stats;
  stats.reserve(observed.size());
  for (auto& [name, values] : observed) {
    const Moments m = moments(values);
    stats.push_back({name, stats.size(), static_cast<std::int64_t>(values.size()), m.min, m.max, m.mean,
                     m.variance});
  }
  FeatureDomain d;
  d.features_ = std::move(stats);
  return d;
}

FeatureDomain FeatureDomain::from_stats(std::vector<FeatureStats> stats) {
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (i > 0 && !(stats[i - 1].name < stats[i].name)) {
      throw Error(ErrorCode::FormatError, "feature domain names must be sorted and unique");
    }
    stats[i].id = i;
  }
  FeatureDomain d;
  d.features_ = std::move(stats);
  return d;
}

std::optional<std::size_t> FeatureDomain::id_of(std::string_view name) const {
  const auto it = std::lower_bound(features_.begin(), features_.end(), name,
                                   [](const FeatureStats& s, std::string_view n) { return s.name < n; });
  if (it == features_.end() || it->name != name) return std::nullopt;
  return it->id;
}

SparseVector FeatureDomain::to_sparse(const Example& example) const {
  // Both sequences are sorted by name, so a merge walk suffices.
  SparseVector out;
  auto it = features_.begin();
  for (const auto& f : example.features()) {
    it = std::lower_bound(it, features_.end(), f.name,
                          [](const FeatureStats& s, const std::string& n) { return s.name < n; });
    if (it == features_.end()) break;
    if (it->name == f.name) out.emplace_back(static_cast<std::uint32_t>(it->id), f.value);
  }
  return out;
}

OutputDomain OutputDomain::from_examples(std::span<const Example> examples) {
  if (examples.empty()) return OutputDomain();
  const auto task = examples.front().output().task();
  for (const auto& e : examples) {
    if (e.output().task() != task) {
      throw Error(ErrorCode::MixedOutputTypes, "dataset mixes output types");
    }
  }
  if (!task) return OutputDomain();
  if (*task == Task::Categorical) {
    CategoricalDomain d;
    for (const auto& e : examples) ++d.counts[e.output().label()];
    return OutputDomain(std::move(d));
  }
  std::vector<double> targets;
  targets.reserve(examples.size());
  for (const auto& e : examples) targets.push_back(e.output().value());
  const Moments m = moments(targets);
  return OutputDomain(RealDomain{m.min, m.max, m.mean, m.variance, static_cast<std::int64_t>(targets.size())});
}

std::optional<Task> OutputDomain::task() const {
  if (std::holds_alternative<CategoricalDomain>(value_)) return Task::Categorical;
  if (std::holds_alternative<RealDomain>(value_)) return Task::Real;
  return std::nullopt;
}

const CategoricalDomain& OutputDomain::categorical() const {
  if (const auto* d = std::get_if<CategoricalDomain>(&value_)) return *d;
  throw Error(ErrorCode::OutputTypeMismatch, "output domain is not categorical");
}

const RealDomain& OutputDomain::real() const {
  if (const auto* d = std::get_if<RealDomain>(&value_)) return *d;
  throw Error(ErrorCode::OutputTypeMismatch, "output domain is not real");
}

std::vector<std::string> OutputDomain::labels() const {
  std::vector<std::string> out;
  if (const auto* d = std::get_if<CategoricalDomain>(&value_)) {
    for (const auto& [label, count] : d->counts) out.push_back(label);
  }
  return out;
}

}  // namespace pvml
