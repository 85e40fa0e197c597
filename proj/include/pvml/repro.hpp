#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/model.hpp"
#include "pvml/provenance.hpp"

namespace pvml {

using SourceFactory = std::function<std::unique_ptr<DataSource>(const ConfigView&)>;
using TrainerFactory = std::function<std::unique_ptr<Trainer>(const ConfigView&)>;

/// Open registries keyed by class name. pvml.CsvLoader and the linear, CART
/// and ensemble trainers are registered from the start; user classes may be
/// added at startup. Lookups are safe from several threads.
void register_loader_class(const std::string& class_name, SourceFactory factory);
void register_trainer_class(const std::string& class_name, TrainerFactory factory);
bool is_loader_class(const std::string& class_name);
bool is_trainer_class(const std::string& class_name);

/// Builds the trainer described by `view` through the registry. Throws
/// UnknownClass or MissingProperty.
std::unique_ptr<Trainer> build_trainer(const ConfigView& view);

/// Instantiates the first registered loader record. Throws UnknownClass when
/// there is none, MissingProperty for incomplete records.
std::unique_ptr<DataSource> reconstruct_source(const std::vector<ConfigRecord>& records);
/// As above from a source provenance; also throws ResourceChanged when the
/// reloaded resource hash differs from the recorded one.
std::unique_ptr<DataSource> reconstruct_source(const ProvValue& source_provenance);

/// Builds the registered trainer record that no other trainer record refers
/// to, so a config extracted from a whole model works too.
/// The invocation counter starts at 0.
std::unique_ptr<Trainer> reconstruct_trainer(const std::vector<ConfigRecord>& records);
/// As above from a trainer provenance, with the counter set to the recorded
/// invocation count.
std::unique_ptr<Trainer> reconstruct_trainer(const ProvValue& trainer_provenance);

/// Rebuilds the training dataset (source, then each recorded transformation
/// refit in order) described by a data provenance.
Dataset reconstruct_dataset(const ProvValue& data_provenance);

/// Retrains from a model provenance. Throws ReproductionMismatch when the new
/// provenance hash differs, plus any reconstruction error.
ModelPtr reproduce_model(const ProvValue& model_provenance);

}  // namespace pvml
