#include "pvml/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pvml/columnar.hpp"
#include "pvml/csv.hpp"
#include "pvml/eval.hpp"
#include "pvml/persist.hpp"
#include "pvml/repro.hpp"
#include "pvml/transform.hpp"

namespace pvml::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::TaskMismatch:
    case ErrorCode::OutputTypeMismatch:
    case ErrorCode::InconsistentTask:
      return kTaskMismatch;
    case ErrorCode::ReproductionMismatch:
    case ErrorCode::ResourceChanged:
      return kReproductionMismatch;
    default:
      return kDataError;
  }
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

// Provenance records the absolute path so `reproduce` works from any directory.
std::string absolute_path(const std::string& path) { return std::filesystem::absolute(path).lexically_normal().string(); }

Dataset load_dataset(const std::string& data, const ColumnarSchema& schema, bool require_response) {
  const CsvSource source(absolute_path(data), schema, require_response);
  return build_dataset(source);
}

// Maps test data the way the model's training data was transformed.
Dataset as_model_input(const Model& model, Dataset dataset) {
  for (const auto& t : recorded_transformers(config_field(model.provenance(), "data"))) {
    dataset = apply_transformers(dataset, t);
  }
  return dataset;
}

struct Options {
  std::string data;
  std::string schema;
  std::string trainer;
  std::string transform;
  std::string model;
  std::string output;
  std::string report;
  std::string left;
  std::string right;
  bool redact = false;
};

int cmd_train(const Options& o, std::ostream& out) {
  const auto schema = parse_schema(read_file(o.schema));
  Dataset dataset = load_dataset(o.data, schema, true);
  if (!o.transform.empty()) {
    for (const auto& spec : parse_transform_specs(read_file(o.transform))) {
      const auto fitted = fit_transformers(dataset, spec);
      dataset = apply_transformers(dataset, fitted);
    }
  }
  auto trainer = reconstruct_trainer(parse_config(read_file(o.trainer)));
  const auto model = trainer->train(dataset);
  save_model(*model, o.output);
  out << "trained " << model->model_class() << " on " << dataset.size() << " examples -> " << o.output << "\n";
  out << "provenance-hash " << provenance_hash(model->provenance()) << "\n";
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto schema = parse_schema(read_file(o.schema));
  const auto model = load_model(o.model, schema.response_type);
  const Dataset dataset = as_model_input(*model, load_dataset(o.data, schema, false));
  const auto predictions = predict_batch(*model, dataset.examples());
  const auto labels = model->output_domain().labels();

  std::string csv = "row,prediction,features-used,features-total,warnings";
  for (const auto& l : labels) csv += "," + csv_escape("score:" + l);
  csv += "\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    std::string warnings;
    for (const auto& w : p.warnings) warnings += (warnings.empty() ? "" : ";") + w;
    csv += std::to_string(i) + ",";
    csv += csv_escape(model->task() == Task::Categorical ? p.output.label() : float_text(p.output.value()));
    csv += "," + std::to_string(p.features_used) + "," + std::to_string(p.features_total) + ",";
    csv += csv_escape(warnings);
    for (const auto& l : labels) {
      const auto it = p.scores.find(l);
      csv += "," + float_text(it == p.scores.end() ? 0.0 : it->second);
    }
    csv += "\n";
  }
  write_text(o.output, csv);
  out << "wrote " << predictions.size() << " predictions -> " << o.output << "\n";
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto schema = parse_schema(read_file(o.schema));
  const auto model = load_model(o.model, schema.response_type);
  const Dataset dataset = as_model_input(*model, load_dataset(o.data, schema, true));
  if (model->task() == Task::Categorical) {
    const auto ev = evaluate_classification(*model, dataset);
    write_text(o.report, evaluation_report(ev));
    out << "accuracy " << ev.accuracy << "\nmacro-f1 " << ev.macro_f1 << "\n";
  } else {
    const auto ev = evaluate_regression(*model, dataset);
    write_text(o.report, evaluation_report(ev));
    out << "rmse " << ev.rmse << "\nmae " << ev.mae << "\nr2 " << ev.r2 << "\n";
  }
  return kOk;
}

int cmd_inspect(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model, std::nullopt);
  if (!o.redact) {
    out << serialize_provenance(model->provenance(), 2) << "\n";
    return kOk;
  }
  const auto r = redact(model->provenance());
  nlohmann::json doc = {{"digest", r.digest}, {"provenance", nlohmann::json::parse(serialize_provenance(r.redacted))}};
  out << doc.dump(2) << "\n";
  return kOk;
}

int cmd_extract_config(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model, std::nullopt);
  const auto records = extract_configuration(model->provenance());
  write_text(o.output, serialize_config(records) + "\n");
  out << "wrote " << records.size() << " config records -> " << o.output << "\n";
  return kOk;
}

int cmd_reproduce(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model, std::nullopt);
  const auto reproduced = reproduce_model(model->provenance());
  save_model(*reproduced, o.output);
  out << "reproduced provenance-hash " << provenance_hash(reproduced->provenance()) << " -> " << o.output << "\n";
  return kOk;
}

int cmd_diff(const Options& o, std::ostream& out) {
  const auto a = load_model(o.left, std::nullopt);
  const auto b = load_model(o.right, std::nullopt);
  const auto entries = diff_provenance(a->provenance(), b->provenance());
  bool substantive = false;
  for (const auto& e : entries) {
    out << e.path << ": " << (e.left ? serialize_provenance(*e.left) : "<absent>") << " -> "
        << (e.right ? serialize_provenance(*e.right) : "<absent>") << (e.is_volatile ? " [volatile]" : "") << "\n";
    substantive = substantive || !e.is_volatile;
  }
  out << entries.size() << " difference(s), " << (substantive ? "substantive" : "volatile only") << "\n";
  return substantive ? kReproductionMismatch : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Provenance-tracking model training and inspection", "pvml"};
  app.require_subcommand(1, 1);
  Options o;

  auto* train = app.add_subcommand("train", "Train a model from a CSV file");
  train->add_option("--data", o.data, "Training CSV")->required();
  train->add_option("--schema", o.schema, "Schema config JSON")->required();
  train->add_option("--trainer", o.trainer, "Trainer config JSON")->required();
  train->add_option("--output", o.output, "Model file to write")->required();
  train->add_option("--transform", o.transform, "Transformation config JSON");

  auto* predict = app.add_subcommand("predict", "Write predictions for a CSV file");
  predict->add_option("--model", o.model, "Model file")->required();
  predict->add_option("--data", o.data, "Input CSV")->required();
  predict->add_option("--schema", o.schema, "Schema config JSON")->required();
  predict->add_option("--out", o.output, "Prediction CSV to write")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on a labelled CSV file");
  evaluate->add_option("--model", o.model, "Model file")->required();
  evaluate->add_option("--data", o.data, "Test CSV")->required();
  evaluate->add_option("--schema", o.schema, "Schema config JSON")->required();
  evaluate->add_option("--report", o.report, "JSON report to write")->required();

  auto* inspect = app.add_subcommand("inspect", "Print a model's provenance");
  inspect->add_option("--model", o.model, "Model file")->required();
  inspect->add_flag("--redact", o.redact, "Print the digest and a redacted tree");

  auto* extract = app.add_subcommand("extract-config", "Write the configuration records of a model");
  extract->add_option("--model", o.model, "Model file")->required();
  extract->add_option("--out", o.output, "Config JSON to write")->required();

  auto* reproduce = app.add_subcommand("reproduce", "Retrain a model from its provenance");
  reproduce->add_option("--model", o.model, "Model file")->required();
  reproduce->add_option("--output", o.output, "Model file to write")->required();

  auto* diff = app.add_subcommand("diff", "Compare the provenance of two models");
  diff->add_option("--left", o.left, "First model file")->required();
  diff->add_option("--right", o.right, "Second model file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) return cmd_train(o, out);
    if (predict->parsed()) return cmd_predict(o, out);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    if (inspect->parsed()) return cmd_inspect(o, out);
    if (extract->parsed()) return cmd_extract_config(o, out);
    if (reproduce->parsed()) return cmd_reproduce(o, out);
    if (diff->parsed()) return cmd_diff(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace pvml::cli
