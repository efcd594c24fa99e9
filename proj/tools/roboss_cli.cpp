#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "roboss/roboss.hpp"

using namespace roboss;

namespace {

constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// One subcommand's options. Values are kept as text so that a config
/// file, the command line and the emitted manifest share one form.
struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::set<std::string> transient;  // output paths and --config: never recorded
  std::vector<std::string> streams;  // named seed streams the command draws from

  Command& opt(const std::string& name, std::string fallback, const std::string& help) {
    values[name] = std::move(fallback);
    app->add_option("--" + name, values[name], help);
    return *this;
  }
  Command& path_out(const std::string& name, const std::string& help, bool required) {
    values[name] = "";
    transient.insert(name);
    auto* o = app->add_option("--" + name, values[name], help);
    if (required) o->required();
    return *this;
  }
  Command& flag(const std::string& name, const std::string& help) {
    flags[name] = false;
    app->add_flag("--" + name, flags[name], help);
    return *this;
  }

  const std::string& str(const std::string& name) const { return values.at(name); }
  bool on(const std::string& name) const { return flags.at(name); }
};

double to_double(const std::string& text, const std::string& name) {
  double v = 0.0;
  if (!try_parse_double(text, v)) throw ParameterError("--" + name + ": expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& text, const std::string& name) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParameterError("--" + name + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

/// "1,2,3" or an inclusive range "lo:hi:step".
std::vector<double> to_list(const std::string& text, const std::string& name) {
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ParameterError("--" + name + ": range must be lo:hi:step");
    const FGrid g{to_double(std::string(parts[0]), name), to_double(std::string(parts[1]), name),
                  to_double(std::string(parts[2]), name)};
    if (!(g.step > 0.0) || !(g.hi >= g.lo)) throw ParameterError("--" + name + ": need step > 0 and hi >= lo");
    for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g.at(i));
    return out;
  }
  for (auto part : split(text, ',')) out.push_back(to_double(std::string(part), name));
  return out;
}

std::vector<std::string> to_names(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  for (auto part : split(text, ',')) out.emplace_back(part);
  return out;
}

FGrid to_range(const std::string& text, const std::string& name) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ParameterError("--" + name + ": range must be lo:hi:step");
  FGrid g{to_double(std::string(parts[0]), name), to_double(std::string(parts[1]), name),
          to_double(std::string(parts[2]), name)};
  if (!(g.step > 0.0) || !(g.hi >= g.lo) || !std::isfinite(g.lo) || !std::isfinite(g.hi)) {
    throw ParameterError("--" + name + ": need finite bounds, step > 0 and hi >= lo");
  }
  return g;
}

DataFormat to_format(const std::string& text) {
  if (text == "csv") return DataFormat::CSV;
  if (text == "sparse") return DataFormat::SparseIndexValue;
  throw ParameterError("--format must be csv or sparse");
}

CorruptionMode to_mode(const std::string& text) {
  if (text == "outliers") return CorruptionMode::Outliers;
  if (text == "label-noise" || text == "labels") return CorruptionMode::LabelNoise;
  throw ParameterError("--mode must be outliers or label-noise");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void add_loss_options(Command& c) {
  c.opt("loss", "roboss", "roboss, hinge, pinball, truncated-hinge, truncated-pinball")
      .opt("a", "1", "RoBoSS shape a > 0")
      .opt("lambda", "1", "RoBoSS bound lambda > 0")
      .opt("tau", "0.5", "pinball slope")
      .opt("delta", "1", "truncated-hinge cap")
      .opt("delta1", "1", "truncated-pinball cap for u > 0")
      .opt("delta2", "0.25", "truncated-pinball cap for u < 0");
}

LossSpec loss_from(const Command& c) {
  LossSpec s;
  s.kind = parse_loss_kind(c.str("loss"));
  s.a = to_double(c.str("a"), "a");
  s.lambda = to_double(c.str("lambda"), "lambda");
  s.tau = to_double(c.str("tau"), "tau");
  s.delta = to_double(c.str("delta"), "delta");
  s.delta1 = to_double(c.str("delta1"), "delta1");
  s.delta2 = to_double(c.str("delta2"), "delta2");
  validate(s);
  return s;
}

void add_nag_options(Command& c) {
  c.opt("beta0", "0.01", "initial coefficient value")
      .opt("v0", "0.01", "initial velocity value")
      .opt("alpha0", "0.1", "initial learning rate")
      .opt("eta", "0.1", "learning-rate decay")
      .opt("momentum", "0.6", "momentum r in [0, 1)")
      .opt("batch-size", "auto", "mini-batch size, or auto (4 if n < 100 else 32)")
      .opt("max-iters", "1000", "iterations");
}

TrainerConfig nag_from(const Command& c) {
  TrainerConfig t;
  t.beta0 = to_double(c.str("beta0"), "beta0");
  t.v0 = to_double(c.str("v0"), "v0");
  t.alpha0 = to_double(c.str("alpha0"), "alpha0");
  t.eta = to_double(c.str("eta"), "eta");
  t.momentum = to_double(c.str("momentum"), "momentum");
  if (c.str("batch-size") != "auto") t.batch_size = to_u64(c.str("batch-size"), "batch-size");
  t.max_iters = to_u64(c.str("max-iters"), "max-iters");
  return t;
}

void add_cv_options(Command& c) {
  c.opt("folds", "5", "cross-validation folds")
      .opt("threads", "1", "worker threads for grid cells")
      .opt("std", "population", "fold spread: population or sample")
      .flag("strict-scaling", "fit the [-1, 1] scaling on each training fold only");
}

HarnessOptions harness_from(const Command& c, std::uint64_t seed) {
  HarnessOptions h;
  h.seed = seed;
  h.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, to_u64(c.str("threads"), "threads")));
  const auto& conv = c.str("std");
  if (conv == "population") {
    h.std_convention = StdConvention::Population;
  } else if (conv == "sample") {
    h.std_convention = StdConvention::Sample;
  } else {
    throw ParameterError("--std must be population or sample");
  }
  h.train_only_scaling = c.on("strict-scaling");
  return h;
}

Dataset load(const Command& c, const std::string& key = "data") {
  const auto& path = c.str(key);
  if (path.empty()) throw ParameterError("--" + key + " is required");
  return load_dataset(path, to_format(c.str("format")));
}

void write_manifest(const Command& c, const std::string& name, const std::string& out_path) {
  nlohmann::json j;
  j["command"] = name;
  j["version"] = {{"roboss", std::string(kToolVersion)},
                  {"model_format", kModelFormatVersion},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)}};
  auto options = nlohmann::json::object();
  for (const auto& [k, v] : c.values) {
    if (!c.transient.contains(k)) options[k] = v;
  }
  for (const auto& [k, v] : c.flags) options[k] = v;
  j["options"] = std::move(options);
  if (c.values.contains("seed")) {
    const std::uint64_t seed = to_u64(c.str("seed"), "seed");
    auto seeds = nlohmann::json::object();
    seeds["master"] = seed;
    for (const auto& s : c.streams) seeds[s] = child_seed(seed, s);
    j["seeds"] = std::move(seeds);
  }
  write_file(out_path + ".manifest.json", j.dump(2) + "\n");
}

/// Fills option values from a config or manifest document; flags given on
/// the command line are parsed afterwards and win.
void apply_config(Command& c, const std::string& name, const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw DataError("config '" + path + "' must be a JSON object");
  if (j.contains("command") && j["command"] != name) {
    throw ParameterError("config '" + path + "' was written for '" + j["command"].get<std::string>() + "'");
  }
  const nlohmann::json& options = j.contains("options") ? j["options"] : j;
  for (const auto& [key, value] : options.items()) {
    if (&options == &j && (key == "command" || key == "version" || key == "seeds")) continue;
    if (c.flags.contains(key)) {
      if (!value.is_boolean()) throw ParameterError("config key '" + key + "' must be true or false");
      c.flags[key] = value.get<bool>();
    } else if (c.values.contains(key) && !c.transient.contains(key)) {
      c.values[key] = value.is_string() ? value.get<std::string>() : value.dump();
    } else {
      throw ParameterError("config key '" + key + "' is not an option of '" + name + "'");
    }
  }
}

// ---- subcommands ----

int run_train(const Command& c) {
  const std::uint64_t seed = to_u64(c.str("seed"), "seed");
  Dataset ds = load(c);
  std::optional<Scaler> scaler;
  if (!c.on("no-normalize")) {
    ds = normalize(ds);
    scaler = ds.scaler;
  }
  TrainerConfig config = nag_from(c);
  config.C = to_double(c.str("C"), "C");
  config.loss = loss_from(c);
  config.kernel = {parse_kernel_kind(c.str("kernel")), to_double(c.str("sigma"), "sigma")};
  config.seed = child_seed(seed, "batches");
  const TrainedModel model = fit(config, ds.X, ds.y);
  const auto labels = predict_all(model, ds.X);
  const double acc = accuracy(labels, to_int_labels(ds.y));
  write_file(c.str("out"), serialize_model(model, scaler));
  write_manifest(c, "train", c.str("out"));
  std::cout << "final_objective=" << format_double(model.final_objective)
            << " train_accuracy=" << format_double(acc) << "\n";
  return kOk;
}

int run_predict(const Command& c) {
  const auto doc = load_model(c.str("model"));
  Dataset ds = load(c);
  if (doc.scaler) ds = apply_scaler(ds, *doc.scaler);
  const Eigen::VectorXd d = decision_values(doc.model, ds.X);
  std::ostringstream out;
  CsvWriter csv(out);
  csv.header({"row", "decision", "label"});
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    csv.cell(static_cast<std::size_t>(i)).cell(d[i]).cell(d[i] >= 0.0 ? 1 : -1);
    csv.end_row();
  }
  write_file(c.str("out"), out.str());
  write_manifest(c, "predict", c.str("out"));
  return kOk;
}

GridSpec grid_from(const Command& c) {
  const GridSpec standard = GridSpec::standard();
  auto axis = [&](const std::string& key, const std::vector<double>& fallback) {
    const auto& text = c.str(key);
    return text == "default" ? fallback : to_list(text, key);
  };
  GridSpec g;
  g.C = axis("C-grid", standard.C);
  g.sigma = axis("sigma-grid", standard.sigma);
  g.a = axis("a-grid", standard.a);
  g.lambda = axis("lambda-grid", standard.lambda);
  g.tau = axis("tau-grid", standard.tau);
  return g;
}

ModelSpec model_from(const Command& c, LossKind kind) {
  ModelSpec m = default_model(kind);
  m.kernel = parse_kernel_kind(c.str("kernel"));
  m.delta = to_double(c.str("delta"), "delta");
  m.delta1 = to_double(c.str("delta1"), "delta1");
  m.delta2 = to_double(c.str("delta2"), "delta2");
  m.nag = nag_from(c);
  return m;
}

int run_grid(const Command& c) {
  const std::uint64_t seed = to_u64(c.str("seed"), "seed");
  const HarnessOptions options = harness_from(c, seed);
  const GridSpec grid = grid_from(c);
  for (const auto& w : validate_grid(grid).warnings) std::cerr << "warning: " << w << "\n";
  const auto models = to_names(c.str("models"));
  if (models.empty()) throw ParameterError("--models must list at least one loss");
  const auto paths = to_names(c.str("data"));
  if (paths.empty()) throw ParameterError("--data is required");
  const auto k = to_u64(c.str("folds"), "folds");
  std::vector<RunResult> results;
  for (const auto& path : paths) {
    Dataset ds = load_dataset(path, to_format(c.str("format")));
    if (!options.train_only_scaling) ds = normalize(ds);
    const FoldPlan plan = make_folds(ds.size(), k, child_seed(seed, "folds"));
    for (const auto& name : models) {
      results.push_back(grid_search(ds, model_from(c, parse_loss_kind(name)), grid, plan, options));
    }
  }
  std::ostringstream out;
  write_run_results(out, results);
  write_file(c.str("out"), out.str());
  write_manifest(c, "grid", c.str("out"));
  return kOk;
}

int run_sweep(const Command& c) {
  const std::uint64_t seed = to_u64(c.str("seed"), "seed");
  const HarnessOptions options = harness_from(c, seed);
  Dataset ds = load(c);
  if (!options.train_only_scaling) ds = normalize(ds);
  const FoldPlan plan = make_folds(ds.size(), to_u64(c.str("folds"), "folds"), child_seed(seed, "folds"));
  ParamPoint fixed;
  fixed.C = to_double(c.str("C"), "C");
  fixed.sigma = to_double(c.str("sigma"), "sigma");
  ModelSpec model = default_model(LossKind::RoBoSS);
  model.kernel = parse_kernel_kind(c.str("kernel"));
  model.nag = nag_from(c);
  const auto rows = sensitivity_sweep(ds, model, fixed, to_list(c.str("a-grid"), "a-grid"),
                                      to_list(c.str("lambda-grid"), "lambda-grid"), plan, options);
  std::ostringstream out;
  write_sweep(out, rows);
  write_file(c.str("out"), out.str());
  write_manifest(c, "sweep", c.str("out"));
  return kOk;
}

int run_corrupt(const Command& c) {
  const Dataset ds = load(c);
  Dataset result;
  if (c.on("invert")) {
    if (c.str("record").empty()) throw ParameterError("--invert needs --record");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(c.str("record")));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("record '" + c.str("record") + "' is not valid JSON: " + e.what());
    }
    result = revert_corruption(ds, corruption_record_from_json(j));
  } else {
    const double rate = to_double(c.str("rate"), "rate");
    const std::uint64_t seed = child_seed(to_u64(c.str("seed"), "seed"), "corruption");
    const auto mode = to_mode(c.str("mode"));
    auto [bad, rec] = mode == CorruptionMode::Outliers
                          ? inject_outliers(ds, rate, to_double(c.str("factor"), "factor"), seed)
                          : inject_label_noise(ds, rate, seed);
    result = std::move(bad);
    const std::string record_path = c.str("record-out").empty() ? c.str("out") + ".record.json" : c.str("record-out");
    write_file(record_path, to_json(rec).dump(2) + "\n");
  }
  std::ostringstream out;
  write_csv(out, result);
  write_file(c.str("out"), out.str());
  write_manifest(c, "corrupt", c.str("out"));
  return kOk;
}

int run_stats(const Command& c) {
  RankTable table;
  if (!c.str("input").empty()) {
    std::istringstream in(read_file(c.str("input")));
    table = rank_table_from_results(in);
  } else if (!c.str("mean-ranks").empty()) {
    const auto ranks = to_list(c.str("mean-ranks"), "mean-ranks");
    Eigen::VectorXd r(static_cast<Eigen::Index>(ranks.size()));
    for (std::size_t i = 0; i < ranks.size(); ++i) r[static_cast<Eigen::Index>(i)] = ranks[i];
    if (c.str("num-datasets").empty()) throw ParameterError("--mean-ranks needs --num-datasets");
    table = from_mean_ranks(r, to_u64(c.str("num-datasets"), "num-datasets"), to_names(c.str("models")));
  } else {
    throw ParameterError("stats needs --input or --mean-ranks");
  }
  const double alpha = to_double(c.str("alpha"), "alpha");
  std::optional<double> critical;
  if (!c.str("critical-f").empty()) critical = to_double(c.str("critical-f"), "critical-f");
  const TestReport report = run_tests(table, alpha, critical);
  std::size_t reference = 0;
  if (c.str("reference").empty()) {
    table.mean_ranks.minCoeff(&reference);
  } else {
    const auto it = std::find(table.models.begin(), table.models.end(), c.str("reference"));
    if (it == table.models.end()) throw ParameterError("--reference '" + c.str("reference") + "' is not a model");
    reference = static_cast<std::size_t>(it - table.models.begin());
  }
  std::ostringstream out;
  write_test_report(out, table, report, reference);
  write_file(c.str("out"), out.str());
  write_manifest(c, "stats", c.str("out"));
  return kOk;
}

int run_loss_curve(const Command& c) {
  const LossSpec loss = loss_from(c);
  const FGrid g = to_range(c.str("range"), "range");
  std::ostringstream out;
  CsvWriter csv(out);
  csv.header({"u", "value", "derivative"});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = g.at(i);
    csv.cell(u).cell(loss_value(loss, u)).cell(loss_derivative(loss, u));
    csv.end_row();
  }
  write_file(c.str("out"), out.str());
  write_manifest(c, "loss-curve", c.str("out"));
  return kOk;
}

int run_calibration(const Command& c) {
  const LossSpec loss = loss_from(c);
  const FGrid g = to_range(c.str("range"), "range");
  std::ostringstream out;
  CsvWriter csv(out);
  csv.header({"P", "f", "risk"});
  for (double P : to_list(c.str("P"), "P")) {
    const ConditionalRiskQuery q{loss, P, g};
    for (const auto& [f, risk] : conditional_risk_curve(q)) {
      csv.cell(P).cell(f).cell(risk);
      csv.end_row();
    }
    const auto r = calibration_check(q);
    std::cout << "P=" << format_double(P) << " f_star=" << format_double(r.f_star)
              << " min_risk=" << format_double(r.min_risk) << " sign_matches_bayes="
              << (r.sign_matches_bayes ? (*r.sign_matches_bayes ? "yes" : "no") : "n/a") << "\n";
  }
  write_file(c.str("out"), out.str());
  write_manifest(c, "calibration", c.str("out"));
  return kOk;
}

int classify(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded, smooth, loss-based kernel SVM toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::map<std::string, Command> commands;

  auto make = [&](const std::string& name, const std::string& help, std::vector<std::string> streams = {}) -> Command& {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.streams = std::move(streams);
    c.path_out("config", "JSON config or manifest; flags override it", false);
    return c;
  };

  {
    auto& c = make("train", "fit a model and write it to --out", {"batches"});
    c.path_out("out", "model file", true);
    c.opt("data", "", "training data file").opt("format", "csv", "csv or sparse").opt("seed", "0", "master seed");
    c.opt("C", "1", "regularization C > 0").opt("kernel", "gaussian", "gaussian or linear").opt("sigma", "1", "Gaussian width");
    add_loss_options(c);
    add_nag_options(c);
    c.flag("no-normalize", "train on raw features");
  }
  {
    auto& c = make("predict", "label rows with a saved model");
    c.path_out("out", "predictions CSV", true);
    c.opt("model", "", "model file").opt("data", "", "data file").opt("format", "csv", "csv or sparse");
  }
  {
    auto& c = make("grid", "cross-validated grid search", {"folds", "batches", "corruption"});
    c.path_out("out", "results CSV", true);
    c.opt("data", "", "data files, comma separated").opt("format", "csv", "csv or sparse").opt("seed", "0", "master seed");
    c.opt("models", "roboss", "losses to compare, comma separated").opt("kernel", "gaussian", "gaussian or linear");
    c.opt("C-grid", "default", "values or lo:hi:step").opt("sigma-grid", "default", "values or lo:hi:step");
    c.opt("a-grid", "default", "values or lo:hi:step").opt("lambda-grid", "default", "values or lo:hi:step");
    c.opt("tau-grid", "default", "values or lo:hi:step");
    c.opt("delta", "1", "truncated-hinge cap").opt("delta1", "1", "truncated-pinball cap for u > 0");
    c.opt("delta2", "0.25", "truncated-pinball cap for u < 0");
    add_nag_options(c);
    add_cv_options(c);
  }
  {
    auto& c = make("sweep", "RoBoSS accuracy over an (a, lambda) grid", {"folds", "batches"});
    c.path_out("out", "sweep CSV", true);
    c.opt("data", "", "data file").opt("format", "csv", "csv or sparse").opt("seed", "0", "master seed");
    c.opt("C", "1", "fixed C").opt("sigma", "1", "fixed Gaussian width").opt("kernel", "gaussian", "gaussian or linear");
    c.opt("a-grid", "0.5,1,2,5", "values or lo:hi:step").opt("lambda-grid", "0.5,1,1.5,2", "values or lo:hi:step");
    add_nag_options(c);
    add_cv_options(c);
  }
  {
    auto& c = make("corrupt", "inject or undo outliers and label noise", {"corruption"});
    c.path_out("out", "corrupted (or restored) data CSV", true);
    c.path_out("record-out", "record file (default <out>.record.json)", false);
    c.opt("data", "", "data file").opt("format", "csv", "csv or sparse").opt("seed", "0", "master seed");
    c.opt("mode", "outliers", "outliers or label-noise").opt("rate", "0.1", "fraction in (0, 1)");
    c.opt("factor", "10", "outlier multiplier").opt("record", "", "record to undo with --invert");
    c.flag("invert", "restore the original data from --record");
  }
  {
    auto& c = make("stats", "Friedman and Nemenyi tests");
    c.path_out("out", "report CSV", true);
    c.opt("input", "", "results CSV (dataset, model, mean_acc columns)");
    c.opt("mean-ranks", "", "mean ranks, comma separated").opt("num-datasets", "", "dataset count D");
    c.opt("models", "", "model names for --mean-ranks").opt("reference", "", "model compared against the others");
    c.opt("alpha", "0.05", "0.05 or 0.10").opt("critical-f", "", "critical F value; built-in table when omitted");
  }
  {
    auto& c = make("loss-curve", "loss value and derivative over a range");
    c.path_out("out", "curve CSV", true);
    add_loss_options(c);
    c.opt("range", "-2:3:0.01", "lo:hi:step");
  }
  {
    auto& c = make("calibration", "conditional risk curves and their minimizers");
    c.path_out("out", "curve CSV", true);
    add_loss_options(c);
    c.opt("P", "0.7", "P(y = +1 | x), comma separated").opt("range", "-3:3:0.001", "lo:hi:step");
  }

  std::string active;
  try {
    if (argc >= 2 && commands.contains(argv[1])) {
      active = argv[1];
      for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc) {
          path = argv[i + 1];
        } else if (arg.starts_with("--config=")) {
          path = arg.substr(9);
        }
        if (!path.empty()) apply_config(commands[active], active, path);
      }
    }
  } catch (const ParameterError& e) {
    return classify(e, kUsage);
  } catch (const Error& e) {
    return classify(e, kData);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  for (auto& [name, c] : commands) {
    if (c.app->parsed()) active = name;
  }
  const Command& c = commands.at(active);
  try {
    if (active == "train") return run_train(c);
    if (active == "predict") return run_predict(c);
    if (active == "grid") return run_grid(c);
    if (active == "sweep") return run_sweep(c);
    if (active == "corrupt") return run_corrupt(c);
    if (active == "stats") return run_stats(c);
    if (active == "loss-curve") return run_loss_curve(c);
    if (active == "calibration") return run_calibration(c);
  } catch (const ParameterError& e) {
    return classify(e, kUsage);
  } catch (const NumericError& e) {
    return classify(e, kNumeric);
  } catch (const Error& e) {
    return classify(e, kData);
  } catch (const std::exception& e) {
    return classify(e, kData);
  }
  return kUsage;
}
