#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "roboss/data.hpp"
#include "roboss/error.hpp"
#include "roboss/format.hpp"
#include "roboss/kernel.hpp"
#include "roboss/loss.hpp"
#include "roboss/random.hpp"
#include "roboss/trainer.hpp"

namespace roboss {

/// One hyperparameter combination. Fields a model does not use are ignored.
struct ParamPoint {
  double C = 1.0;
  double sigma = 1.0;
  double a = 1.0;
  double lambda = 1.0;
  double tau = 0.5;

  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};

/// Deterministic tie-break order: smaller C, then sigma, a, lambda, tau.
inline bool tie_break_less(const ParamPoint& x, const ParamPoint& y) {
  return std::tie(x.C, x.sigma, x.a, x.lambda, x.tau) < std::tie(y.C, y.sigma, y.a, y.lambda, y.tau);
}

/// A model family evaluated by the harness: loss kind, fixed loss constants
/// that are not searched, kernel family and NAG constants.
struct ModelSpec {
  std::string name;
  LossKind loss = LossKind::RoBoSS;
  KernelKind kernel = KernelKind::Gaussian;
  double delta = 1.0;   // truncated hinge
  double delta1 = 1.0;  // truncated pinball
  double delta2 = 0.25;
  TrainerConfig nag;    // only the optimizer constants are read

  /// Baselines run through the NAG trainer rather than their own solvers.
  bool non_native_training_path() const { return !nag_is_native(loss); }
};

inline ModelSpec default_model(LossKind loss) {
  ModelSpec m;
  m.loss = loss;
  switch (loss) {
    case LossKind::RoBoSS: m.name = "RoBoSS-SVM"; break;
    case LossKind::Hinge: m.name = "Hinge-SVM (NAG)"; break;
    case LossKind::Pinball: m.name = "Pinball-SVM (NAG)"; break;
    case LossKind::TruncatedHinge: m.name = "TruncatedHinge-SVM (NAG)"; break;
    case LossKind::TruncatedPinball: m.name = "TruncatedPinball-SVM (NAG)"; break;
    case LossKind::ZeroOne: throw ParameterError("the zero-one loss cannot be trained");
  }
  return m;
}

inline TrainerConfig make_trainer_config(const ModelSpec& model, const ParamPoint& p, std::uint64_t seed) {
  TrainerConfig c = model.nag;
  c.C = p.C;
  c.kernel = model.kernel == KernelKind::Gaussian ? KernelSpec::gaussian(p.sigma) : KernelSpec::linear();
  switch (model.loss) {
    case LossKind::RoBoSS: c.loss = LossSpec::roboss(p.a, p.lambda); break;
    case LossKind::Hinge: c.loss = LossSpec::hinge(); break;
    case LossKind::Pinball: c.loss = LossSpec::pinball(p.tau); break;
    case LossKind::TruncatedHinge: c.loss = LossSpec::truncated_hinge(model.delta); break;
    case LossKind::TruncatedPinball:
      c.loss = LossSpec::truncated_pinball(p.tau, model.delta1, model.delta2);
      break;
    case LossKind::ZeroOne: throw ParameterError("the zero-one loss cannot be trained");
  }
  c.seed = seed;
  return c;
}

/// Hyperparameter grids. Which axes are searched depends on the model.
struct GridSpec {
  std::vector<double> C;
  std::vector<double> sigma;
  std::vector<double> a;
  std::vector<double> lambda;
  std::vector<double> tau;

  /// C, sigma in {10^i : i = -6..6}; a in 0:0.1:5; lambda in 0.1:0.1:2;
  /// tau in {0, 0.3, 0.5, 0.7, 0.9}.
  static GridSpec standard() {
    GridSpec g;
    for (int i = -6; i <= 6; ++i) {
      g.C.push_back(std::pow(10.0, i));
      g.sigma.push_back(std::pow(10.0, i));
    }
    for (int i = 0; i <= 50; ++i) g.a.push_back(i / 10.0);
    for (int i = 1; i <= 20; ++i) g.lambda.push_back(i / 10.0);
    g.tau = {0.0, 0.3, 0.5, 0.7, 0.9};
    return g;
  }
};

struct ValidatedGrid {
  GridSpec grid;
  std::vector<std::string> warnings;
};

/// Drops a <= 0 (the RoBoSS loss vanishes identically there) with a warning
/// and rejects non-finite values.
inline ValidatedGrid validate_grid(GridSpec grid) {
  ValidatedGrid out;
  auto check = [](const std::vector<double>& axis, const char* name) {
    for (double v : axis) {
      if (!std::isfinite(v)) throw ParameterError(std::string("grid axis ") + name + " has a non-finite value");
    }
  };
  check(grid.C, "C");
  check(grid.sigma, "sigma");
  check(grid.a, "a");
  check(grid.lambda, "lambda");
  check(grid.tau, "tau");
  const auto before = grid.a.size();
  std::erase_if(grid.a, [](double v) { return v <= 0.0; });
  if (grid.a.size() != before) {
    out.warnings.push_back("dropped " + std::to_string(before - grid.a.size()) +
                           " non-positive value(s) from the a grid (requires a > 0)");
  }
  out.grid = std::move(grid);
  return out;
}

/// Cartesian product of the axes the model actually uses.
inline std::vector<ParamPoint> expand_grid(const GridSpec& grid, const ModelSpec& model) {
  const ParamPoint defaults;
  auto axis = [](const std::vector<double>& v, bool used, double fallback) {
    return used ? v : std::vector<double>{fallback};
  };
  const bool is_roboss = model.loss == LossKind::RoBoSS;
  const bool uses_tau = model.loss == LossKind::Pinball || model.loss == LossKind::TruncatedPinball;
  const auto cs = axis(grid.C, true, defaults.C);
  const auto sigmas = axis(grid.sigma, model.kernel == KernelKind::Gaussian, defaults.sigma);
  const auto as = axis(grid.a, is_roboss, defaults.a);
  const auto lambdas = axis(grid.lambda, is_roboss, defaults.lambda);
  const auto taus = axis(grid.tau, uses_tau, defaults.tau);
  std::vector<ParamPoint> points;
  for (double c : cs)
    for (double s : sigmas)
      for (double a : as)
        for (double l : lambdas)
          for (double t : taus) points.push_back({c, s, a, l, t});
  if (points.empty()) throw ParameterError("grid for model '" + model.name + "' is empty after validation");
  return points;
}

/// 100 * (TP + TN) / n.
inline double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.empty()) throw ParameterError("accuracy of an empty prediction set");
  if (predictions.size() != truth.size()) {
    throw ShapeError("accuracy: prediction/truth length mismatch", truth.size(), predictions.size());
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int t = truth[i];
    if ((p != 1 && p != -1) || (t != 1 && t != -1)) throw DataError("accuracy: labels must be +1 or -1");
    correct += p == t ? 1 : 0;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

enum class StdConvention { Population, Sample };

struct HarnessOptions {
  std::uint64_t seed = 0;
  StdConvention std_convention = StdConvention::Population;
  /// Fit the [-1,1] scaler on each training fold instead of expecting a
  /// dataset normalized up front.
  bool train_only_scaling = false;
  unsigned threads = 1;
};

struct CvResult {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> per_fold;
  std::optional<std::string> failure;  // set when training diverged on some fold
};

inline CvResult summarize_folds(std::vector<double> per_fold, StdConvention conv) {
  if (per_fold.empty()) throw ParameterError("no fold accuracies to summarize");
  const double k = static_cast<double>(per_fold.size());
  double sum = 0.0;
  for (double v : per_fold) sum += v;
  const double mean = sum / k;
  double ss = 0.0;
  for (double v : per_fold) ss += (v - mean) * (v - mean);
  const double denom = conv == StdConvention::Population ? k : std::max(k - 1.0, 1.0);
  return {mean, std::sqrt(ss / denom), std::move(per_fold), std::nullopt};
}

/// Optional training-fold corruption applied inside cross-validation.
struct FoldCorruption {
  CorruptionMode mode = CorruptionMode::Outliers;
  double rate = 0.0;
  double factor = 10.0;
};

/// Train/test split for one fold, after optional per-fold scaling and
/// training-only corruption.
struct FoldData {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  Eigen::MatrixXd test_x;
  std::vector<int> test_y;
  std::optional<CorruptionRecord> corruption;
};

inline std::vector<int> to_int_labels(const Eigen::VectorXd& y) {
  std::vector<int> out(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = y[i] > 0 ? 1 : -1;
  return out;
}

inline std::uint64_t corruption_seed(std::uint64_t seed, double rate, std::size_t fold) {
  return child_seed(seed, "corruption/" + format_double(rate), fold);
}

inline FoldData make_fold_data(const Dataset& ds, const FoldPlan& plan, std::size_t fold,
                               const HarnessOptions& options,
                               const std::optional<FoldCorruption>& corruption = {}) {
  if (plan.assignments.size() != ds.size()) {
    throw ShapeError("fold plan size does not match dataset", ds.size(), plan.assignments.size());
  }
  const auto train_idx = plan.train_indices(fold);
  const auto test_idx = plan.test_indices(fold);
  if (train_idx.empty() || test_idx.empty()) throw ParameterError("fold " + std::to_string(fold) + " is empty");
  Dataset train = subset(ds, train_idx);
  Dataset test = subset(ds, test_idx);
  if (options.train_only_scaling) {
    if (ds.normalized) throw DataError("train-only scaling expects an unnormalized dataset");
    const Scaler scaler = fit_scaler(train);
    train = apply_scaler(train, scaler);
    test = apply_scaler(test, scaler);
  }
  FoldData fd;
  if (corruption && corruption->rate > 0.0) {
    const auto seed = corruption_seed(options.seed, corruption->rate, fold);
    auto [bad, record] = corruption->mode == CorruptionMode::Outliers
                             ? inject_outliers(train, corruption->rate, corruption->factor, seed)
                             : inject_label_noise(train, corruption->rate, seed);
    train = std::move(bad);
    fd.corruption = std::move(record);
  }
  fd.train_x = std::move(train.X);
  fd.train_y = std::move(train.y);
  fd.test_x = std::move(test.X);
  fd.test_y = to_int_labels(test.y);
  return fd;
}

inline std::uint64_t batch_seed(std::uint64_t seed, std::size_t fold) { return child_seed(seed, "batches", fold); }

namespace detail {

/// Per-fold kernel blocks for one kernel spec, shared by every grid cell
/// with that spec.
struct FoldKernels {
  FoldData data;
  KernelMatrix train_gram;
  Eigen::MatrixXd test_cross;  // test rows x train columns
};

inline std::vector<FoldKernels> build_fold_kernels(const Dataset& ds, const FoldPlan& plan,
                                                   const KernelSpec& kernel, const HarnessOptions& options,
                                                   const std::optional<FoldCorruption>& corruption) {
  std::vector<FoldKernels> folds;
  for (std::size_t f = 0; f < plan.k; ++f) {
    FoldData fd = make_fold_data(ds, plan, f, options, corruption);
    KernelMatrix gram = gram_matrix(kernel, fd.train_x);
    Eigen::MatrixXd cross = cross_kernel(kernel, fd.test_x, fd.train_x);
    folds.push_back({std::move(fd), std::move(gram), std::move(cross)});
  }
  return folds;
}

inline double evaluate_fold(const FoldKernels& fk, const TrainerConfig& config) {
  const TrainedModel model = fit(config, fk.data.train_x, fk.data.train_y, fk.train_gram);
  const Eigen::VectorXd decision = fk.test_cross * model.beta;
  std::vector<int> pred(static_cast<std::size_t>(decision.size()));
  for (Eigen::Index i = 0; i < decision.size(); ++i) pred[static_cast<std::size_t>(i)] = decision[i] >= 0.0 ? 1 : -1;
  return accuracy(pred, fk.data.test_y);
}

inline CvResult evaluate_point(const std::vector<FoldKernels>& folds, const ModelSpec& model,
                               const ParamPoint& p, const HarnessOptions& options) {
  std::vector<double> acc;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    acc.push_back(evaluate_fold(folds[f], make_trainer_config(model, p, batch_seed(options.seed, f))));
  }
  return summarize_folds(std::move(acc), options.std_convention);
}

/// Runs task(i) for i in [0, count) on up to `threads` workers.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < std::min<std::size_t>(threads, count); ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// k-fold cross-validation of one parameter point. The dataset is expected
/// to be normalized already unless options.train_only_scaling is set.
inline CvResult cross_validate(const Dataset& ds, const ModelSpec& model, const ParamPoint& params,
                               const FoldPlan& plan, const HarnessOptions& options = {},
                               const std::optional<FoldCorruption>& corruption = {}) {
  const TrainerConfig probe = make_trainer_config(model, params, 0);
  validate(probe);
  const auto folds = detail::build_fold_kernels(ds, plan, probe.kernel, options, corruption);
  return detail::evaluate_point(folds, model, params, options);
}

struct CellResult {
  ParamPoint params;
  CvResult cv;
};

/// Cross-validates every point, sharing kernel blocks across points with
/// the same kernel width. Output order follows `points`.
inline std::vector<CellResult> evaluate_points(const Dataset& ds, const ModelSpec& model,
                                               const std::vector<ParamPoint>& points, const FoldPlan& plan,
                                               const HarnessOptions& options = {},
                                               const std::optional<FoldCorruption>& corruption = {}) {
  std::vector<CellResult> results(points.size());
  std::map<double, std::vector<std::size_t>> by_sigma;
  for (std::size_t i = 0; i < points.size(); ++i) {
    validate(make_trainer_config(model, points[i], 0));
    by_sigma[model.kernel == KernelKind::Gaussian ? points[i].sigma : 0.0].push_back(i);
  }
  for (const auto& [sigma, members] : by_sigma) {
    const KernelSpec kernel =
        model.kernel == KernelKind::Gaussian ? KernelSpec::gaussian(sigma) : KernelSpec::linear();
    const auto folds = detail::build_fold_kernels(ds, plan, kernel, options, corruption);
    detail::parallel_for(members.size(), options.threads, [&](std::size_t m) {
      const std::size_t i = members[m];
      try {
        results[i] = {points[i], detail::evaluate_point(folds, model, points[i], options)};
      } catch (const NumericError& e) {
        CvResult failed;
        failed.mean = std::numeric_limits<double>::quiet_NaN();
        failed.std = failed.mean;
        failed.failure = e.what();
        results[i] = {points[i], std::move(failed)};
      }
    });
  }
  return results;
}

/// Index of the best cell: highest mean accuracy, ties by tie_break_less.
/// Cells whose training diverged are never selected.
inline std::size_t best_cell(const std::vector<CellResult>& cells) {
  if (cells.empty()) throw ParameterError("no grid cells evaluated");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (c.cv.failure) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = cells[*best];
    if (c.cv.mean > b.cv.mean || (c.cv.mean == b.cv.mean && tie_break_less(c.params, b.params))) best = i;
  }
  if (!best) throw NumericError("training diverged in every grid cell: " + *cells.front().cv.failure);
  return *best;
}

struct RunResult {
  std::string dataset;
  std::string model;
  LossKind loss = LossKind::RoBoSS;
  bool non_native_training_path = false;
  ParamPoint best_params;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double train_time_seconds = 0.0;
  std::vector<double> per_fold_accuracies;
  std::size_t evaluated_cells = 0;
  std::size_t failed_cells = 0;
};

/// Exhaustive grid search by cross-validated mean accuracy, followed by a
/// timed refit of the winning point on the whole dataset (Gram
/// construction excluded from the timing).
inline RunResult grid_search(const Dataset& ds, const ModelSpec& model, const GridSpec& grid,
                             const FoldPlan& plan, const HarnessOptions& options = {}) {
  const auto checked = validate_grid(grid);
  const auto points = expand_grid(checked.grid, model);
  const auto cells = evaluate_points(ds, model, points, plan, options);
  const auto& best = cells[best_cell(cells)];

  RunResult r;
  r.dataset = ds.name;
  r.model = model.name;
  r.loss = model.loss;
  r.non_native_training_path = model.non_native_training_path();
  r.best_params = best.params;
  r.mean_accuracy = best.cv.mean;
  r.std_accuracy = best.cv.std;
  r.per_fold_accuracies = best.cv.per_fold;
  r.evaluated_cells = cells.size();
  r.failed_cells = static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return c.cv.failure.has_value(); }));

  Dataset full = ds;
  if (options.train_only_scaling) full = normalize(ds);
  const TrainerConfig config = make_trainer_config(model, best.params, batch_seed(options.seed, plan.k));
  if (resolved_batch_size(config, full.size()) <= full.size()) {
    const KernelMatrix gram = gram_matrix(config.kernel, full.X);
    const auto start = std::chrono::steady_clock::now();
    (void)fit(config, full.X, full.y, gram);
    r.train_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

struct SweepRow {
  double a = 0.0;
  double lambda = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// Accuracy surface over (a, lambda) with C and sigma held fixed.
inline std::vector<SweepRow> sensitivity_sweep(const Dataset& ds, const ModelSpec& model, const ParamPoint& fixed,
                                               const std::vector<double>& a_grid,
                                               const std::vector<double>& lambda_grid, const FoldPlan& plan,
                                               const HarnessOptions& options = {}) {
  if (model.loss != LossKind::RoBoSS) throw ParameterError("sensitivity sweep applies to the RoBoSS model");
  std::vector<ParamPoint> points;
  for (double a : a_grid) {
    for (double l : lambda_grid) {
      ParamPoint p = fixed;
      p.a = a;
      p.lambda = l;
      points.push_back(p);
    }
  }
  if (points.empty()) throw ParameterError("sensitivity sweep needs non-empty a and lambda grids");
  const auto cells = evaluate_points(ds, model, points, plan, options);
  std::vector<SweepRow> rows;
  for (const auto& c : cells) rows.push_back({c.params.a, c.params.lambda, c.cv.mean, c.cv.std});
  return rows;
}

/// A model evaluated at fixed hyperparameters.
struct TunedModel {
  ModelSpec model;
  ParamPoint params;
};

struct RobustnessRow {
  std::string model;
  double rate = 0.0;
  CvResult cv;
};

struct RobustnessTable {
  CorruptionMode mode = CorruptionMode::Outliers;
  std::vector<RobustnessRow> rows;           // model-major, rates in input order
  std::vector<std::pair<std::string, double>> averages;  // per model over rates
};

/// Corrupts the training portion of every fold at each rate and scores on
/// the clean test folds. Rate 0 is an uncorrupted control.
inline RobustnessTable robustness_suite(const Dataset& ds, const std::vector<TunedModel>& models,
                                        const std::vector<double>& rates, CorruptionMode mode,
                                        const FoldPlan& plan, const HarnessOptions& options = {},
                                        double factor = 10.0) {
  RobustnessTable table;
  table.mode = mode;
  for (const auto& tm : models) {
    double sum = 0.0;
    for (double rate : rates) {
      if (!(rate >= 0.0 && rate < 1.0)) throw ParameterError("corruption rate must lie in [0, 1)");
      std::optional<FoldCorruption> corruption;
      if (rate > 0.0) corruption = FoldCorruption{mode, rate, factor};
      auto cv = cross_validate(ds, tm.model, tm.params, plan, options, corruption);
      sum += cv.mean;
      table.rows.push_back({tm.model.name, rate, std::move(cv)});
    }
    table.averages.emplace_back(tm.model.name, rates.empty() ? 0.0 : sum / static_cast<double>(rates.size()));
  }
  return table;
}

namespace detail {

inline std::string join_doubles(const std::vector<double>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& run_result_columns() {
  static const std::vector<std::string> cols{"dataset", "model", "mean_acc", "std_acc", "time_s", "C",
                                             "sigma",   "a",     "lambda",   "tau",     "per_fold", "training_path"};
  return cols;
}

/// Fixed column order; parameters a model does not use are left empty.
inline void write_run_results(std::ostream& out, const std::vector<RunResult>& results) {
  CsvWriter csv(out);
  csv.header(run_result_columns());
  for (const auto& r : results) {
    const bool roboss = r.loss == LossKind::RoBoSS;
    const bool tau = r.loss == LossKind::Pinball || r.loss == LossKind::TruncatedPinball;
    csv.cell(r.dataset).cell(r.model).cell(r.mean_accuracy).cell(r.std_accuracy).cell(r.train_time_seconds);
    csv.cell(r.best_params.C).cell(r.best_params.sigma);
    csv.cell(roboss ? format_double(r.best_params.a) : "");
    csv.cell(roboss ? format_double(r.best_params.lambda) : "");
    csv.cell(tau ? format_double(r.best_params.tau) : "");
    csv.cell(detail::join_doubles(r.per_fold_accuracies, ';'));
    csv.cell(r.non_native_training_path ? "nag-non-native" : "nag");
    csv.end_row();
  }
}

inline void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  CsvWriter csv(out);
  csv.header({"a", "lambda", "mean_acc", "std_acc"});
  for (const auto& r : rows) {
    csv.cell(r.a).cell(r.lambda).cell(r.mean_accuracy).cell(r.std_accuracy);
    csv.end_row();
  }
}

inline void write_robustness(std::ostream& out, const RobustnessTable& table) {
  CsvWriter csv(out);
  csv.header({"mode", "model", "rate", "mean_acc", "std_acc", "per_fold"});
  for (const auto& r : table.rows) {
    csv.cell(to_string(table.mode)).cell(r.model).cell(r.rate).cell(r.cv.mean).cell(r.cv.std);
    csv.cell(detail::join_doubles(r.cv.per_fold, ';'));
    csv.end_row();
  }
  for (const auto& [model, avg] : table.averages) {
    csv.cell(to_string(table.mode)).cell(model).cell("average").cell(avg).cell("").cell("");
    csv.end_row();
  }
}

}  // namespace roboss
