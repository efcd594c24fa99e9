#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "roboss/data.hpp"
#include "roboss/error.hpp"
#include "roboss/format.hpp"
#include "roboss/kernel.hpp"
#include "roboss/loss.hpp"
#include "roboss/trainer.hpp"

namespace roboss {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "roboss-svm-model";

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json to_json(const LossSpec& spec) {
  nlohmann::json j{{"kind", std::string(to_string(spec.kind))}};
  switch (spec.kind) {
    case LossKind::RoBoSS: j["a"] = spec.a; j["lambda"] = spec.lambda; break;
    case LossKind::Pinball: j["tau"] = spec.tau; break;
    case LossKind::TruncatedHinge: j["delta"] = spec.delta; break;
    case LossKind::TruncatedPinball:
      j["tau"] = spec.tau; j["delta1"] = spec.delta1; j["delta2"] = spec.delta2;
      break;
    default: break;
  }
  return j;
}

inline LossSpec loss_from_json(const nlohmann::json& j) {
  LossSpec spec;
  spec.kind = parse_loss_kind(detail::json_get<std::string>(j, "kind"));
  spec.a = j.value("a", spec.a);
  spec.lambda = j.value("lambda", spec.lambda);
  spec.tau = j.value("tau", spec.tau);
  spec.delta = j.value("delta", spec.delta);
  spec.delta1 = j.value("delta1", spec.delta1);
  spec.delta2 = j.value("delta2", spec.delta2);
  validate(spec);
  return spec;
}

inline nlohmann::json to_json(const KernelSpec& spec) {
  nlohmann::json j{{"kind", std::string(to_string(spec.kind))}};
  if (spec.kind == KernelKind::Gaussian) j["sigma"] = spec.sigma;
  return j;
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  KernelSpec spec;
  spec.kind = parse_kernel_kind(detail::json_get<std::string>(j, "kind"));
  spec.sigma = j.value("sigma", spec.sigma);
  validate(spec);
  return spec;
}

inline nlohmann::json to_json(const TrainerConfig& c) {
  nlohmann::json j{{"C", c.C},           {"loss", to_json(c.loss)}, {"kernel", to_json(c.kernel)},
                   {"beta0", c.beta0},   {"v0", c.v0},              {"alpha0", c.alpha0},
                   {"eta", c.eta},       {"momentum", c.momentum},  {"max_iters", c.max_iters},
                   {"seed", c.seed}};
  j["batch_size"] = c.batch_size ? nlohmann::json(*c.batch_size) : nlohmann::json(nullptr);
  return j;
}

inline TrainerConfig trainer_config_from_json(const nlohmann::json& j) {
  TrainerConfig c;
  c.C = detail::json_get<double>(j, "C");
  c.loss = loss_from_json(detail::json_get<nlohmann::json>(j, "loss"));
  c.kernel = kernel_from_json(detail::json_get<nlohmann::json>(j, "kernel"));
  c.beta0 = detail::json_get<double>(j, "beta0");
  c.v0 = detail::json_get<double>(j, "v0");
  c.alpha0 = detail::json_get<double>(j, "alpha0");
  c.eta = detail::json_get<double>(j, "eta");
  c.momentum = detail::json_get<double>(j, "momentum");
  c.max_iters = detail::json_get<std::size_t>(j, "max_iters");
  c.seed = detail::json_get<std::uint64_t>(j, "seed");
  if (j.contains("batch_size") && !j.at("batch_size").is_null()) {
    c.batch_size = detail::json_get<std::size_t>(j, "batch_size");
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(const Scaler& s) { return {{"min", s.min}, {"max", s.max}}; }

inline Scaler scaler_from_json(const nlohmann::json& j) {
  return {detail::json_get<std::vector<double>>(j, "min"), detail::json_get<std::vector<double>>(j, "max")};
}

/// A model plus the input normalization it was trained under.
struct ModelDocument {
  TrainedModel model;
  std::optional<Scaler> scaler;
};

/// Canonical text form: keys sorted, coefficients and support points as
/// exact hex floats. Identical models serialize to identical bytes.
inline std::string serialize_model(const TrainedModel& model, const std::optional<Scaler>& scaler = {}) {
  nlohmann::json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["kernel"] = to_json(model.kernel);
  j["config"] = to_json(model.config);
  j["iterations_run"] = model.iterations_run;
  j["initial_objective"] = hex_double(model.initial_objective);
  j["final_objective"] = hex_double(model.final_objective);
  j["final_learning_rate"] = hex_double(model.final_learning_rate);
  auto beta = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.beta.size(); ++i) beta.push_back(hex_double(model.beta[i]));
  j["beta"] = std::move(beta);
  auto points = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.support_points.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.support_points.cols(); ++c) {
      row.push_back(hex_double(model.support_points(i, c)));
    }
    points.push_back(std::move(row));
  }
  j["support_points"] = std::move(points);
  j["scaler"] = scaler ? to_json(*scaler) : nlohmann::json(nullptr);
  return j.dump(2) + "\n";
}

inline ModelDocument parse_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.value("format", std::string{}) != kModelFormatName) throw DataError("not a model document");
  if (j.value("version", 0) != kModelFormatVersion) {
    throw DataError("unsupported model format version " + j.value("version", nlohmann::json()).dump());
  }
  ModelDocument doc;
  auto& m = doc.model;
  m.kernel = kernel_from_json(detail::json_get<nlohmann::json>(j, "kernel"));
  m.config = trainer_config_from_json(detail::json_get<nlohmann::json>(j, "config"));
  m.iterations_run = detail::json_get<std::size_t>(j, "iterations_run");
  m.initial_objective = parse_hex_double(detail::json_get<std::string>(j, "initial_objective"));
  m.final_objective = parse_hex_double(detail::json_get<std::string>(j, "final_objective"));
  m.final_learning_rate = parse_hex_double(detail::json_get<std::string>(j, "final_learning_rate"));
  const auto beta = detail::json_get<std::vector<std::string>>(j, "beta");
  const auto points = detail::json_get<std::vector<std::vector<std::string>>>(j, "support_points");
  if (beta.size() != points.size()) throw ShapeError("beta length must equal support point count", points.size(), beta.size());
  const std::size_t dim = points.empty() ? 0 : points.front().size();
  m.beta.resize(static_cast<Eigen::Index>(beta.size()));
  m.support_points.resize(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < beta.size(); ++i) {
    m.beta[static_cast<Eigen::Index>(i)] = parse_hex_double(beta[i]);
    if (points[i].size() != dim) throw ShapeError("ragged support point rows", dim, points[i].size());
    for (std::size_t c = 0; c < dim; ++c) {
      m.support_points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = parse_hex_double(points[i][c]);
    }
  }
  if (!m.beta.allFinite() || !m.support_points.allFinite()) throw DataError("model contains non-finite values");
  if (j.contains("scaler") && !j.at("scaler").is_null()) doc.scaler = scaler_from_json(j.at("scaler"));
  return doc;
}

inline void save_model(const std::filesystem::path& path, const TrainedModel& model,
                       const std::optional<Scaler>& scaler = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  out << serialize_model(model, scaler);
}

inline ModelDocument load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

inline nlohmann::json to_json(const CorruptionRecord& r) {
  nlohmann::json j{{"mode", std::string(to_string(r.mode))},
                   {"rate", r.rate},
                   {"factor", r.factor},
                   {"seed", r.seed},
                   {"touched_indices", r.touched_indices}};
  if (r.mode == CorruptionMode::Outliers) {
    j["touched_features"] = r.touched_features;
    auto originals = nlohmann::json::array();
    for (double v : r.original_values) originals.push_back(hex_double(v));
    j["original_values"] = std::move(originals);
  }
  return j;
}

inline CorruptionRecord corruption_record_from_json(const nlohmann::json& j) {
  CorruptionRecord r;
  const auto mode = detail::json_get<std::string>(j, "mode");
  if (mode == "outliers") {
    r.mode = CorruptionMode::Outliers;
  } else if (mode == "label-noise") {
    r.mode = CorruptionMode::LabelNoise;
  } else {
    throw DataError("unknown corruption mode '" + mode + "'");
  }
  r.rate = detail::json_get<double>(j, "rate");
  r.factor = detail::json_get<double>(j, "factor");
  r.seed = detail::json_get<std::uint64_t>(j, "seed");
  r.touched_indices = detail::json_get<std::vector<std::size_t>>(j, "touched_indices");
  if (r.mode == CorruptionMode::Outliers) {
    r.touched_features = detail::json_get<std::vector<std::size_t>>(j, "touched_features");
    for (const auto& s : detail::json_get<std::vector<std::string>>(j, "original_values")) {
      r.original_values.push_back(parse_hex_double(s));
    }
  }
  return r;
}

}  // namespace roboss
