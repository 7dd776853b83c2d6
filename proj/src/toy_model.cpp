// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "hilo/error.hpp"
#include "hilo/toytrain.hpp"

namespace hilo {
namespace {

template <typename Derived>
void append(std::vector<double>& out, const Eigen::DenseBase<Derived>& m) {
  const auto& d = m.derived();
  out.insert(out.end(), d.data(), d.data() + d.size());
}

template <typename Derived>
std::size_t take(std::span<const double> values, std::size_t offset, Eigen::DenseBase<Derived>& m) {
  auto& d = m.derived();
  const auto n = static_cast<std::size_t>(d.size());
  std::copy(values.begin() + static_cast<std::ptrdiff_t>(offset),
            values.begin() + static_cast<std::ptrdiff_t>(offset + n), d.data());
  return offset + n;
}

Eigen::MatrixXd gaussian(std::int64_t rows, std::int64_t cols, double scale, std::mt19937_64& rng) {
  if (scale == 0.0) return Eigen::MatrixXd::Zero(rows, cols);
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
  return m;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::vector<double> read_doubles(const nlohmann::json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ParseError(std::string("model: missing array '") + key + "'");
  }
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != expected) {
    throw ParseError(std::string("model: '") + key + "' has " + std::to_string(v.size()) +
                     " values, expected " + std::to_string(expected));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw ParseError(std::string("model: non-finite value in '") + key + "'");
  }
  return v;
}

}  // namespace

std::size_t BranchParams::size() const {
  return static_cast<std::size_t>(queries.size() + subject_w.size() + subject_b.size() +
                                  object_w.size() + object_b.size() + relation_w.size() +
                                  relation_b.size() + subject_mask_w.size() +
                                  subject_mask_b.size() + object_mask_w.size() +
                                  object_mask_b.size());
}

std::vector<double> BranchParams::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  append(out, queries);
  append(out, subject_w);
  append(out, subject_b);
  append(out, object_w);
  append(out, object_b);
  append(out, relation_w);
  append(out, relation_b);
  append(out, subject_mask_w);
  append(out, subject_mask_b);
  append(out, object_mask_w);
  append(out, object_mask_b);
  return out;
}

void BranchParams::assign(std::span<const double> values) {
  if (values.size() != size()) {
    throw Error("branch parameters: expected " + std::to_string(size()) + " values, got " +
                std::to_string(values.size()));
  }
  std::size_t at = 0;
  at = take(values, at, queries);
  at = take(values, at, subject_w);
  at = take(values, at, subject_b);
  at = take(values, at, object_w);
  at = take(values, at, object_b);
  at = take(values, at, relation_w);
  at = take(values, at, relation_b);
  at = take(values, at, subject_mask_w);
  at = take(values, at, subject_mask_b);
  at = take(values, at, object_mask_w);
  take(values, at, object_mask_b);
}

BranchParams BranchParams::zeros_like() const {
  BranchParams z;
  z.queries = Eigen::MatrixXd::Zero(queries.rows(), queries.cols());
  z.subject_w = Eigen::MatrixXd::Zero(subject_w.rows(), subject_w.cols());
  z.subject_b = Eigen::VectorXd::Zero(subject_b.size());
  z.object_w = Eigen::MatrixXd::Zero(object_w.rows(), object_w.cols());
  z.object_b = Eigen::VectorXd::Zero(object_b.size());
  z.relation_w = Eigen::MatrixXd::Zero(relation_w.rows(), relation_w.cols());
  z.relation_b = Eigen::VectorXd::Zero(relation_b.size());
  z.subject_mask_w = Eigen::MatrixXd::Zero(subject_mask_w.rows(), subject_mask_w.cols());
  z.subject_mask_b = Eigen::VectorXd::Zero(subject_mask_b.size());
  z.object_mask_w = Eigen::MatrixXd::Zero(object_mask_w.rows(), object_mask_w.cols());
  z.object_mask_b = Eigen::VectorXd::Zero(object_mask_b.size());
  return z;
}

ToyModel ToyModel::initialize(std::int64_t num_object_classes, std::int64_t num_relation_classes,
                              std::int64_t grid_size, const ModelConfig& config,
                              std::uint64_t seed) {
  if (num_object_classes <= 0 || num_relation_classes <= 0 || grid_size <= 0 ||
      config.num_queries <= 0 || config.hidden_dim <= 0 || !(config.init_scale >= 0.0)) {
    throw Error("model: sizes must be positive and init_scale non-negative");
  }
  ToyModel m;
  m.num_classes_ = num_object_classes;
  m.num_relations_ = num_relation_classes;
  m.grid_ = grid_size;
  m.num_queries_ = config.num_queries;
  m.hidden_ = config.hidden_dim;
  std::mt19937_64 rng(seed);
  const auto d = config.hidden_dim;
  const auto pixels = grid_size * grid_size;
  // Every pixel contributes one active input, so 1/grid keeps z pre-activations near unit scale.
  m.projection_ = gaussian(d, pixels * (num_object_classes + 1), 1.0 / static_cast<double>(grid_size), rng);
  m.projection_bias_ = gaussian(d, 1, 0.1, rng).col(0);

  const double s = config.init_scale;
  BranchParams b;
  b.queries = gaussian(config.num_queries, d, 1.0, rng);
  b.subject_w = gaussian(num_object_classes + 1, d, s, rng);
  b.subject_b = Eigen::VectorXd::Zero(num_object_classes + 1);
  b.object_w = gaussian(num_object_classes + 1, d, s, rng);
  b.object_b = Eigen::VectorXd::Zero(num_object_classes + 1);
  b.relation_w = gaussian(num_relation_classes + 1, d, s, rng);
  b.relation_b = Eigen::VectorXd::Zero(num_relation_classes + 1);
  b.subject_mask_w = gaussian(m.pixel_feature_width(), d, s, rng);
  b.subject_mask_b = Eigen::VectorXd::Zero(m.pixel_feature_width());
  b.object_mask_w = gaussian(m.pixel_feature_width(), d, s, rng);
  b.object_mask_b = Eigen::VectorXd::Zero(m.pixel_feature_width());
  // Both decoders start from the same point; only their training data differs.
  m.branches_ = {b, b};
  return m;
}

SceneEncoding ToyModel::encode(const SceneGraph& scene) const {
  if (scene.height != grid_ || scene.width != grid_) {
    throw Error("scene '" + scene.scene_id + "': model expects a " + std::to_string(grid_) + "x" +
                std::to_string(grid_) + " grid, got " + std::to_string(scene.height) + "x" +
                std::to_string(scene.width));
  }
  const auto n = grid_ * grid_;
  std::vector<std::int64_t> label(static_cast<std::size_t>(n), num_classes_);
  for (const auto& obj : scene.objects) {
    if (obj.class_id < 0 || obj.class_id >= num_classes_) {
      throw Error("scene '" + scene.scene_id + "': object class " + std::to_string(obj.class_id) +
                  " outside the model's " + std::to_string(num_classes_) + " classes");
    }
    const auto bits = obj.mask.to_bits();
    for (std::int64_t i = 0; i < n; ++i) {
      if (bits[static_cast<std::size_t>(i)]) label[static_cast<std::size_t>(i)] = obj.class_id;
    }
  }
  SceneEncoding enc;
  enc.pixels = Eigen::MatrixXd::Zero(n, pixel_feature_width());
  Eigen::VectorXd pre = projection_bias_;
  const double centre = static_cast<double>(grid_ - 1) / 2.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto c = label[static_cast<std::size_t>(i)];
    pre += projection_.col(i * (num_classes_ + 1) + c);
    enc.pixels(i, c) = 1.0;
    enc.pixels(i, num_classes_ + 1) = (static_cast<double>(i / grid_) - centre) / static_cast<double>(grid_);
    enc.pixels(i, num_classes_ + 2) = (static_cast<double>(i % grid_) - centre) / static_cast<double>(grid_);
  }
  enc.context = pre.array().tanh();
  return enc;
}

std::vector<PredictedTriplet> ToyModel::forward(Branch b, const SceneEncoding& enc) const {
  const auto& p = branch(b);
  std::vector<PredictedTriplet> out;
  out.reserve(static_cast<std::size_t>(num_queries_));
  for (std::int64_t q = 0; q < num_queries_; ++q) {
    const Eigen::VectorXd h = (p.queries.row(q).transpose() + enc.context).array().tanh();
    PredictedTriplet t;
    t.subject_logits = to_vector(p.subject_w * h + p.subject_b);
    t.object_logits = to_vector(p.object_w * h + p.object_b);
    t.relation_logits = to_vector(p.relation_w * h + p.relation_b);
    t.subject_mask_logits = to_vector(enc.pixels * (p.subject_mask_w * h + p.subject_mask_b));
    t.object_mask_logits = to_vector(enc.pixels * (p.object_mask_w * h + p.object_mask_b));
    out.push_back(std::move(t));
  }
  return out;
}

void ToyModel::backward(Branch b, const SceneEncoding& enc,
                        std::span<const PredictedTriplet> output_grads, BranchParams& grads) const {
  if (static_cast<std::int64_t>(output_grads.size()) != num_queries_) {
    throw Error("backward: expected one gradient per query");
  }
  const auto& p = branch(b);
  for (std::int64_t q = 0; q < num_queries_; ++q) {
    const auto& g = output_grads[static_cast<std::size_t>(q)];
    const Eigen::VectorXd h = (p.queries.row(q).transpose() + enc.context).array().tanh();
    Eigen::VectorXd dh = Eigen::VectorXd::Zero(hidden_);

    const auto head = [&](const std::vector<double>& up, const Eigen::MatrixXd& w,
                          Eigen::MatrixXd& dw, Eigen::VectorXd& db) {
      const auto u = as_vector(up);
      dw.noalias() += u * h.transpose();
      db += u;
      dh.noalias() += w.transpose() * u;
    };
    head(g.subject_logits, p.subject_w, grads.subject_w, grads.subject_b);
    head(g.object_logits, p.object_w, grads.object_w, grads.object_b);
    head(g.relation_logits, p.relation_w, grads.relation_w, grads.relation_b);
    const Eigen::VectorXd vs = enc.pixels.transpose() * as_vector(g.subject_mask_logits);
    head(to_vector(vs), p.subject_mask_w, grads.subject_mask_w, grads.subject_mask_b);
    const Eigen::VectorXd vo = enc.pixels.transpose() * as_vector(g.object_mask_logits);
    head(to_vector(vo), p.object_mask_w, grads.object_mask_w, grads.object_mask_b);

    grads.queries.row(q) += (dh.array() * (1.0 - h.array().square())).matrix().transpose();
  }
}

std::vector<double> ToyModel::parameters() const {
  auto out = branches_[0].flatten();
  const auto lh = branches_[1].flatten();
  out.insert(out.end(), lh.begin(), lh.end());
  return out;
}

void ToyModel::set_parameters(std::span<const double> values) {
  const auto n = branches_[0].size();
  if (values.size() != n + branches_[1].size()) {
    throw Error("model: expected " + std::to_string(n + branches_[1].size()) +
                " parameters, got " + std::to_string(values.size()));
  }
  branches_[0].assign(values.subspan(0, n));
  branches_[1].assign(values.subspan(n));
}

nlohmann::json ToyModel::to_json() const {
  nlohmann::json j;
  j["format"] = "hilo-toy-model";
  j["version"] = 1;
  j["num_object_classes"] = num_classes_;
  j["num_relation_classes"] = num_relations_;
  j["grid_size"] = grid_;
  j["num_queries"] = num_queries_;
  j["hidden_dim"] = hidden_;
  std::vector<double> proj;
  append(proj, projection_);
  j["projection"] = proj;
  j["projection_bias"] = to_vector(projection_bias_);
  j["hl"] = branches_[0].flatten();
  j["lh"] = branches_[1].flatten();
  return j;
}

ToyModel ToyModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", std::string()) != "hilo-toy-model") {
    throw ParseError("model: not a hilo-toy-model document");
  }
  if (j.value("version", 0) != 1) throw ParseError("model: unsupported version");
  ModelConfig cfg;
  std::int64_t classes = 0, relations = 0, grid = 0;
  try {
    classes = j.at("num_object_classes").get<std::int64_t>();
    relations = j.at("num_relation_classes").get<std::int64_t>();
    grid = j.at("grid_size").get<std::int64_t>();
    cfg.num_queries = j.at("num_queries").get<std::int64_t>();
    cfg.hidden_dim = j.at("hidden_dim").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  cfg.init_scale = 0.0;
  ToyModel m = initialize(classes, relations, grid, cfg, 0);
  const auto proj = read_doubles(j, "projection", static_cast<std::size_t>(m.projection_.size()));
  take(proj, 0, m.projection_);
  const auto bias = read_doubles(j, "projection_bias", static_cast<std::size_t>(m.hidden_));
  take(bias, 0, m.projection_bias_);
  m.branches_[0].assign(read_doubles(j, "hl", m.branches_[0].size()));
  m.branches_[1].assign(read_doubles(j, "lh", m.branches_[1].size()));
  return m;
}

void save_model(const ToyModel& model, const std::filesystem::path& path) {
  write_text_file(path, canonical_dump(model.to_json()));
}

ToyModel load_model(const std::filesystem::path& path) { return ToyModel::from_json(read_json_file(path)); }

}  // namespace hilo
