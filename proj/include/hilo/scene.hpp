// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hilo/mask.hpp"

namespace hilo {

struct ObjectInstance {
  BinaryMask mask;
  std::int64_t class_id = 0;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct RelationTriplet {
  std::int64_t subject_idx = 0;
  std::int64_t object_idx = 0;
  std::int64_t relation_id = 0;

  friend bool operator==(const RelationTriplet&, const RelationTriplet&) = default;
};

struct SceneGraph {
  std::string scene_id;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<ObjectInstance> objects;
  std::vector<RelationTriplet> triplets;

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

struct Dataset {
  std::vector<std::string> object_class_names;
  std::vector<std::string> relation_class_names;
  std::vector<SceneGraph> scenes;

  std::int64_t num_object_classes() const {
    return static_cast<std::int64_t>(object_class_names.size());
  }
  std::int64_t num_relation_classes() const {
    return static_cast<std::int64_t>(relation_class_names.size());
  }
  std::int64_t triplet_count() const;

  /// Index of the scene with this id, or -1.
  std::int64_t find_scene(const std::string& scene_id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Per-relation triplet counts over a dataset.
struct RelationFrequencyTable {
  std::vector<std::int64_t> counts;

  std::int64_t size() const { return static_cast<std::int64_t>(counts.size()); }

  /// Relation ids ordered by descending count, ties by ascending id.
  std::vector<std::int64_t> descending_order() const;

  friend bool operator==(const RelationFrequencyTable&, const RelationFrequencyTable&) = default;
};

/// Checks every dataset invariant; throws hilo::Error naming the scene and field.
void validate(const Dataset& dataset);

nlohmann::json to_json(const Dataset& dataset);
/// Parses and validates.
Dataset dataset_from_json(const nlohmann::json& j);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Canonical serialization: sorted keys, compact, trailing newline.
std::string canonical_dump(const nlohmann::json& j);

RelationFrequencyTable compute_frequency_table(const Dataset& dataset);

/// Fraction of distinct (subject, object) pairs carrying two or more relations.
double multi_relation_pair_fraction(const Dataset& dataset);

// File helpers shared by the loaders.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hilo
