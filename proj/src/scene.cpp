// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/scene.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "hilo/error.hpp"

namespace hilo {

using nlohmann::json;

std::int64_t Dataset::triplet_count() const {
  std::int64_t n = 0;
  for (const auto& s : scenes) n += static_cast<std::int64_t>(s.triplets.size());
  return n;
}

std::int64_t Dataset::find_scene(const std::string& scene_id) const {
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (scenes[i].scene_id == scene_id) return static_cast<std::int64_t>(i);
  }
  return -1;
}

std::vector<std::int64_t> RelationFrequencyTable::descending_order() const {
  std::vector<std::int64_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return counts[a] > counts[b]; });
  return order;
}

namespace {

void check_names(const std::vector<std::string>& names, const char* field) {
  if (names.empty()) throw Error(std::string(field) + " must not be empty");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw Error(std::string(field) + " contains duplicate name '" + n + "'");
    }
  }
}

[[noreturn]] void scene_error(const SceneGraph& s, const std::string& what) {
  throw Error("scene '" + s.scene_id + "': " + what);
}

}  // namespace

void validate(const Dataset& dataset) {
  check_names(dataset.object_class_names, "object_class_names");
  check_names(dataset.relation_class_names, "relation_class_names");
  const auto num_classes = dataset.num_object_classes();
  const auto num_relations = dataset.num_relation_classes();
  std::set<std::string> ids;
  for (const auto& s : dataset.scenes) {
    if (!ids.insert(s.scene_id).second) scene_error(s, "duplicate scene_id");
    if (s.height < 0 || s.width < 0) scene_error(s, "height/width must be nonnegative");
    const auto n = static_cast<std::int64_t>(s.objects.size());
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& o = s.objects[i];
      const auto field = "objects[" + std::to_string(i) + "]";
      if (o.class_id < 0 || o.class_id >= num_classes) {
        scene_error(s, field + ".class_id " + std::to_string(o.class_id) + " out of range [0, " +
                           std::to_string(num_classes) + ")");
      }
      if (o.mask.height() != s.height || o.mask.width() != s.width) {
        scene_error(s, field + ".rle dimensions differ from the scene");
      }
    }
    for (std::size_t j = 0; j < s.triplets.size(); ++j) {
      const auto& t = s.triplets[j];
      const auto field = "triplets[" + std::to_string(j) + "]";
      if (t.subject_idx < 0 || t.subject_idx >= n) {
        scene_error(s, field + ".subject_idx " + std::to_string(t.subject_idx) + " out of range");
      }
      if (t.object_idx < 0 || t.object_idx >= n) {
        scene_error(s, field + ".object_idx " + std::to_string(t.object_idx) + " out of range");
      }
      if (t.subject_idx == t.object_idx) {
        scene_error(s, field + ": subject_idx == object_idx");
      }
      if (t.relation_id < 0 || t.relation_id >= num_relations) {
        scene_error(s, field + ".relation_id " + std::to_string(t.relation_id) +
                           " out of range [0, " + std::to_string(num_relations) + ")");
      }
    }
  }
}

json to_json(const Dataset& dataset) {
  json scenes = json::array();
  for (const auto& s : dataset.scenes) {
    json objects = json::array();
    for (const auto& o : s.objects) {
      objects.push_back({{"class_id", o.class_id}, {"rle", o.mask.runs()}});
    }
    json triplets = json::array();
    for (const auto& t : s.triplets) {
      triplets.push_back({{"subject_idx", t.subject_idx},
                          {"object_idx", t.object_idx},
                          {"relation_id", t.relation_id}});
    }
    scenes.push_back({{"scene_id", s.scene_id},
                      {"height", s.height},
                      {"width", s.width},
                      {"objects", std::move(objects)},
                      {"triplets", std::move(triplets)}});
  }
  return {{"object_class_names", dataset.object_class_names},
          {"relation_class_names", dataset.relation_class_names},
          {"scenes", std::move(scenes)}};
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(context + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(context + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Dataset dataset_from_json(const json& j) {
  Dataset d;
  d.object_class_names = field<std::vector<std::string>>(j, "object_class_names", "dataset");
  d.relation_class_names = field<std::vector<std::string>>(j, "relation_class_names", "dataset");
  const auto scenes = field<json>(j, "scenes", "dataset");
  if (!scenes.is_array()) throw ParseError("dataset: field 'scenes' must be an array");
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const auto& js = scenes[si];
    SceneGraph s;
    s.scene_id = field<std::string>(js, "scene_id", "scenes[" + std::to_string(si) + "]");
    const auto ctx = "scene '" + s.scene_id + "'";
    s.height = field<std::int64_t>(js, "height", ctx);
    s.width = field<std::int64_t>(js, "width", ctx);
    const auto objects = field<json>(js, "objects", ctx);
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto octx = ctx + " objects[" + std::to_string(i) + "]";
      ObjectInstance o;
      o.class_id = field<std::int64_t>(objects[i], "class_id", octx);
      auto runs = field<std::vector<std::int64_t>>(objects[i], "rle", octx);
      try {
        o.mask = BinaryMask(s.height, s.width, std::move(runs));
      } catch (const Error& e) {
        throw Error(octx + ".rle: " + e.what());
      }
      s.objects.push_back(std::move(o));
    }
    const auto triplets = field<json>(js, "triplets", ctx);
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      const auto tctx = ctx + " triplets[" + std::to_string(i) + "]";
      s.triplets.push_back({field<std::int64_t>(triplets[i], "subject_idx", tctx),
                            field<std::int64_t>(triplets[i], "object_idx", tctx),
                            field<std::int64_t>(triplets[i], "relation_id", tctx)});
    }
    d.scenes.push_back(std::move(s));
  }
  validate(d);
  return d;
}

std::string canonical_dump(const json& j) { return j.dump() + "\n"; }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return dataset_from_json(j);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  validate(dataset);
  write_text_file(path, canonical_dump(to_json(dataset)));
}

RelationFrequencyTable compute_frequency_table(const Dataset& dataset) {
  RelationFrequencyTable table;
  table.counts.assign(dataset.relation_class_names.size(), 0);
  for (const auto& s : dataset.scenes) {
    for (const auto& t : s.triplets) ++table.counts.at(static_cast<std::size_t>(t.relation_id));
  }
  return table;
}

double multi_relation_pair_fraction(const Dataset& dataset) {
  std::int64_t pairs = 0, multi = 0;
  for (const auto& s : dataset.scenes) {
    std::map<std::pair<std::int64_t, std::int64_t>, std::set<std::int64_t>> groups;
    for (const auto& t : s.triplets) groups[{t.subject_idx, t.object_idx}].insert(t.relation_id);
    for (const auto& [pair, rels] : groups) {
      ++pairs;
      if (rels.size() >= 2) ++multi;
    }
  }
  return pairs == 0 ? 0.0 : static_cast<double>(multi) / static_cast<double>(pairs);
}

}  // namespace hilo
