#pragma once
// Dataset assembly on top of the shape sampler, plus the on-disk layout:
//   <dir>/images/NNNNN.png  +  <dir>/manifest.jsonl
// Each entry is sampled from its own sub-seeded RNG, so entry i of
// (kind, seed) is reproducible in isolation and datasets of different kinds
// or seeds are independent streams. The default training set is literally
// the outlier set at k=7, so both spell the same bytes for equal seeds.

#include "aan/shape_world.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aan {

enum class DatasetKind : std::uint8_t {
  cnn_pretrain,        // 27 x 900, rule respected
  aan_train,           // 27 x 100 + 6 x 7 outliers (alias of outliers @ k=7)
  baseline_test,       // 27 x 100, rule respected
  nbyl_test,           // 6 x 100 non-big yellow lefts
  aan_train_outliers,  // 27 x 100 + 6 x k outliers
};

inline const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::cnn_pretrain: return "cnn_pretrain";
    case DatasetKind::aan_train: return "aan_train";
    case DatasetKind::baseline_test: return "baseline_test";
    case DatasetKind::nbyl_test: return "nbyl_test";
    default: return "aan_train_outliers";
  }
}

inline DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "cnn_pretrain") return DatasetKind::cnn_pretrain;
  if (s == "aan_train") return DatasetKind::aan_train;
  if (s == "baseline_test") return DatasetKind::baseline_test;
  if (s == "nbyl_test") return DatasetKind::nbyl_test;
  if (s == "aan_train_outliers") return DatasetKind::aan_train_outliers;
  throw std::runtime_error("unknown dataset kind: " + s);
}

inline const int kValidOutlierCounts[] = {0, 5, 7, 10, 20, 30, 40, 50, 75, 100};

inline bool valid_outlier_count(int k) {
  for (int v : kValidOutlierCounts)
    if (v == k) return true;
  return false;
}

struct DatasetManifest {
  DatasetKind kind = DatasetKind::aan_train;
  std::uint64_t seed = 0;
  int outliers_per_kind = 0;  // k; only meaningful for the training kinds
  std::vector<ImageLabel> entries;
};

namespace datasetdetail {

// Seeding tag per kind; the two training spellings share one stream.
inline std::uint64_t kind_tag(DatasetKind k) {
  switch (k) {
    case DatasetKind::cnn_pretrain: return 1;
    case DatasetKind::aan_train:
    case DatasetKind::aan_train_outliers: return 2;
    case DatasetKind::baseline_test: return 3;
    default: return 4;
  }
}

}  // namespace datasetdetail

// Per-class count of the class-balanced block: 900 pretrain, 100 elsewhere.
inline int default_per_class(DatasetKind k) {
  switch (k) {
    case DatasetKind::cnn_pretrain: return 900;
    case DatasetKind::aan_train:
    case DatasetKind::aan_train_outliers:
    case DatasetKind::baseline_test: return 100;
    default: return 0;  // nbyl_test has no balanced block
  }
}

inline DatasetManifest generate_dataset(DatasetKind kind, std::uint64_t seed,
                                        int outliers_per_kind = -1,
                                        int per_class_override = -1) {
  DatasetManifest m;
  m.kind = kind;
  m.seed = seed;

  int k = outliers_per_kind;
  if (kind == DatasetKind::aan_train) k = 7;
  if (kind == DatasetKind::aan_train_outliers) {
    if (k < 0) k = 7;
    if (!valid_outlier_count(k))
      throw std::runtime_error("invalid outlier count k=" + std::to_string(k));
  }
  if (kind == DatasetKind::cnn_pretrain || kind == DatasetKind::baseline_test ||
      kind == DatasetKind::nbyl_test)
    k = 0;
  m.outliers_per_kind = k;

  const std::uint64_t tag = datasetdetail::kind_tag(kind);
  const int per_class =
      per_class_override >= 0 ? per_class_override : default_per_class(kind);
  std::uint64_t index = 0;

  // Class-balanced block, class_index order (size, shape, color).
  if (per_class > 0) {
    for (int z = 0; z < 3; ++z)
      for (int sh = 0; sh < 3; ++sh)
        for (int co = 0; co < 3; ++co)
          for (int i = 0; i < per_class; ++i) {
            Rng rng(sub_seed(seed, tag, index++));
            SampleConstraint con;
            con.forbid_rule_breakers = true;
            con.has_size = true;
            con.size = static_cast<Size>(z);
            con.has_shape = true;
            con.shape = static_cast<Shape>(sh);
            con.has_color = true;
            con.color = static_cast<Color>(co);
            m.entries.push_back(sample_shape(rng, con));
          }
  }

  // Rule-breaking probes: yellow, left, non-big; one block per
  // (medium|small) x shape.
  const int probes = kind == DatasetKind::nbyl_test ? 100 : k;
  if (probes > 0) {
    for (int z = 1; z < 3; ++z)
      for (int sh = 0; sh < 3; ++sh)
        for (int i = 0; i < probes; ++i) {
          Rng rng(sub_seed(seed, tag, index++));
          SampleConstraint con;
          con.has_size = true;
          con.size = static_cast<Size>(z);
          con.has_shape = true;
          con.shape = static_cast<Shape>(sh);
          con.has_color = true;
          con.color = Color::yellow;
          con.has_left = true;
          con.left = true;
          m.entries.push_back(sample_shape(rng, con));
        }
  }
  return m;
}

inline std::string entry_image_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu.png", i);
  return std::string("images/") + buf;
}

// --- manifest JSONL ---------------------------------------------------------

inline nlohmann::ordered_json entry_to_json(const ImageLabel& e, const std::string& path) {
  nlohmann::ordered_json j;
  j["path"] = path;
  j["shape"] = to_string(e.spec.shape);
  j["color"] = to_string(e.spec.color);
  j["size"] = to_string(e.spec.size);
  j["cx"] = e.spec.cx;
  j["cy"] = e.spec.cy;
  j["extent"] = e.spec.extent;
  j["rgb"] = {e.spec.rgb[0], e.spec.rgb[1], e.spec.rgb[2]};
  j["is_left"] = e.is_left;
  j["class_index"] = e.class_index;
  return j;
}

inline void write_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::binary);  // binary: stable newlines
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    out << entry_to_json(m.entries[i], entry_image_name(i)).dump() << "\n";
}

struct ManifestEntry {
  std::string path;
  ImageLabel label;
};

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("manifest parse error at line " + std::to_string(lineno) +
                               ": " + e.what());
    }
    ManifestEntry me;
    me.path = j.at("path").get<std::string>();
    ShapeSpec& s = me.label.spec;
    s.shape = enum_from_string<Shape>(j.at("shape").get<std::string>());
    s.color = enum_from_string<Color>(j.at("color").get<std::string>());
    s.size = enum_from_string<Size>(j.at("size").get<std::string>());
    s.cx = j.at("cx").get<int>();
    s.cy = j.at("cy").get<int>();
    s.extent = j.at("extent").get<int>();
    auto rgb = j.at("rgb");
    for (int c = 0; c < 3; ++c) s.rgb[c] = rgb.at(c).get<std::uint8_t>();
    me.label.is_left = j.at("is_left").get<bool>();
    me.label.class_index = j.at("class_index").get<int>();
    out.push_back(std::move(me));
  }
  return out;
}

// Renders every entry and writes <dir>/images/*.png + <dir>/manifest.jsonl.
inline void write_dataset(const std::string& dir, const DatasetManifest& m) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const ImageRGB img = render(m.entries[i].spec);
    write_png((fs::path(dir) / entry_image_name(i)).string(), img);
  }
  write_manifest((fs::path(dir) / "manifest.jsonl").string(), m);
}

}  // namespace aan
