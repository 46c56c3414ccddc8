#pragma once
// Artifact plumbing shared by the command-line tool and the experiment
// drivers: lazily trains or loads the reservoir, extracts per-dataset
// feature matrices, and keeps both cached on disk under a work directory.
//
//   <work>/models/reservoir_*.aanr
//   <work>/features/<set>_*.aanf
//
// Feature files are keyed by the data seed and the reservoir checksum, so a
// stale cache from a different front end can never be picked up silently.

#include "aan/dataset.hpp"
#include "aan/feature_cache.hpp"
#include "aan/harness.hpp"
#include "aan/reservoir.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace aan {

static_assert(kFeatDim == kFeatureDim, "network and reservoir disagree on feature width");

struct PipelineConfig {
  std::string work = "work";
  std::uint64_t data_seed = 101;
  int pretrain_per_class = 900;   // 200 gives the fast, lower-fidelity front end
  ReservoirTrainConfig cnn;

  static PipelineConfig from(const ParamSet& ps, const std::string& work_dir) {
    PipelineConfig c;
    c.work = work_dir;
    c.data_seed = static_cast<std::uint64_t>(ps.get_int("data.seed", 101));
    c.pretrain_per_class =
        static_cast<int>(ps.get_int("data.pretrain_per_class", c.pretrain_per_class));
    c.cnn.seed = static_cast<std::uint64_t>(ps.get_int("cnn.seed", 7));
    c.cnn.epochs = static_cast<int>(ps.get_int("cnn.epochs", c.cnn.epochs));
    c.cnn.lr = ps.get("cnn.lr", c.cnn.lr);
    c.cnn.lr_decay = ps.get("cnn.lr_decay", c.cnn.lr_decay);
    c.cnn.momentum = ps.get("cnn.momentum", c.cnn.momentum);
    c.cnn.batch = static_cast<int>(ps.get_int("cnn.batch", c.cnn.batch));
    return c;
  }
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, bool verbose = true)
      : cfg_(std::move(cfg)), verbose_(verbose) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(cfg_.work) / "models");
    fs::create_directories(fs::path(cfg_.work) / "features");
    fs::create_directories(fs::path(cfg_.work) / "reports");
  }

  const PipelineConfig& config() const { return cfg_; }

  std::string reports_dir() const {
    return (std::filesystem::path(cfg_.work) / "reports").string();
  }

  std::string reservoir_path() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "reservoir_n%d_e%d_s%" PRIu64 "_d%" PRIu64 ".aanr",
                  cfg_.pretrain_per_class, cfg_.cnn.epochs, cfg_.cnn.seed, cfg_.data_seed);
    return (std::filesystem::path(cfg_.work) / "models" / buf).string();
  }

  ReservoirModel& reservoir() {
    if (model_) return *model_;
    const std::string path = reservoir_path();
    if (std::filesystem::exists(path)) {
      log("loading reservoir: " + path);
      model_ = load_reservoir(path);
      return *model_;
    }
    log("training reservoir (" + std::to_string(cfg_.pretrain_per_class) + "/class, " +
        std::to_string(cfg_.cnn.epochs) + " epochs)");
    const DatasetManifest pre = generate_dataset(DatasetKind::cnn_pretrain, cfg_.data_seed,
                                                 -1, cfg_.pretrain_per_class);
    ImageSource src = [&pre](std::size_t i) { return render(pre.entries[i].spec); };
    ReservoirTrainConfig tc = cfg_.cnn;
    if (verbose_ && !tc.on_epoch) {
      tc.on_epoch = [](int e, double loss) {
        std::cerr << "  epoch " << (e + 1) << "  mean loss " << loss << "\n";
      };
    }
    model_ = train_reservoir(pre.entries, src, tc);
    fit_normalization(*model_, pre.entries.size(), src);
    save_reservoir(path, *model_);
    log("saved reservoir: " + path);
    return *model_;
  }

  // Feature matrix for one of the named datasets; disk-cached.
  const FeatureSet& features(DatasetKind kind, int outliers = -1) {
    const std::string key = set_key(kind, outliers);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const std::string path = features_path(key);
    DatasetManifest m = generate_dataset(kind, cfg_.data_seed, outliers);
    FeatureSet fs;
    fs.labels = m.entries;
    if (std::filesystem::exists(path)) {
      fs.X = load_features(path);
      if (fs.X.rows() != static_cast<Eigen::Index>(m.entries.size()))
        throw std::runtime_error("feature cache row count mismatch: " + path);
    } else {
      log("extracting features: " + key + " (" + std::to_string(m.entries.size()) + " images)");
      fs.X = extract(m);
      save_features(path, fs.X);
    }
    return cache_.emplace(key, std::move(fs)).first->second;
  }

  // Training set for an outlier count k, assembled from the shared balanced
  // block plus freshly extracted probe rows. Returned by value: the sweep
  // walks many of these and they are large.
  FeatureSet outlier_features(int k) {
    const FeatureSet& base = features(DatasetKind::aan_train);  // k = 7
    DatasetManifest m = generate_dataset(DatasetKind::aan_train_outliers, cfg_.data_seed, k);
    const int balanced = 27 * default_per_class(DatasetKind::aan_train);
    FeatureSet fs;
    fs.labels = m.entries;
    fs.X.resize(static_cast<Eigen::Index>(m.entries.size()), kFeatDim);
    fs.X.topRows(balanced) = base.X.topRows(balanced);
    ReservoirModel& model = reservoir();
    std::vector<float> row(kFeatDim);
    for (std::size_t i = balanced; i < m.entries.size(); ++i) {
      model.normalized_features(image_to_input(render(m.entries[i].spec)), row.data());
      for (int f = 0; f < kFeatDim; ++f) fs.X(static_cast<Eigen::Index>(i), f) = row[f];
    }
    return fs;
  }

  // Classifier-head accuracy on images the reservoir never saw; a sanity
  // check that the feature bank actually carries the scene.
  HeadAccuracy holdout_head_accuracy(int per_class = 30) {
    const DatasetManifest held = generate_dataset(
        DatasetKind::cnn_pretrain, sub_seed(cfg_.data_seed, 0x484f4c44ull), -1, per_class);
    ImageSource src = [&held](std::size_t i) { return render(held.entries[i].spec); };
    return evaluate_head(reservoir(), held.entries, src);
  }

  void drop_cached(DatasetKind kind, int outliers = -1) { cache_.erase(set_key(kind, outliers)); }

 private:
  std::string set_key(DatasetKind kind, int outliers) const {
    std::string key = to_string(kind);
    if (kind == DatasetKind::aan_train_outliers)
      key += "_k" + std::to_string(outliers < 0 ? 7 : outliers);
    return key;
  }

  std::string features_path(const std::string& key) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "_d%" PRIu64 "_r%016" PRIx64 ".aanf", cfg_.data_seed,
                  reservoir_checksum(reservoir()));
    return (std::filesystem::path(cfg_.work) / "features" / (key + buf)).string();
  }

  FeatureMatrix extract(const DatasetManifest& m) {
    ReservoirModel& model = reservoir();
    FeatureMatrix X(static_cast<Eigen::Index>(m.entries.size()), kFeatDim);
    std::vector<float> row(kFeatDim);
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      model.normalized_features(image_to_input(render(m.entries[i].spec)), row.data());
      for (int f = 0; f < kFeatDim; ++f) X(static_cast<Eigen::Index>(i), f) = row[f];
    }
    return X;
  }

  void log(const std::string& msg) const {
    if (verbose_) std::cerr << "[pipeline] " << msg << "\n";
  }

  PipelineConfig cfg_;
  bool verbose_;
  std::optional<ReservoirModel> model_;
  std::map<std::string, FeatureSet> cache_;
};

}  // namespace aan
