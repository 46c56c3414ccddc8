#pragma once
// Feature cache: one float32 row per image, little-endian, with a fixed
// header (magic "AANF", version, count, dim). Row-major storage so that
// row(i) hands the associative network a contiguous feature vector.

#include "aan/binio.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace aan {

using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline void save_features(const std::string& path, const FeatureMatrix& feats) {
  BinWriter w(path);
  w.magic("AANF");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(feats.rows()));
  w.u32(static_cast<std::uint32_t>(feats.cols()));
  w.f32s(feats.data(), static_cast<std::size_t>(feats.size()));
}

inline FeatureMatrix load_features(const std::string& path) {
  BinReader r(path);
  r.expect_magic("AANF", "feature cache");
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw std::runtime_error("feature cache: unsupported version " +
                             std::to_string(version) + " in " + path);
  const std::uint32_t count = r.u32();
  const std::uint32_t dim = r.u32();
  FeatureMatrix feats(count, dim);
  r.f32s(feats.data(), static_cast<std::size_t>(feats.size()));
  return feats;
}

}  // namespace aan
