#pragma once

// Block-structured synthetic data: features are drawn level by level, level l
// holding q^l coordinates of variance p^-l, and the signal carries energy r^l
// at level l. A compressor keeps levels 0..m and discards the rest.

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "sslab/errors.hpp"
#include "sslab/rng.hpp"

namespace sslab {

struct SpectrumConfig {
  int q = 2;                 // block-growth factor, block l has q^l coordinates
  double p = 2.1;            // spectral decay base, variance p^-l at level l
  double r = 0.99;           // signal decay base, ||theta_l||^2 = r^l
  double tau = 1.0;          // label noise standard deviation
  int m_max = 11;            // number of levels, l = 0 .. m_max-1
  std::uint64_t seed = 0;

  // True when r*p < 1; informational only, other values are accepted.
  bool fast_signal_decay() const { return r * p < 1.0; }

  void validate() const;
};

// JSON round trip; unknown keys are rejected.
SpectrumConfig spectrum_config_from_json(const std::string& text);
std::string spectrum_config_to_json(const SpectrumConfig& config);
SpectrumConfig load_spectrum_config(const std::string& path);

struct BlockDims {
  std::vector<Eigen::Index> dims;  // [q^0, ..., q^(levels-1)]
  Eigen::Index total = 0;          // sum of dims, the coordinate count L
};

// Dimensions of the first `levels` blocks. Throws LevelOutOfRange unless
// 1 <= levels <= config.m_max.
BlockDims block_dims(const SpectrumConfig& config, int levels);

// Same, without the m_max cap (levels >= 1 only).
BlockDims block_dims(int q, int levels);

Eigen::Index total_dim(int q, int levels);

// A level-indexed coefficient vector stored contiguously; block l occupies
// q^l entries and boundaries follow from q alone.
struct BlockVector {
  Eigen::VectorXd coeffs;
  int q = 2;
  int level_count = 0;

  Eigen::Index size() const { return coeffs.size(); }

  Eigen::Index level_offset(int level) const { return total_dim(q, level); }
  Eigen::Index level_dim(int level) const;

  Eigen::VectorBlock<Eigen::VectorXd> block(int level);
  Eigen::VectorBlock<const Eigen::VectorXd> block(int level) const;

  double level_sq_norm(int level) const { return block(level).squaredNorm(); }

  void check_consistent() const;
};

// Signal with every entry of block l equal to sqrt(r^l q^-l), so that
// ||theta_l||^2 = r^l exactly.
BlockVector make_ground_truth(const SpectrumConfig& config);

BlockVector zero_signal(const SpectrumConfig& config);

// n feature rows over all m_max levels; entry at level l is uniform on
// [-sqrt(3 p^-l), sqrt(3 p^-l)], i.e. variance p^-l. Each (sample, level)
// block has its own stream, so generation order does not matter.
Eigen::MatrixXd sample_features(const SpectrumConfig& config, int n, std::uint64_t seed);

// y_i = <x_i, theta> + tau * g_i with g_i standard Gaussian.
Eigen::VectorXd sample_labels(const BlockVector& theta, const Eigen::MatrixXd& features,
                              double tau, std::uint64_t seed);

// Blocks 0..m of v; the input is left untouched.
BlockVector truncate(const BlockVector& v, int m);

// Column view of the first m+1 levels of a feature matrix.
inline auto truncate_features(const Eigen::MatrixXd& features, int q, int m) {
  if (m < 0) throw LevelOutOfRange("truncation level must be >= 0");
  const Eigen::Index keep = total_dim(q, m + 1);
  if (keep > features.cols())
    throw LevelOutOfRange("truncation level exceeds the feature block count");
  return features.leftCols(keep);
}

}  // namespace sslab
