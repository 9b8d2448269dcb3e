#include "sslab/multiscale_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sslab {

namespace {

// Largest supported coordinate count; q^levels beyond this is rejected.
constexpr Eigen::Index kMaxTotalDim = Eigen::Index(1) << 31;

}  // namespace

void SpectrumConfig::validate() const {
  if (q < 2) throw ConfigError("q must be an integer >= 2");
  if (!(p > 1.0)) throw ConfigError("p must be > 1");
  if (!(static_cast<double>(q) < p)) throw ConfigError("q < p is required for finite feature energy");
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("r must lie in (0, 1)");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (m_max < 1) throw ConfigError("m_max must be >= 1");
  if (total_dim(q, m_max) > kMaxTotalDim)
    throw ConfigError("q^m_max exceeds the supported coordinate count");
}

SpectrumConfig spectrum_config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config JSON: expected an object");

  static const char* kFields[] = {"q", "p", "r", "tau", "m_max", "seed"};
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* f : kFields) known = known || key == f;
    if (!known) throw ParseError("config JSON: unknown key '" + key + "'");
  }
  for (const char* f : kFields)
    if (!doc.contains(f)) throw ParseError(std::string("config JSON: missing key '") + f + "'");

  SpectrumConfig config;
  try {
    config.q = doc.at("q").get<int>();
    config.p = doc.at("p").get<double>();
    config.r = doc.at("r").get<double>();
    config.tau = doc.at("tau").get<double>();
    config.m_max = doc.at("m_max").get<int>();
    config.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  config.validate();
  return config;
}

std::string spectrum_config_to_json(const SpectrumConfig& config) {
  nlohmann::json doc{{"q", config.q},         {"p", config.p},
                     {"r", config.r},         {"tau", config.tau},
                     {"m_max", config.m_max}, {"seed", config.seed}};
  return doc.dump(2) + "\n";
}

SpectrumConfig load_spectrum_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return spectrum_config_from_json(buffer.str());
}

Eigen::Index total_dim(int q, int levels) {
  Eigen::Index total = 0;
  Eigen::Index dim = 1;
  for (int l = 0; l < levels; ++l) {
    total += dim;
    if (total > kMaxTotalDim) throw LevelOutOfRange("coordinate count overflow");
    dim *= q;
  }
  return total;
}

BlockDims block_dims(int q, int levels) {
  if (levels < 1) throw LevelOutOfRange("levels must be >= 1");
  BlockDims out;
  out.dims.reserve(static_cast<std::size_t>(levels));
  Eigen::Index dim = 1;
  for (int l = 0; l < levels; ++l) {
    out.dims.push_back(dim);
    out.total += dim;
    if (out.total > kMaxTotalDim) throw LevelOutOfRange("coordinate count overflow");
    dim *= q;
  }
  return out;
}

BlockDims block_dims(const SpectrumConfig& config, int levels) {
  if (levels < 1 || levels > config.m_max)
    throw LevelOutOfRange("levels must satisfy 1 <= levels <= m_max");
  return block_dims(config.q, levels);
}

Eigen::Index BlockVector::level_dim(int level) const {
  if (level < 0 || level >= level_count) throw LevelOutOfRange("block level out of range");
  Eigen::Index dim = 1;
  for (int l = 0; l < level; ++l) dim *= q;
  return dim;
}

Eigen::VectorBlock<Eigen::VectorXd> BlockVector::block(int level) {
  return coeffs.segment(level_offset(level), level_dim(level));
}

Eigen::VectorBlock<const Eigen::VectorXd> BlockVector::block(int level) const {
  return coeffs.segment(level_offset(level), level_dim(level));
}

void BlockVector::check_consistent() const {
  if (level_count < 1) throw ShapeMismatch("BlockVector needs at least one level");
  if (coeffs.size() != total_dim(q, level_count))
    throw ShapeMismatch("BlockVector length does not match its block structure");
}

BlockVector make_ground_truth(const SpectrumConfig& config) {
  config.validate();
  BlockVector theta;
  theta.q = config.q;
  theta.level_count = config.m_max;
  theta.coeffs.resize(total_dim(config.q, config.m_max));
  for (int l = 0; l < config.m_max; ++l) {
    const double dim = static_cast<double>(theta.level_dim(l));
    theta.block(l).setConstant(std::sqrt(std::pow(config.r, l) / dim));
  }
  return theta;
}

BlockVector zero_signal(const SpectrumConfig& config) {
  BlockVector theta;
  theta.q = config.q;
  theta.level_count = config.m_max;
  theta.coeffs = Eigen::VectorXd::Zero(total_dim(config.q, config.m_max));
  return theta;
}

Eigen::MatrixXd sample_features(const SpectrumConfig& config, int n, std::uint64_t seed) {
  config.validate();
  if (n < 1) throw DomainError("sample count must be >= 1");
  const BlockDims dims = block_dims(config.q, config.m_max);
  Eigen::MatrixXd features(n, dims.total);
  for (int i = 0; i < n; ++i) {
    Eigen::Index offset = 0;
    for (int l = 0; l < config.m_max; ++l) {
      const double half_width = std::sqrt(3.0 * std::pow(config.p, -l));
      StreamRng rng = StreamRng::keyed(seed, static_cast<std::uint64_t>(StreamTag::features),
                                       static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(l));
      for (Eigen::Index j = 0; j < dims.dims[static_cast<std::size_t>(l)]; ++j)
        features(i, offset + j) = rng.next_symmetric(half_width);
      offset += dims.dims[static_cast<std::size_t>(l)];
    }
  }
  return features;
}

Eigen::VectorXd sample_labels(const BlockVector& theta, const Eigen::MatrixXd& features,
                              double tau, std::uint64_t seed) {
  theta.check_consistent();
  if (features.cols() != theta.size())
    throw ShapeMismatch("feature and signal block structures differ");
  if (tau < 0.0) throw DomainError("tau must be >= 0");

  Eigen::VectorXd y = features * theta.coeffs;
  if (tau > 0.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      StreamRng rng = StreamRng::keyed(seed, static_cast<std::uint64_t>(StreamTag::label_noise),
                                       static_cast<std::uint64_t>(i));
      y(i) += tau * rng.next_gaussian();
    }
  }
  return y;
}

BlockVector truncate(const BlockVector& v, int m) {
  v.check_consistent();
  if (m < 0 || m >= v.level_count)
    throw LevelOutOfRange("truncation level must satisfy 0 <= m < level_count");
  BlockVector out;
  out.q = v.q;
  out.level_count = m + 1;
  out.coeffs = v.coeffs.head(total_dim(v.q, m + 1));
  return out;
}

}  // namespace sslab
