#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace impactuq {

inline constexpr int kQrfFeatures = 4;

// Feature order is fixed: day of month, month, precipitation, temperature.
struct TabularSample {
  std::array<double, kQrfFeatures> features;
  double target;
};

struct QrfConfig {
  int n_trees = 1000;
  int min_samples_split = 10;
  int min_samples_leaf = 1;
  int max_features = 0;  // 0 means all features at every split
  bool bootstrap = true;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Quantile regression forest: CART regression trees grown on variance
// reduction whose leaves keep every training occurrence, so conditional
// quantiles come from a weighted empirical CDF instead of leaf means.
class QrfModel {
 public:
  struct Node {
    double threshold = 0.0;
    std::int32_t feature = -1;  // -1 marks a leaf
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t leaf_start = 0;  // into Tree::leaf_indices
    std::uint32_t leaf_count = 0;
  };

  struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root
    // Original training-row ids per leaf, packed; bootstrap duplicates are
    // retained with multiplicity.
    std::vector<std::uint32_t> leaf_indices;
  };

  // Grows cfg.n_trees trees; tree t uses its own stream seeded by
  // mix64(cfg.seed, t), so the forest is identical for any thread count.
  static QrfModel fit(const std::vector<TabularSample>& samples,
                      const QrfConfig& cfg, int n_threads = 0);

  // Weighted-CDF quantile, inverse-CDF (lower) convention:
  // inf{ y in training targets : F(y|x) >= q }. Requires 0 < q < 1.
  double predict_quantile(const std::array<double, kQrfFeatures>& x,
                          double q) const;
  // Convenience: both ends of a band with a single forest traversal.
  std::pair<double, double> predict_quantile_pair(
      const std::array<double, kQrfFeatures>& x, double q_lower,
      double q_upper) const;
  double predict_mean(const std::array<double, kQrfFeatures>& x) const;

  void save(const std::string& path) const;
  static QrfModel load(const std::string& path);

  const QrfConfig& config() const { return cfg_; }
  const std::vector<double>& targets() const { return targets_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  friend class QrfPredictor;
  void finalize();  // builds the target-sorted scan order

  QrfConfig cfg_;
  std::vector<double> targets_;        // original training targets
  std::vector<Tree> trees_;
  std::vector<std::uint32_t> order_;   // row ids sorted by (target, id)
};

// Reusable prediction workspace; one per thread. The model must outlive it.
class QrfPredictor {
 public:
  explicit QrfPredictor(const QrfModel& model);

  double quantile(const std::array<double, kQrfFeatures>& x, double q);
  std::pair<double, double> quantile_pair(
      const std::array<double, kQrfFeatures>& x, double q_lower,
      double q_upper);
  double mean(const std::array<double, kQrfFeatures>& x);

 private:
  void accumulate_weights(const std::array<double, kQrfFeatures>& x);

  const QrfModel& model_;
  std::vector<double> weights_;         // per original training row
  std::vector<std::uint32_t> touched_;  // rows with nonzero weight
};

}  // namespace impactuq
