#include "impactuq/qrf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "impactuq/errors.hpp"
#include "impactuq/rng.hpp"

namespace impactuq {

void QrfConfig::validate() const {
  if (n_trees < 1) throw ConfigError("qrf.n_trees must be >= 1");
  if (min_samples_split < 2) throw ConfigError("qrf.min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw ConfigError("qrf.min_samples_leaf must be >= 1");
  if (max_features < 0 || max_features > kQrfFeatures)
    throw ConfigError("qrf.max_features must be 0 (all) or 1..4");
}

namespace {

struct TreeBuilder {
  const std::vector<TabularSample>& samples;
  const QrfConfig& cfg;
  SplitMix64 rng;
  QrfModel::Tree tree;

  std::vector<std::uint32_t> idx;                     // rows of this tree
  std::vector<std::pair<double, double>> scan_buf;    // (value, target)
  std::vector<std::uint32_t> part_buf;

  TreeBuilder(const std::vector<TabularSample>& s, const QrfConfig& c,
              std::uint64_t tree_seed)
      : samples(s), cfg(c), rng(tree_seed) {}

  void run() {
    const std::uint32_t n = static_cast<std::uint32_t>(samples.size());
    idx.resize(n);
    if (cfg.bootstrap) {
      for (std::uint32_t i = 0; i < n; ++i)
        idx[i] = static_cast<std::uint32_t>(rng.below(n));
    } else {
      std::iota(idx.begin(), idx.end(), 0u);
    }

    struct Work {
      std::uint32_t lo, hi;
      std::int32_t parent;
      bool is_left;
    };
    std::vector<Work> stack;
    stack.push_back({0, n, -1, false});
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      const std::int32_t id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      if (w.parent >= 0) {
        if (w.is_left)
          tree.nodes[w.parent].left = id;
        else
          tree.nodes[w.parent].right = id;
      }
      const std::uint32_t mid = try_split(id, w.lo, w.hi);
      if (mid == w.lo) {
        make_leaf(id, w.lo, w.hi);
        continue;
      }
      // Right pushed first so the left child is grown next (fixed order).
      stack.push_back({mid, w.hi, id, false});
      stack.push_back({w.lo, mid, id, true});
    }
  }

  void make_leaf(std::int32_t id, std::uint32_t lo, std::uint32_t hi) {
    QrfModel::Node& node = tree.nodes[id];
    node.feature = -1;
    node.leaf_start = static_cast<std::uint32_t>(tree.leaf_indices.size());
    node.leaf_count = hi - lo;
    tree.leaf_indices.insert(tree.leaf_indices.end(), idx.begin() + lo,
                             idx.begin() + hi);
  }

  // Chooses and applies the best split for [lo, hi); returns the partition
  // point, or lo when the node becomes a leaf.
  std::uint32_t try_split(std::int32_t id, std::uint32_t lo, std::uint32_t hi) {
    const std::uint32_t n_node = hi - lo;
    if (n_node < static_cast<std::uint32_t>(cfg.min_samples_split)) return lo;

    double y_min = samples[idx[lo]].target, y_max = y_min, y_sum = 0.0;
    for (std::uint32_t i = lo; i < hi; ++i) {
      const double y = samples[idx[i]].target;
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
      y_sum += y;
    }
    if (y_min == y_max) return lo;  // pure node

    // Feature subset for this split (all features by default); scanned in
    // ascending index order so exact gain ties resolve to the lowest feature
    // and then the lowest threshold.
    std::array<int, kQrfFeatures> features{0, 1, 2, 3};
    int n_features = kQrfFeatures;
    if (cfg.max_features > 0 && cfg.max_features < kQrfFeatures) {
      for (int i = 0; i < cfg.max_features; ++i) {
        const int j = i + static_cast<int>(rng.below(kQrfFeatures - i));
        std::swap(features[i], features[j]);
      }
      n_features = cfg.max_features;
      std::sort(features.begin(), features.begin() + n_features);
    }

    const double min_leaf = cfg.min_samples_leaf;
    double best_proxy = -std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;

    scan_buf.resize(n_node);
    for (int fi = 0; fi < n_features; ++fi) {
      const int f = features[fi];
      for (std::uint32_t i = 0; i < n_node; ++i) {
        const TabularSample& s = samples[idx[lo + i]];
        scan_buf[i] = {s.features[f], s.target};
      }
      // Sorting by (value, target) pins the prefix sums regardless of the
      // incoming row order.
      std::sort(scan_buf.begin(), scan_buf.end());

      double sum_left = 0.0;
      for (std::uint32_t i = 0; i + 1 < n_node; ++i) {
        sum_left += scan_buf[i].second;
        if (scan_buf[i].first == scan_buf[i + 1].first) continue;
        const double k = static_cast<double>(i + 1);
        const double rest = static_cast<double>(n_node - i - 1);
        if (k < min_leaf || rest < min_leaf) continue;
        const double sum_right = y_sum - sum_left;
        const double proxy =
            sum_left * sum_left / k + sum_right * sum_right / rest;
        if (proxy > best_proxy) {
          double thr = (scan_buf[i].first + scan_buf[i + 1].first) / 2.0;
          if (!(thr < scan_buf[i + 1].first)) thr = scan_buf[i].first;
          best_proxy = proxy;
          best_feature = f;
          best_threshold = thr;
        }
      }
    }
    if (best_feature < 0) return lo;

    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;

    // Stable partition: rows with value <= threshold first.
    part_buf.clear();
    std::uint32_t write = lo;
    for (std::uint32_t i = lo; i < hi; ++i) {
      if (samples[idx[i]].features[best_feature] <= best_threshold)
        idx[write++] = idx[i];
      else
        part_buf.push_back(idx[i]);
    }
    std::copy(part_buf.begin(), part_buf.end(), idx.begin() + write);
    return write;
  }
};

}  // namespace

QrfModel QrfModel::fit(const std::vector<TabularSample>& samples,
                       const QrfConfig& cfg, int n_threads) {
  cfg.validate();
  if (samples.empty()) throw DataError("qrf fit needs samples");
  if (samples.size() < static_cast<std::size_t>(cfg.min_samples_split))
    throw DataError("qrf fit needs at least min_samples_split samples");
  for (const TabularSample& s : samples) {
    if (!std::isfinite(s.target)) throw DataError("qrf target is not finite");
    for (double f : s.features)
      if (!std::isfinite(f)) throw DataError("qrf feature is not finite");
  }

  QrfModel model;
  model.cfg_ = cfg;
  model.targets_.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    model.targets_[i] = samples[i].target;
  model.trees_.resize(cfg.n_trees);

  if (n_threads <= 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<int>(n_threads, cfg.n_trees);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t; (t = next.fetch_add(1)) < cfg.n_trees;) {
      TreeBuilder builder(samples, cfg, mix64(cfg.seed, static_cast<std::uint64_t>(t)));
      builder.run();
      model.trees_[t] = std::move(builder.tree);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  model.finalize();
  return model;
}

void QrfModel::finalize() {
  order_.resize(targets_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::sort(order_.begin(), order_.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (targets_[a] != targets_[b]) return targets_[a] < targets_[b];
              return a < b;
            });
}

QrfPredictor::QrfPredictor(const QrfModel& model)
    : model_(model), weights_(model.targets_.size(), 0.0) {}

void QrfPredictor::accumulate_weights(
    const std::array<double, kQrfFeatures>& x) {
  for (std::uint32_t id : touched_) weights_[id] = 0.0;
  touched_.clear();

  for (const QrfModel::Tree& tree : model_.trees_) {
    std::int32_t node = 0;
    while (tree.nodes[node].feature >= 0) {
      const QrfModel::Node& nd = tree.nodes[node];
      node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    const QrfModel::Node& leaf = tree.nodes[node];
    const double inv = 1.0 / static_cast<double>(leaf.leaf_count);
    const std::uint32_t end = leaf.leaf_start + leaf.leaf_count;
    for (std::uint32_t i = leaf.leaf_start; i < end; ++i) {
      const std::uint32_t row = tree.leaf_indices[i];
      if (weights_[row] == 0.0) touched_.push_back(row);
      weights_[row] += inv;
    }
  }
  const double inv_trees = 1.0 / static_cast<double>(model_.trees_.size());
  for (std::uint32_t row : touched_) weights_[row] *= inv_trees;
}

std::pair<double, double> QrfPredictor::quantile_pair(
    const std::array<double, kQrfFeatures>& x, double q_lower,
    double q_upper) {
  if (!(q_lower > 0.0 && q_lower < 1.0 && q_upper > 0.0 && q_upper < 1.0))
    throw DataError("quantile levels must lie strictly inside (0, 1)");
  accumulate_weights(x);

  double cum = 0.0;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  bool have_lower = false;
  double last = lower;
  for (std::uint32_t row : model_.order_) {
    const double w = weights_[row];
    if (w == 0.0) continue;
    cum += w;
    last = model_.targets_[row];
    if (!have_lower && cum >= q_lower) {
      lower = last;
      have_lower = true;
    }
    if (cum >= q_upper) return {have_lower ? lower : last, last};
  }
  // Accumulated weight fell short of q (float undershoot): the highest
  // reachable target is the answer.
  return {have_lower ? lower : last, last};
}

double QrfPredictor::quantile(const std::array<double, kQrfFeatures>& x,
                              double q) {
  return quantile_pair(x, q, q).first;
}

double QrfPredictor::mean(const std::array<double, kQrfFeatures>& x) {
  accumulate_weights(x);
  double sum_w = 0.0, sum_wy = 0.0;
  for (std::uint32_t row : model_.order_) {
    const double w = weights_[row];
    if (w == 0.0) continue;
    sum_w += w;
    sum_wy += w * model_.targets_[row];
  }
  return sum_wy / sum_w;
}

double QrfModel::predict_quantile(const std::array<double, kQrfFeatures>& x,
                                  double q) const {
  QrfPredictor p(*this);
  return p.quantile(x, q);
}

std::pair<double, double> QrfModel::predict_quantile_pair(
    const std::array<double, kQrfFeatures>& x, double q_lower,
    double q_upper) const {
  QrfPredictor p(*this);
  return p.quantile_pair(x, q_lower, q_upper);
}

double QrfModel::predict_mean(const std::array<double, kQrfFeatures>& x) const {
  QrfPredictor p(*this);
  return p.mean(x);
}

namespace {

constexpr char kQrfMagic[4] = {'I', 'Q', 'R', 'F'};
constexpr std::uint32_t kQrfVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
  write_pod(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_vec(std::ifstream& in, std::vector<T>& v) {
  std::uint64_t n = 0;
  read_pod(in, n);
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(T)));
}

}  // namespace

void QrfModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(kQrfMagic, 4);
  write_pod(out, kQrfVersion);
  write_pod(out, cfg_.n_trees);
  write_pod(out, cfg_.min_samples_split);
  write_pod(out, cfg_.min_samples_leaf);
  write_pod(out, cfg_.max_features);
  write_pod(out, static_cast<std::uint8_t>(cfg_.bootstrap));
  write_pod(out, cfg_.seed);
  write_vec(out, targets_);
  for (const Tree& tree : trees_) {
    write_pod(out, static_cast<std::uint64_t>(tree.nodes.size()));
    for (const Node& nd : tree.nodes) {
      write_pod(out, nd.threshold);
      write_pod(out, nd.feature);
      write_pod(out, nd.left);
      write_pod(out, nd.right);
      write_pod(out, nd.leaf_start);
      write_pod(out, nd.leaf_count);
    }
    write_vec(out, tree.leaf_indices);
  }
  out.close();
  if (!out) throw DataError("failed writing '" + path + "'");
}

QrfModel QrfModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0;
  read_pod(in, version);
  if (!in || std::memcmp(magic, kQrfMagic, 4) != 0 || version != kQrfVersion)
    throw DataError("'" + path + "' is not a qrf model file");

  QrfModel model;
  std::uint8_t bootstrap = 0;
  read_pod(in, model.cfg_.n_trees);
  read_pod(in, model.cfg_.min_samples_split);
  read_pod(in, model.cfg_.min_samples_leaf);
  read_pod(in, model.cfg_.max_features);
  read_pod(in, bootstrap);
  model.cfg_.bootstrap = bootstrap != 0;
  read_pod(in, model.cfg_.seed);
  read_vec(in, model.targets_);
  model.trees_.resize(model.cfg_.n_trees);
  for (Tree& tree : model.trees_) {
    std::uint64_t n_nodes = 0;
    read_pod(in, n_nodes);
    if (!in) throw DataError("'" + path + "' is truncated");
    tree.nodes.resize(n_nodes);
    for (Node& nd : tree.nodes) {
      read_pod(in, nd.threshold);
      read_pod(in, nd.feature);
      read_pod(in, nd.left);
      read_pod(in, nd.right);
      read_pod(in, nd.leaf_start);
      read_pod(in, nd.leaf_count);
    }
    read_vec(in, tree.leaf_indices);
  }
  if (!in) throw DataError("'" + path + "' is truncated");
  model.finalize();
  return model;
}

}  // namespace impactuq
