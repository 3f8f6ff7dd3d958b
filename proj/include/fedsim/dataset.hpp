#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct DataPoint {
  Eigen::VectorXd x;  // features, pre-normalized to [0,1] per dimension
  int y = 0;          // class label
};

using Dataset = std::vector<DataPoint>;

// A device's local data. cluster_of maps each point to its K-means cluster;
// offload_eligible marks points that have not yet been offloaded (each datum
// may be offloaded at most once).
struct LocalDataset {
  Dataset points;
  std::vector<int> cluster_of;
  std::vector<bool> offload_eligible;

  int size() const { return static_cast<int>(points.size()); }
};

struct PartitionConfig {
  int labels_per_device = 3;
  double mean_size = 0.0;  // mu = D_N(0)/N; if 0, derived from the pool size
  uint64_t seed = 0;
};

// Gaussian-blob multi-class generator. Class means are drawn in [0.2,0.8]^M,
// features clipped to [0,1].
inline Dataset make_blob_dataset(int num_points, int num_classes, int num_features,
                                 uint64_t seed, double stddev = 0.05) {
  auto rng = make_rng(derive_seed(seed, "blobs"));
  std::uniform_real_distribution<double> umean(0.2, 0.8);
  std::vector<Eigen::VectorXd> means(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    means[c] = Eigen::VectorXd(num_features);
    for (int m = 0; m < num_features; ++m) means[c][m] = umean(rng);
  }
  std::normal_distribution<double> noise(0.0, stddev);
  Dataset out(num_points);
  for (int i = 0; i < num_points; ++i) {
    int c = i % num_classes;
    Eigen::VectorXd x = means[c];
    for (int m = 0; m < num_features; ++m) x[m] = std::clamp(x[m] + noise(rng), 0.0, 1.0);
    out[i] = {std::move(x), c};
  }
  return out;
}

inline std::set<int> distinct_labels(const Dataset& data) {
  std::set<int> labels;
  for (const auto& d : data) labels.insert(d.y);
  return labels;
}

// Non-iid partition: each device draws labels_per_device labels uniformly,
// then samples its points with replacement from the pool restricted to those
// labels. Sizes are normal(mu, 0.2*mu variance), truncated at >= 1.
inline std::vector<LocalDataset> partition_dataset(const Dataset& full, int n,
                                                   const PartitionConfig& cfg) {
  if (cfg.labels_per_device < 1) throw ConfigError("labels_per_device must be >= 1");
  std::vector<int> labels(distinct_labels(full).begin(), distinct_labels(full).end());
  if (static_cast<int>(labels.size()) < cfg.labels_per_device)
    throw ConfigError("dataset has fewer distinct labels than labels_per_device");

  std::vector<std::vector<int>> by_label(labels.size());
  for (int idx = 0; idx < static_cast<int>(full.size()); ++idx) {
    auto it = std::lower_bound(labels.begin(), labels.end(), full[idx].y);
    by_label[it - labels.begin()].push_back(idx);
  }

  double mu = cfg.mean_size > 0.0 ? cfg.mean_size : static_cast<double>(full.size()) / n;
  double sigma = std::sqrt(0.2 * mu);
  auto rng = make_rng(derive_seed(cfg.seed, "partition"));
  std::normal_distribution<double> size_dist(mu, sigma);
  std::uniform_int_distribution<int> label_pick(0, static_cast<int>(labels.size()) - 1);

  std::vector<LocalDataset> out(n);
  for (int i = 0; i < n; ++i) {
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < cfg.labels_per_device) chosen.insert(label_pick(rng));
    std::vector<int> pool;
    for (int li : chosen) pool.insert(pool.end(), by_label[li].begin(), by_label[li].end());
    int sz = std::max(1, static_cast<int>(std::lround(size_dist(rng))));
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
    out[i].points.reserve(sz);
    for (int s = 0; s < sz; ++s) out[i].points.push_back(full[pool[pick(rng)]]);
    out[i].cluster_of.assign(sz, 0);
    out[i].offload_eligible.assign(sz, true);
  }
  return out;
}

// CSV loader: one point per line, "label,f1,...,fM".
inline Dataset load_csv_dataset(std::istream& is) {
  Dataset out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 2) throw ConfigError("dataset row needs a label and at least one feature");
    DataPoint d;
    d.y = static_cast<int>(vals[0]);
    d.x = Eigen::Map<Eigen::VectorXd>(vals.data() + 1, static_cast<long>(vals.size()) - 1);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace fedsim
