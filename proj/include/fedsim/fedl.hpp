#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fedsim/dataset.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// One gradient step on the local loss. Empty datasets skip the update
// (flagged by the return value, not fatal).
inline bool local_update(Eigen::VectorXd& w, const Model& model, const LocalDataset& data,
                         double eta) {
  if (data.points.empty()) return false;
  if (eta != 0.0) w -= eta * model.grad(w, data);
  return true;
}

// Weighted parameter average, weights Delta_i = per-period data totals.
inline Eigen::VectorXd aggregate(const std::vector<Eigen::VectorXd>& models,
                                 const std::vector<double>& deltas) {
  if (models.empty() || models.size() != deltas.size())
    throw AggregationError("model/weight count mismatch");
  double total = 0.0;
  for (double d : deltas) total += d;
  if (total <= 0.0) throw AggregationError("all aggregation weights are zero");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(models[0].size());
  for (size_t i = 0; i < models.size(); ++i) out += (deltas[i] / total) * models[i];
  return out;
}

// Network loss: data-weighted mean of per-device losses.
inline double global_loss(const Model& model, const Eigen::VectorXd& w,
                          const std::vector<LocalDataset>& datasets) {
  double num = 0.0, den = 0.0;
  for (const auto& d : datasets) {
    if (d.points.empty()) continue;
    num += d.size() * model.loss(w, d);
    den += d.size();
  }
  if (den == 0.0) throw AggregationError("no datapoints in the network");
  return num / den;
}

inline Eigen::VectorXd global_gradient(const Model& model, const Eigen::VectorXd& w,
                                       const std::vector<LocalDataset>& datasets) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  double den = 0.0;
  for (const auto& d : datasets) {
    if (d.points.empty()) continue;
    g += d.size() * model.grad(w, d);
    den += d.size();
  }
  if (den > 0.0) g /= den;
  return g;
}

struct MovedCounts {
  // moved[b] = datapoints copied out of source cluster b this call
  std::vector<int> per_src_cluster;
  int total = 0;
};

// Copy floor(ratio * eligible) points of src cluster src_cluster into dst,
// tagging them with dst_cluster. Moved points become ineligible at the
// source (each datum offloads once); the recipient keeps everything.
inline int execute_offload_transfer(LocalDataset& src, LocalDataset& dst, int src_cluster,
                                    int dst_cluster, double ratio, uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw ConstraintViolationError("offload ratio outside [0,1]");
  std::vector<int> eligible;
  for (int i = 0; i < src.size(); ++i)
    if (src.offload_eligible[i] && src.cluster_of[i] == src_cluster) eligible.push_back(i);
  int count = static_cast<int>(std::floor(ratio * static_cast<double>(eligible.size())));
  if (count <= 0) return 0;
  auto rng = make_rng(seed);
  for (int s = 0; s < count; ++s) {  // partial Fisher-Yates: uniform without replacement
    std::uniform_int_distribution<int> pick(s, static_cast<int>(eligible.size()) - 1);
    std::swap(eligible[s], eligible[pick(rng)]);
  }
  for (int s = 0; s < count; ++s) {
    int idx = eligible[s];
    src.offload_eligible[idx] = false;
    dst.points.push_back(src.points[idx]);
    dst.cluster_of.push_back(dst_cluster);
    dst.offload_eligible.push_back(false);  // received data is never re-offloaded
  }
  return count;
}

// Hypothetical centralized trainer: plain gradient descent on the global
// loss, used as the reference trajectory for the convergence diagnostics.
inline std::vector<Eigen::VectorXd> train_centralized_reference(
    const Eigen::VectorXd& w_start, const Model& model,
    const std::vector<LocalDataset>& datasets, double eta, int steps) {
  std::vector<Eigen::VectorXd> traj;
  traj.reserve(steps + 1);
  traj.push_back(w_start);
  Eigen::VectorXd w = w_start;
  for (int s = 0; s < steps; ++s) {
    w -= eta * global_gradient(model, w, datasets);
    traj.push_back(w);
  }
  return traj;
}

}  // namespace fedsim
