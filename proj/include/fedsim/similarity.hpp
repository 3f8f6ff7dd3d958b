#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fedsim/dataset.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/io.hpp"
#include "fedsim/net_model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct ClusterProfile {
  int device = 0;
  std::vector<Eigen::VectorXd> centroids;  // mean of assigned feature vectors
  std::vector<int> cluster_sizes;
  std::vector<int> assignment;  // point -> cluster

  int cluster_count() const { return static_cast<int>(centroids.size()); }
  // |C_i| for similarity purposes: empty-flagged surplus clusters do not count.
  int nonempty_count() const {
    int c = 0;
    for (int s : cluster_sizes)
      if (s > 0) ++c;
    return c;
  }
};

// Lloyd's iterations. Empty clusters are re-seeded from the point farthest
// from its current centroid. Deterministic given seed.
inline ClusterProfile kmeans(const std::vector<Eigen::VectorXd>& points, int k, uint64_t seed,
                             int max_iters = 100, double tol = 1e-9) {
  if (points.empty()) throw ConfigError("kmeans needs at least one point");
  if (k < 1) throw ConfigError("kmeans needs k >= 1");
  const int n = static_cast<int>(points.size());
  const int m = static_cast<int>(points[0].size());

  ClusterProfile prof;
  prof.centroids.resize(k, Eigen::VectorXd::Zero(m));
  prof.cluster_sizes.assign(k, 0);
  prof.assignment.assign(n, 0);

  if (k >= n) {
    // Each point its own cluster; surplus clusters stay empty-flagged.
    for (int i = 0; i < n; ++i) {
      prof.centroids[i] = points[i];
      prof.cluster_sizes[i] = 1;
      prof.assignment[i] = i;
    }
    return prof;
  }

  auto rng = make_rng(derive_seed(seed, "kmeans"));
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {  // partial Fisher-Yates for k distinct seeds
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
    prof.centroids[i] = points[idx[i]];
  }

  for (int iter = 0; iter < max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bestd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = (points[i] - prof.centroids[c]).squaredNorm();
        if (d < bestd) {
          bestd = d;
          best = c;
        }
      }
      prof.assignment[i] = best;
    }
    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(m));
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[prof.assignment[i]] += points[i];
      ++counts[prof.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed from the farthest point.
        int far = 0;
        double fard = -1.0;
        for (int i = 0; i < n; ++i) {
          double d = (points[i] - prof.centroids[prof.assignment[i]]).squaredNorm();
          if (d > fard) {
            fard = d;
            far = i;
          }
        }
        sums[c] = points[far];
        counts[c] = 1;
        prof.assignment[far] = c;
        // Rebuild sums for the cluster the point left.
        sums.assign(k, Eigen::VectorXd::Zero(m));
        counts.assign(k, 0);
        for (int i = 0; i < n; ++i) {
          sums[prof.assignment[i]] += points[i];
          ++counts[prof.assignment[i]];
        }
      }
    }
    double moved = 0.0;
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd nc = sums[c] / counts[c];
      moved = std::max(moved, (nc - prof.centroids[c]).norm());
      prof.centroids[c] = nc;
      prof.cluster_sizes[c] = counts[c];
    }
    if (moved < tol) break;
  }
  // Final assignment pass so sizes/assignment match the converged centroids.
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    int best = prof.assignment[i];
    double bestd = (points[i] - prof.centroids[best]).squaredNorm();
    for (int c = 0; c < k; ++c) {
      double d = (points[i] - prof.centroids[c]).squaredNorm();
      if (d < bestd - 1e-15) {
        bestd = d;
        best = c;
      }
    }
    prof.assignment[i] = best;
    ++counts[best];
  }
  std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(m));
  for (int i = 0; i < n; ++i) sums[prof.assignment[i]] += points[i];
  for (int c = 0; c < k; ++c) {
    prof.cluster_sizes[c] = counts[c];
    if (counts[c] > 0) prof.centroids[c] = sums[c] / counts[c];
  }
  return prof;
}

inline ClusterProfile cluster_local_dataset(LocalDataset& data, int device, int k, uint64_t seed) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(data.points.size());
  for (const auto& p : data.points) pts.push_back(p.x);
  ClusterProfile prof = kmeans(pts, k, seed);
  prof.device = device;
  data.cluster_of = prof.assignment;
  return prof;
}

// Matching from each destination cluster to at most one source cluster.
struct ClusterMatching {
  std::vector<int> src_of_dst;  // dst cluster -> src cluster, or -1

  int matched_count() const {
    int c = 0;
    for (int v : src_of_dst)
      if (v >= 0) ++c;
    return c;
  }
};

namespace detail {
inline double centroid_dist(const ClusterProfile& src, const ClusterProfile& dst, int b, int c) {
  return (src.centroids[b] - dst.centroids[c]).norm();
}
}  // namespace detail

// Each dst cluster claims its nearest src cluster; a src cluster contested by
// several dst clusters keeps the closest one and is removed from the
// candidate pool, iterating until no conflicts remain. Ties break toward the
// lowest cluster index. Empty-flagged clusters never participate.
inline ClusterMatching match_clusters(const ClusterProfile& src, const ClusterProfile& dst) {
  const int ks = src.cluster_count();
  const int kd = dst.cluster_count();
  ClusterMatching m;
  m.src_of_dst.assign(kd, -1);

  std::vector<bool> src_avail(ks);
  for (int b = 0; b < ks; ++b) src_avail[b] = src.cluster_sizes[b] > 0;
  std::vector<bool> dst_open(kd);
  for (int c = 0; c < kd; ++c) dst_open[c] = dst.cluster_sizes[c] > 0;

  auto claim_of = [&](int c) {
    int best = -1;
    double bestd = std::numeric_limits<double>::infinity();
    for (int b = 0; b < ks; ++b) {
      if (!src_avail[b]) continue;
      double d = detail::centroid_dist(src, dst, b, c);
      if (d < bestd - 1e-15 || (std::abs(d - bestd) <= 1e-15 && b < best)) {
        bestd = d;
        best = b;
      }
    }
    return std::pair<int, double>(best, bestd);
  };

  while (true) {
    std::vector<int> claims(kd, -1);
    std::vector<double> dists(kd, std::numeric_limits<double>::infinity());
    bool any_open = false;
    for (int c = 0; c < kd; ++c) {
      if (!dst_open[c]) continue;
      auto [b, d] = claim_of(c);
      if (b < 0) {
        dst_open[c] = false;  // no remaining candidates
        continue;
      }
      claims[c] = b;
      dists[c] = d;
      any_open = true;
    }
    if (!any_open) break;

    // Find contested src clusters.
    std::vector<int> claimants(ks, 0);
    for (int c = 0; c < kd; ++c)
      if (claims[c] >= 0) ++claimants[claims[c]];
    bool conflict = false;
    for (int b = 0; b < ks; ++b)
      if (claimants[b] > 1) conflict = true;

    if (!conflict) {
      for (int c = 0; c < kd; ++c) {
        if (claims[c] < 0) continue;
        m.src_of_dst[c] = claims[c];
        src_avail[claims[c]] = false;
        dst_open[c] = false;
      }
      break;
    }

    // Resolve the single contested src whose winning pair is closest
    // (descending closeness), then recompute claims.
    int win_c = -1, win_b = -1;
    double win_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < kd; ++c) {
      int b = claims[c];
      if (b < 0 || claimants[b] <= 1) continue;
      if (dists[c] < win_d - 1e-15 ||
          (std::abs(dists[c] - win_d) <= 1e-15 && (c < win_c || win_c < 0))) {
        win_d = dists[c];
        win_c = c;
        win_b = b;
      }
    }
    m.src_of_dst[win_c] = win_b;
    src_avail[win_b] = false;
    dst_open[win_c] = false;
  }
  return m;
}

// Similarity per the matched-centroid-difference rule: each matched dst
// cluster contributes its normalized centroid distance; dst clusters left
// without candidates contribute nothing. Result clamped to [0,1].
inline double similarity_value(const ClusterProfile& src, const ClusterProfile& dst,
                               const ClusterMatching& matching) {
  const int ci = src.nonempty_count();
  if (ci == 0) return 0.0;
  const int m_dim = src.centroids.empty() ? 1 : static_cast<int>(src.centroids[0].size());
  const double norm = std::sqrt(static_cast<double>(m_dim));
  double sum = 0.0;
  for (int c = 0; c < static_cast<int>(matching.src_of_dst.size()); ++c) {
    int b = matching.src_of_dst[c];
    if (b < 0) continue;
    sum += detail::centroid_dist(src, dst, b, c) / norm;
  }
  return std::clamp(sum / ci, 0.0, 1.0);
}

// State for one ordered device pair: the (fixed) matching plus the current
// centroid-difference vectors for matched pairs.
struct PairSimilarity {
  ClusterMatching matching;
  std::vector<Eigen::VectorXd> sigma;  // indexed by dst cluster; empty if unmatched
  int src_nonempty = 0;
};

struct SimilarityState {
  int n = 0;
  int feature_dim = 0;
  Eigen::MatrixXd lambda;      // N x N, zero diagonal
  Eigen::MatrixXd big_lambda;  // lambda ∘ A
  std::vector<std::vector<PairSimilarity>> pairs;  // [src][dst]

  // Communication cost of shipping centroids to the server, in floats.
  double centroid_upload_floats = 0.0;
};

inline Eigen::MatrixXd connectivity_similarity(const Eigen::MatrixXd& lambda_matrix,
                                               const Topology& topo) {
  if (lambda_matrix.rows() != topo.n || lambda_matrix.cols() != topo.n)
    throw DimensionError("lambda and adjacency sizes differ");
  return lambda_matrix.cwiseProduct(topo.adj.cast<double>());
}

inline double pair_lambda(const PairSimilarity& ps, int feature_dim) {
  if (ps.src_nonempty == 0) return 0.0;
  const double norm = std::sqrt(static_cast<double>(feature_dim));
  double sum = 0.0;
  for (size_t c = 0; c < ps.sigma.size(); ++c) {
    if (ps.matching.src_of_dst[c] < 0) continue;
    sum += ps.sigma[c].norm() / norm;
  }
  return std::clamp(sum / ps.src_nonempty, 0.0, 1.0);
}

inline SimilarityState build_similarity_state(const std::vector<ClusterProfile>& profiles,
                                              const Topology& topo) {
  const int n = static_cast<int>(profiles.size());
  if (n != topo.n) throw DimensionError("profile count and topology size differ");
  SimilarityState st;
  st.n = n;
  st.feature_dim =
      profiles.empty() || profiles[0].centroids.empty() ? 1 : static_cast<int>(profiles[0].centroids[0].size());
  st.lambda = Eigen::MatrixXd::Zero(n, n);
  st.pairs.assign(n, std::vector<PairSimilarity>(n));
  for (int i = 0; i < n; ++i) {
    st.centroid_upload_floats +=
        static_cast<double>(profiles[i].nonempty_count()) * st.feature_dim;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      PairSimilarity& ps = st.pairs[i][j];
      ps.matching = match_clusters(profiles[i], profiles[j]);
      ps.src_nonempty = profiles[i].nonempty_count();
      ps.sigma.resize(ps.matching.src_of_dst.size());
      for (size_t c = 0; c < ps.sigma.size(); ++c) {
        int b = ps.matching.src_of_dst[c];
        if (b >= 0) ps.sigma[c] = profiles[i].centroids[b] - profiles[j].centroids[c];
      }
      st.lambda(i, j) = pair_lambda(ps, st.feature_dim);
    }
  }
  st.big_lambda = connectivity_similarity(st.lambda, topo);
  return st;
}

// One cluster-level offload ratio applied to a directed link.
struct RatioUpdate {
  int src = 0, dst = 0;
  int src_cluster = 0, dst_cluster = 0;
  double ratio = 0.0;
};

// sigma(t) = sigma(t-1) * (1 - ratio) on matched pairs; lambda and big_lambda
// are recomputed from the decayed sigmas.
inline void update_sigma(SimilarityState& st, const std::vector<RatioUpdate>& updates,
                         const Topology& topo) {
  for (const auto& u : updates) {
    if (u.ratio < 0.0 || u.ratio > 1.0)
      throw ConstraintViolationError("offload ratio outside [0,1]");
    PairSimilarity& ps = st.pairs[u.src][u.dst];
    if (u.dst_cluster < 0 || u.dst_cluster >= static_cast<int>(ps.sigma.size()) ||
        ps.matching.src_of_dst[u.dst_cluster] != u.src_cluster)
      throw ConstraintViolationError("offload ratio on an unmatched cluster pair");
    ps.sigma[u.dst_cluster] *= (1.0 - u.ratio);
  }
  for (const auto& u : updates)
    st.lambda(u.src, u.dst) = pair_lambda(st.pairs[u.src][u.dst], st.feature_dim);
  st.big_lambda = connectivity_similarity(st.lambda, topo);
}

inline void write_similarity_csv(const SimilarityState& st, std::ostream& os) {
  write_matrix_csv(os, st.lambda);
}

}  // namespace fedsim
