#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Per-device resource profile. Units are abstract GPEF-style energy units;
// values normally arrive from config (testbed-derived in the original setting).
struct DeviceProfile {
  int id = 0;
  double proc_capacity = 0.0;          // P_i: energy units per period
  double proc_unit_cost = 0.0;         // p_i: energy per datapoint processed
  double tx_budget = 1.0;              // Psi_i: transmit energy units per period
  std::vector<double> tx_unit_cost;    // psi_{i,j}: energy per datapoint to j
  double recv_buffer = 0.0;            // theta_i: GCN feature only, never a constraint
};

struct Topology {
  int n = 0;
  Eigen::MatrixXi adj;  // binary, zero diagonal, directed

  int edge_count() const { return adj.sum(); }
};

struct LinkFailureConfig {
  double failure_rate = 0.0;  // in [0,1]
  uint64_t seed = 0;
};

struct ResourceRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct ResourceRanges {
  ResourceRange proc_capacity{40.0, 80.0};
  ResourceRange proc_unit_cost{0.5, 1.5};
  ResourceRange tx_budget{50.0, 100.0};
  ResourceRange tx_unit_cost{0.05, 0.2};
  ResourceRange recv_buffer{20.0, 60.0};
};

inline Topology generate_erdos_renyi(int n, double p, uint64_t seed, bool symmetric = false) {
  if (n < 2) throw InvalidNetworkError("need at least 2 devices");
  if (p < 0.0 || p > 1.0) throw InvalidNetworkError("link probability outside [0,1]");
  Topology t;
  t.n = n;
  t.adj = Eigen::MatrixXi::Zero(n, n);
  auto rng = make_rng(derive_seed(seed, "erdos-renyi"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (symmetric && j < i) continue;
      int bit = u(rng) < p ? 1 : 0;
      t.adj(i, j) = bit;
      if (symmetric) t.adj(j, i) = bit;
    }
  }
  return t;
}

inline void validate_ranges(const ResourceRanges& r) {
  auto chk = [](const ResourceRange& rr, const char* name, bool positive_lo) {
    if (rr.lo > rr.hi) throw ConfigError(std::string("inverted range for ") + name);
    if (rr.lo < 0.0) throw ConfigError(std::string("negative range bound for ") + name);
    if (positive_lo && rr.lo <= 0.0)
      throw ConfigError(std::string("lower bound must be > 0 for ") + name);
  };
  chk(r.proc_capacity, "proc_capacity", false);
  chk(r.proc_unit_cost, "proc_unit_cost", false);
  chk(r.tx_budget, "tx_budget", true);
  chk(r.tx_unit_cost, "tx_unit_cost", true);
  chk(r.recv_buffer, "recv_buffer", false);
}

inline std::vector<DeviceProfile> sample_device_profiles(int n, const ResourceRanges& ranges,
                                                         uint64_t seed) {
  validate_ranges(ranges);
  auto rng = make_rng(derive_seed(seed, "device-profiles"));
  auto draw = [&rng](const ResourceRange& rr) {
    if (rr.lo == rr.hi) return rr.lo;
    return std::uniform_real_distribution<double>(rr.lo, rr.hi)(rng);
  };
  std::vector<DeviceProfile> out(n);
  for (int i = 0; i < n; ++i) {
    DeviceProfile& d = out[i];
    d.id = i;
    d.proc_capacity = draw(ranges.proc_capacity);
    d.proc_unit_cost = draw(ranges.proc_unit_cost);
    d.tx_budget = draw(ranges.tx_budget);
    d.recv_buffer = draw(ranges.recv_buffer);
    d.tx_unit_cost.resize(n);
    for (int j = 0; j < n; ++j) d.tx_unit_cost[j] = (j == i) ? 0.0 : draw(ranges.tx_unit_cost);
  }
  return out;
}

// Each existing link independently deactivated with probability failure_rate
// at iteration t. The input topology is not modified.
inline Topology apply_link_failures(const Topology& topo, const LinkFailureConfig& cfg, int t) {
  if (cfg.failure_rate < 0.0 || cfg.failure_rate > 1.0)
    throw ConfigError("failure_rate outside [0,1]");
  Topology out = topo;
  if (cfg.failure_rate == 0.0) return out;
  auto rng = make_rng(derive_seed(cfg.seed, "link-failures", static_cast<uint64_t>(t)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < topo.n; ++i)
    for (int j = 0; j < topo.n; ++j)
      if (out.adj(i, j) == 1 && u(rng) < cfg.failure_rate) out.adj(i, j) = 0;
  return out;
}

// Optional per-period resource variation: scales the per-period capacities.
inline DeviceProfile scaled_profile(const DeviceProfile& d, double multiplier) {
  DeviceProfile out = d;
  out.proc_capacity *= multiplier;
  out.tx_budget *= multiplier;
  return out;
}

// One "i j" pair per line.
inline void write_edge_list(const Topology& topo, std::ostream& os) {
  for (int i = 0; i < topo.n; ++i)
    for (int j = 0; j < topo.n; ++j)
      if (topo.adj(i, j)) os << i << ' ' << j << '\n';
}

}  // namespace fedsim
