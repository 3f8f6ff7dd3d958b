#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fedsim/dataset.hpp"
#include "fedsim/errors.hpp"

namespace fedsim {

// Loss/gradient interface over a flat parameter vector.
struct Model {
  virtual ~Model() = default;
  virtual int param_count() const = 0;
  virtual int feature_dim() const = 0;
  virtual int num_classes() const = 0;
  virtual double loss(const Eigen::VectorXd& w, const LocalDataset& data) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& w, const LocalDataset& data) const = 0;
  virtual int predict(const Eigen::VectorXd& w, const Eigen::VectorXd& x) const = 0;
};

namespace detail {
inline Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}
}  // namespace detail

// Multinomial logistic regression with bias, cross-entropy loss. Convex,
// Lipschitz and smooth on [0,1] features, so the convergence machinery's
// assumptions genuinely hold.
class LogisticModel : public Model {
 public:
  LogisticModel(int num_features, int num_classes)
      : m_(num_features), y_(num_classes) {}

  int param_count() const override { return y_ * (m_ + 1); }
  int feature_dim() const override { return m_; }
  int num_classes() const override { return y_; }

  double loss(const Eigen::VectorXd& w, const LocalDataset& data) const override {
    if (data.points.empty()) return 0.0;
    double total = 0.0;
    for (const auto& p : data.points) {
      Eigen::VectorXd z = logits(w, p.x);
      double lse = std::log((z.array() - z.maxCoeff()).exp().sum()) + z.maxCoeff();
      total += lse - z[p.y];
    }
    return total / static_cast<double>(data.points.size());
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& w, const LocalDataset& data) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(param_count());
    if (data.points.empty()) return g;
    for (const auto& p : data.points) {
      Eigen::VectorXd prob = detail::softmax(logits(w, p.x));
      prob[p.y] -= 1.0;
      for (int c = 0; c < y_; ++c) {
        g.segment(c * (m_ + 1), m_) += prob[c] * p.x;
        g[c * (m_ + 1) + m_] += prob[c];
      }
    }
    return g / static_cast<double>(data.points.size());
  }

  int predict(const Eigen::VectorXd& w, const Eigen::VectorXd& x) const override {
    Eigen::VectorXd z = logits(w, x);
    int best = 0;
    z.maxCoeff(&best);
    return best;
  }

 private:
  Eigen::VectorXd logits(const Eigen::VectorXd& w, const Eigen::VectorXd& x) const {
    Eigen::VectorXd z(y_);
    for (int c = 0; c < y_; ++c)
      z[c] = w.segment(c * (m_ + 1), m_).dot(x) + w[c * (m_ + 1) + m_];
    return z;
  }
  int m_, y_;
};

// Bias-free MLP with ReLU activations and softmax output. Layers at index
// >= droppable_from count as fully-connected for FedDrop parameter
// accounting; the default dims give 21840 total parameters of which 16560
// are droppable.
class MlpModel : public Model {
 public:
  explicit MlpModel(std::vector<int> dims = {66, 80, 184, 10}, int droppable_from = 1)
      : dims_(std::move(dims)), droppable_from_(droppable_from) {
    if (dims_.size() < 2) throw ConfigError("mlp needs at least input and output dims");
    offsets_.resize(dims_.size() - 1);
    int off = 0;
    for (size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_[l] = off;
      off += dims_[l] * dims_[l + 1];
    }
    total_ = off;
  }

  int param_count() const override { return total_; }
  int feature_dim() const override { return dims_.front(); }
  int num_classes() const override { return dims_.back(); }
  int layer_count() const { return static_cast<int>(dims_.size()) - 1; }

  int fc_param_count() const {
    int c = 0;
    for (int l = droppable_from_; l < layer_count(); ++l) c += dims_[l] * dims_[l + 1];
    return c;
  }
  int fc_param_offset() const { return offsets_[droppable_from_]; }

  double loss(const Eigen::VectorXd& w, const LocalDataset& data) const override {
    if (data.points.empty()) return 0.0;
    double total = 0.0;
    for (const auto& p : data.points) {
      Eigen::VectorXd z = forward(w, p.x);
      double lse = std::log((z.array() - z.maxCoeff()).exp().sum()) + z.maxCoeff();
      total += lse - z[p.y];
    }
    return total / static_cast<double>(data.points.size());
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& w, const LocalDataset& data) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(total_);
    if (data.points.empty()) return g;
    const int L = layer_count();
    for (const auto& p : data.points) {
      std::vector<Eigen::VectorXd> acts(L + 1);
      acts[0] = p.x;
      for (int l = 0; l < L; ++l) {
        Eigen::VectorXd z = weight(w, l) * acts[l];
        acts[l + 1] = (l + 1 < L) ? z.cwiseMax(0.0) : z;
      }
      Eigen::VectorXd delta = detail::softmax(acts[L]);
      delta[p.y] -= 1.0;
      for (int l = L - 1; l >= 0; --l) {
        Eigen::Map<Eigen::MatrixXd> gw(g.data() + offsets_[l], dims_[l + 1], dims_[l]);
        gw += delta * acts[l].transpose();
        if (l > 0) {
          Eigen::VectorXd back = weight(w, l).transpose() * delta;
          delta = (acts[l].array() > 0.0).select(back, 0.0);
        }
      }
    }
    return g / static_cast<double>(data.points.size());
  }

  int predict(const Eigen::VectorXd& w, const Eigen::VectorXd& x) const override {
    Eigen::VectorXd z = forward(w, x);
    int best = 0;
    z.maxCoeff(&best);
    return best;
  }

 private:
  Eigen::Map<const Eigen::MatrixXd> weight(const Eigen::VectorXd& w, int l) const {
    return Eigen::Map<const Eigen::MatrixXd>(w.data() + offsets_[l], dims_[l + 1], dims_[l]);
  }
  Eigen::VectorXd forward(const Eigen::VectorXd& w, const Eigen::VectorXd& x) const {
    Eigen::VectorXd a = x;
    const int L = layer_count();
    for (int l = 0; l < L; ++l) {
      Eigen::VectorXd z = weight(w, l) * a;
      a = (l + 1 < L) ? z.cwiseMax(0.0) : std::move(z);
    }
    return a;
  }

  std::vector<int> dims_;
  int droppable_from_;
  std::vector<int> offsets_;
  int total_ = 0;
};

inline double accuracy(const Model& model, const Eigen::VectorXd& w, const Dataset& test) {
  if (test.empty()) return 0.0;
  int ok = 0;
  for (const auto& p : test)
    if (model.predict(w, p.x) == p.y) ++ok;
  return static_cast<double>(ok) / static_cast<double>(test.size());
}

// Checkpoints: "FSCP", uint32 count, raw doubles.
inline void save_checkpoint(const Eigen::VectorXd& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
  os.write("FSCP", 4);
  uint32_t count = static_cast<uint32_t>(w.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  os.write(reinterpret_cast<const char*>(w.data()), sizeof(double) * w.size());
}

inline Eigen::VectorXd load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::string(magic, 4) != "FSCP") throw ConfigError("bad checkpoint header");
  uint32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  Eigen::VectorXd w(count);
  is.read(reinterpret_cast<char*>(w.data()), sizeof(double) * count);
  if (!is) throw ConfigError("truncated checkpoint");
  return w;
}

}  // namespace fedsim
