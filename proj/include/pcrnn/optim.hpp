#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pcrnn/gradcheck.hpp"
#include "pcrnn/tensor.hpp"

namespace pcrnn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global-norm gradient clip applied before stepping
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the applied factor (1 when no clipping happened).
template <typename S>
double clip_global_norm(const NamedParams<S>& params, double max_norm) {
  if (max_norm <= 0.0) throw ContractError("clip: max_norm must be positive");
  double sq = 0.0;
  for (const auto& [name, p] : params) {
    if (!p.grad) continue;
    for (S g : *p.grad) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  for (const auto& [name, p] : params) {
    if (!p.grad) continue;
    for (S& g : *p.grad) g = static_cast<S>(static_cast<double>(g) * factor);
  }
  return factor;
}

// Adam with bias correction. Moment buffers mirror the parameter list given
// at construction; the same list (same order) must be passed to every step.
template <typename S>
class Adam {
 public:
  Adam() = default;
  explicit Adam(const NamedParams<S>& params, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& [name, p] : params) {
      m_.emplace_back(p.numel(), S(0));
      v_.emplace_back(p.numel(), S(0));
    }
  }

  const AdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_; }
  const std::vector<std::vector<S>>& first_moments() const { return m_; }
  const std::vector<std::vector<S>>& second_moments() const { return v_; }

  // Restores a serialized state; shapes must match the parameter list.
  void restore(std::int64_t step, std::vector<std::vector<S>> m, std::vector<std::vector<S>> v) {
    if (m.size() != m_.size() || v.size() != v_.size())
      throw OptimError("adam: restored state has the wrong parameter count");
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i].size() != m_[i].size() || v[i].size() != v_[i].size())
        throw OptimError("adam: restored buffer " + std::to_string(i) + " has the wrong size");
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  void step(const NamedParams<S>& params) {
    if (params.size() != m_.size())
      throw OptimError("adam: stepped with a different parameter list");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& [name, p] = params[i];
      if (!p.grad) throw OptimError("adam: parameter '" + name + "' has no gradient buffer");
      for (std::size_t j = 0; j < p.numel(); ++j) {
        const double g = static_cast<double>((*p.grad)[j]);
        if (!std::isfinite(g))
          throw OptimError("adam: non-finite gradient in parameter '" + name + "'");
        const double m = cfg_.beta1 * static_cast<double>(m_[i][j]) + (1.0 - cfg_.beta1) * g;
        const double v = cfg_.beta2 * static_cast<double>(v_[i][j]) + (1.0 - cfg_.beta2) * g * g;
        m_[i][j] = static_cast<S>(m);
        v_[i][j] = static_cast<S>(v);
        const double update = cfg_.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps);
        (*p.data)[j] = static_cast<S>(static_cast<double>((*p.data)[j]) - update);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::vector<std::vector<S>> m_, v_;
};

}  // namespace pcrnn
