#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcrnn/tensor.hpp"

namespace pcrnn {

template <typename S>
using NamedParams = std::vector<std::pair<std::string, Tensor<S>>>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  long worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  long coordinates = 0;
  // Parameters whose analytic gradient came back identically zero. Harmless
  // when the parameter genuinely cannot influence the objective, suspicious
  // otherwise.
  std::vector<std::string> zero_grad_params;

  bool pass(double tol) const { return max_rel_err < tol; }
};

// Central-difference check of reverse-mode gradients.
//
// `f` must rebuild its computation on the supplied graph from the current
// parameter values and return the scalar objective; it is called once for the
// analytic pass and twice per parameter coordinate for the numeric one.
// Relative error per coordinate is |a - n| / max(1, |a|, |n|).
template <typename S>
GradCheckResult grad_check(const std::function<Tensor<S>(Graph<S>&)>& f,
                           const NamedParams<S>& params, S eps = S(1e-5)) {
  if (eps <= S(0)) throw ContractError("grad_check: eps must be positive");

  const auto eval = [&]() -> S {
    Graph<S> g;
    Tensor<S> out = f(g);
    const S v = out.value();
    if (!std::isfinite(static_cast<double>(v)))
      throw NumericError("grad_check: objective is not finite");
    return v;
  };

  // Analytic pass.
  std::vector<std::vector<S>> analytic;
  {
    Graph<S> g;
    for (const auto& named : params) {
      Tensor<S> view = named.second;  // shares the grad buffer
      view.zero_grad();
    }
    Tensor<S> out = f(g);
    if (!std::isfinite(static_cast<double>(out.value())))
      throw NumericError("grad_check: objective is not finite");
    g.backward(out);
    for (const auto& [name, p] : params) {
      if (!p.grad) throw ContractError("grad_check: parameter '" + name + "' has no gradient buffer");
      analytic.push_back(*p.grad);
    }
  }

  GradCheckResult r;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& [name, p] = params[pi];
    bool any_nonzero = false;
    for (std::size_t i = 0; i < p.numel(); ++i) {
      S& coord = (*p.data)[i];
      const S saved = coord;
      coord = saved + eps;
      const double up = static_cast<double>(eval());
      coord = saved - eps;
      const double down = static_cast<double>(eval());
      coord = saved;
      const double numeric = (up - down) / (2.0 * static_cast<double>(eps));
      const double a = static_cast<double>(analytic[pi][i]);
      const double rel = std::fabs(a - numeric) / std::max({1.0, std::fabs(a), std::fabs(numeric)});
      ++r.coordinates;
      if (a != 0.0) any_nonzero = true;
      if (rel > r.max_rel_err) {
        r.max_rel_err = rel;
        r.worst_param = name;
        r.worst_index = static_cast<long>(i);
        r.worst_analytic = a;
        r.worst_numeric = numeric;
      }
    }
    if (!any_nonzero && p.numel() > 0) r.zero_grad_params.push_back(name);
  }
  return r;
}

}  // namespace pcrnn
