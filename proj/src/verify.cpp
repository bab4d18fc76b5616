#include "pcrnn/verify.hpp"

#include "pcrnn/model.hpp"

namespace pcrnn {

TrainingExample micro_example(bool empty_assignee, bool empty_inventor) {
  TrainingExample ex;
  ex.patent_id = "micro";
  const std::vector<double> times{0.05, 0.21, 0.30, 0.46, 0.58, 0.71};
  const std::vector<int> cats{0, 1, 2, 1, 0, 2};
  for (std::size_t i = 0; i < times.size(); ++i)
    ex.events.push_back({times[i], cats[i], cats[i]});
  if (!empty_assignee) ex.assignee_events = {0.01, 0.13, 0.20};
  if (!empty_inventor) ex.inventor_events = {0.02, 0.17, 0.28};
  ex.n = 3;
  ex.horizon = 2;
  return ex;
}

GradCheckResult micro_gradcheck(std::uint64_t seed, double eps) {
  auto model = PcrnnModel<double>::init(ModelConfig::micro(), seed);
  const auto ex_a = micro_example(/*empty_assignee=*/true, false);
  const auto ex_b = micro_example(false, /*empty_inventor=*/true);
  const auto params = model.parameters();
  auto f = [&](Graph<double>& g) {
    auto fa = model.forecast(g, ex_a, ex_a.horizon, DecodeMode::teacher_forced);
    auto fb = model.forecast(g, ex_b, ex_b.horizon, DecodeMode::teacher_forced);
    auto la = model.loss(g, fa.predictions, model.targets_of(ex_a, ex_a.horizon));
    auto lb = model.loss(g, fb.predictions, model.targets_of(ex_b, ex_b.horizon));
    return g.add(la.total, lb.total);
  };
  return grad_check<double>(f, params, eps);
}

}  // namespace pcrnn
