#include "pcrnn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "pcrnn/eval.hpp"

namespace pcrnn {

std::vector<TrainingExample> build_examples(const std::vector<PatentRecord>& records,
                                            double observed_fraction, const Normalization& norm) {
  std::vector<TrainingExample> examples;
  for (const auto& rec : records) {
    const int len = static_cast<int>(rec.events.size());
    const int n = observation_count(len, observed_fraction);
    const int horizon = len - n;
    if (horizon < 1) continue;
    examples.push_back(make_example(rec, n, horizon, norm));
  }
  return examples;
}

TrainResult train_model(PcrnnModel<float>& model, Adam<float>& optimizer,
                        const std::vector<PatentRecord>& train_records, const TrainOptions& opts,
                        std::ostream* trace_csv) {
  if (opts.epochs < 1) throw ContractError("train: epochs must be at least 1");
  TrainResult result;
  result.norm = fit_normalization(train_records);
  auto examples = build_examples(train_records, opts.observed_fraction, result.norm);
  if (examples.empty()) throw ContractError("train: no usable training examples");

  Rng shuffle_rng = Rng(opts.seed).fork(0x7261696e);
  const auto params = model.parameters();
  if (trace_csv) *trace_csv << "epoch,loss,time_loss,cat_loss\n";

  char buf[160];
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    auto batches = make_batches(examples, opts.batch_size, shuffle_rng);
    double loss_sum = 0.0, time_sum = 0.0, cat_sum = 0.0;
    long examples_seen = 0;
    for (const auto& batch : batches) {
      model.zero_grads();
      for (const auto& ex : batch.members) {
        Graph<float> g;
        auto run = model.forecast(g, ex, ex.horizon, DecodeMode::teacher_forced);
        auto parts = model.loss(g, run.predictions, model.targets_of(ex, ex.horizon));
        g.backward(parts.total);
        loss_sum += parts.total.value();
        time_sum += parts.time.value();
        cat_sum += parts.category.value();
        ++examples_seen;
      }
      // Average over the batch, then clip.
      const float inv = 1.0f / static_cast<float>(batch.members.size());
      for (const auto& [name, p] : params)
        for (float& gv : *p.grad) gv *= inv;
      clip_global_norm(params, optimizer.config().clip_norm);
      optimizer.step(params);
    }
    EpochStats stats{loss_sum / examples_seen, time_sum / examples_seen, cat_sum / examples_seen};
    result.trace.push_back(stats);
    if (trace_csv) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", epoch, stats.loss, stats.time_loss,
                    stats.cat_loss);
      *trace_csv << buf;
    }
    if (opts.log_every > 0 && epoch % opts.log_every == 0)
      std::fprintf(stderr, "epoch %d/%d loss %.5f (time %.5f, category %.5f)\n", epoch,
                   opts.epochs, stats.loss, stats.time_loss, stats.cat_loss);
  }
  return result;
}

FitMetrics evaluate_examples(const PcrnnModel<float>& model,
                             const std::vector<TrainingExample>& examples, DecodeMode mode) {
  FitMetrics m;
  double gap_err = 0.0, abs_err = 0.0;
  long correct = 0;
  for (const auto& ex : examples) {
    Graph<float> g;
    auto run = model.forecast(g, ex, ex.horizon, mode);
    double cum = ex.events[ex.n - 1].t;
    for (int j = 0; j < ex.horizon; ++j) {
      const double pred_gap = static_cast<double>(run.predictions[j].t_gap.value());
      cum += pred_gap;
      gap_err += std::fabs(pred_gap - ex.target_gap(j));
      abs_err += std::fabs(cum - ex.target(j).t);
      correct += run.predictions[j].category() == ex.target(j).category(model.cfg.task);
      ++m.events;
    }
  }
  if (m.events > 0) {
    m.acc = static_cast<double>(correct) / static_cast<double>(m.events);
    m.gap_mae = gap_err / static_cast<double>(m.events);
    m.abs_mae = abs_err / static_cast<double>(m.events);
  }
  return m;
}

double baseline_gap_mae(const std::vector<TrainingExample>& examples) {
  double err = 0.0;
  long events = 0;
  for (const auto& ex : examples) {
    const auto preds = naive_baseline(ex, ex.horizon, Task::main_category);
    for (int j = 0; j < ex.horizon; ++j) {
      err += std::fabs(preds[j].gap - ex.target_gap(j));
      ++events;
    }
  }
  return events ? err / static_cast<double>(events) : 0.0;
}

}  // namespace pcrnn
