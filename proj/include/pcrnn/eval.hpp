#pragma once

#include <string>
#include <vector>

#include "pcrnn/data.hpp"
#include "pcrnn/model.hpp"

namespace pcrnn {

// Mean absolute error over aligned vectors.
double mae(const std::vector<double>& predicted, const std::vector<double>& truth);

// Fraction of exact category matches.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct BaselinePrediction {
  double gap = 0.0;
  int category = -1;
};

// Model-free yardstick: every predicted gap is the mean observed gap (0 when
// fewer than two observations), every category the majority observed one,
// ties resolved toward the lowest id.
std::vector<BaselinePrediction> naive_baseline(const TrainingExample& ex, int horizon, Task task);

struct SweepRow {
  std::string task;
  double fraction = 0.0;
  // Event-level flat means.
  double acc = 0.0;
  double gap_mae = 0.0;
  double abs_mae = 0.0;
  // Per-sequence means of per-example means, for transparency.
  double per_seq_acc = 0.0;
  double per_seq_gap_mae = 0.0;
  double per_seq_abs_mae = 0.0;
  long events = 0;
  long examples = 0;
  long skipped = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  void write_csv(const std::string& path) const;
  void write_jsonl(const std::string& path) const;
  static SweepReport read_jsonl(const std::string& path);
};

// Forecast quality of one model over full-chain records at one observation
// fraction: n = max(1, floor(fraction*len)), horizon = len - n, free-running
// decode, metrics aggregated over every predicted event. Examples whose n
// would swallow the whole chain are skipped and counted.
template <typename S>
SweepRow sweep_fraction(const PcrnnModel<S>& model, const std::vector<PatentRecord>& records,
                        const Normalization& norm, double fraction) {
  SweepRow row;
  row.task = task_name(model.cfg.task);
  row.fraction = fraction;
  double gap_err = 0.0, abs_err = 0.0;
  long correct = 0;
  for (const auto& rec : records) {
    const int len = static_cast<int>(rec.events.size());
    const int n = observation_count(len, fraction);
    const int horizon = len - n;
    if (horizon < 1) {
      ++row.skipped;
      continue;
    }
    const auto ex = make_example(rec, n, horizon, norm);
    Graph<S> g;
    const auto run = model.forecast(g, ex, horizon, DecodeMode::free_running);
    double seq_gap = 0.0, seq_abs = 0.0;
    long seq_correct = 0;
    double cum = ex.events[n - 1].t;
    for (int j = 0; j < horizon; ++j) {
      const double pred_gap = static_cast<double>(run.predictions[j].t_gap.value());
      cum += pred_gap;
      const double dg = std::fabs(pred_gap - ex.target_gap(j));
      const double da = std::fabs(cum - ex.target(j).t);
      const bool hit = run.predictions[j].category() == ex.target(j).category(model.cfg.task);
      seq_gap += dg;
      seq_abs += da;
      seq_correct += hit;
      gap_err += dg;
      abs_err += da;
      correct += hit;
    }
    row.events += horizon;
    ++row.examples;
    row.per_seq_gap_mae += seq_gap / horizon;
    row.per_seq_abs_mae += seq_abs / horizon;
    row.per_seq_acc += static_cast<double>(seq_correct) / horizon;
  }
  if (row.events > 0) {
    row.acc = static_cast<double>(correct) / static_cast<double>(row.events);
    row.gap_mae = gap_err / static_cast<double>(row.events);
    row.abs_mae = abs_err / static_cast<double>(row.events);
  }
  if (row.examples > 0) {
    row.per_seq_acc /= static_cast<double>(row.examples);
    row.per_seq_gap_mae /= static_cast<double>(row.examples);
    row.per_seq_abs_mae /= static_cast<double>(row.examples);
  }
  return row;
}

// One report row per fraction, in the given order.
template <typename S>
SweepReport run_observation_sweep(const PcrnnModel<S>& model,
                                  const std::vector<PatentRecord>& records,
                                  const Normalization& norm,
                                  const std::vector<double>& fractions) {
  SweepReport report;
  for (double f : fractions) report.rows.push_back(sweep_fraction(model, records, norm, f));
  return report;
}

}  // namespace pcrnn
