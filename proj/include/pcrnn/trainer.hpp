#pragma once

#include <iosfwd>
#include <vector>

#include "pcrnn/data.hpp"
#include "pcrnn/model.hpp"
#include "pcrnn/optim.hpp"

namespace pcrnn {

struct TrainOptions {
  int epochs = 100;
  int batch_size = 16;
  double observed_fraction = 0.5;  // n = max(1, floor(fraction * chain length))
  std::uint64_t seed = 7;
  AdamConfig adam;
  int log_every = 0;  // progress lines to stderr every k epochs; 0 = quiet
};

struct EpochStats {
  double loss = 0.0;       // mean per-example joint loss
  double time_loss = 0.0;  // mean per-example time component
  double cat_loss = 0.0;   // mean per-example category component
};

struct TrainResult {
  Normalization norm;
  std::vector<EpochStats> trace;
};

// Builds one example per record at the observation fraction (records whose
// horizon would be empty are dropped).
std::vector<TrainingExample> build_examples(const std::vector<PatentRecord>& records,
                                            double observed_fraction, const Normalization& norm);

// Teacher-forced minibatch training: per batch, gradients accumulate over
// members, are averaged, clipped to the configured global norm, then stepped
// with Adam. All shuffling draws from the seed, so identical seeds give
// bit-identical traces. When `trace_csv` is set, one CSV row is written per
// epoch: epoch,loss,time_loss,cat_loss.
TrainResult train_model(PcrnnModel<float>& model, Adam<float>& optimizer,
                        const std::vector<PatentRecord>& train_records, const TrainOptions& opts,
                        std::ostream* trace_csv = nullptr);

// Forecast quality over prepared examples at their own horizons; event-level
// aggregation.
struct FitMetrics {
  double acc = 0.0;
  double gap_mae = 0.0;
  double abs_mae = 0.0;
  long events = 0;
};
FitMetrics evaluate_examples(const PcrnnModel<float>& model,
                             const std::vector<TrainingExample>& examples, DecodeMode mode);

// Event-level gap MAE of the naive baseline over the same examples.
double baseline_gap_mae(const std::vector<TrainingExample>& examples);

}  // namespace pcrnn
