#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcrnn/errors.hpp"
#include "pcrnn/rng.hpp"

namespace pcrnn {

// Which category stream a model predicts.
enum class Task { main_category, sub_category };

inline const char* task_name(Task t) {
  return t == Task::main_category ? "main" : "sub";
}

inline int task_vocab(Task t) { return t == Task::main_category ? 7 : 37; }

// One forward-citation arrival. Patent-chain events carry both category
// streams; auxiliary chains are plain timestamps.
struct CitationEvent {
  double t = 0.0;
  int main_cat = -1;
  int sub_cat = -1;

  int category(Task task) const { return task == Task::main_category ? main_cat : sub_cat; }
};

// A target patent's full materialized history: its citation chain plus the
// chains of its (longest-chain) assignee and inventor. Times are raw.
struct PatentRecord {
  std::string patent_id;
  std::vector<CitationEvent> events;
  std::vector<double> assignee_events;
  std::vector<double> inventor_events;
};

// Affine map of raw times onto [0, 1] fitted on the training split. Times
// outside the fitted span map outside [0, 1] and are deliberately not clipped.
struct Normalization {
  double t_min = 0.0;
  double t_max = 1.0;

  double apply(double t) const { return (t - t_min) / (t_max - t_min); }
  double invert(double u) const { return t_min + u * (t_max - t_min); }
};

// Constants come from training-split patent chains only.
Normalization fit_normalization(const std::vector<PatentRecord>& train_records);

// One model input: the first `n` patent events as observations, the next
// `horizon` as targets, and the auxiliary chains cut off at the observation
// window's end. All times normalized.
struct TrainingExample {
  std::string patent_id;
  std::vector<CitationEvent> events;       // full chain, normalized times
  std::vector<double> assignee_events;     // cutoff applied, at most 200 kept
  std::vector<double> inventor_events;
  int n = 0;
  int horizon = 0;
  Normalization norm;

  // Inter-event gap of event k (gap of the first event is 0).
  double gap(int k) const { return k == 0 ? 0.0 : events[k].t - events[k - 1].t; }

  const CitationEvent& target(int j) const { return events[n + j]; }  // j in [0, horizon)
  double target_gap(int j) const { return gap(n + j); }
};

// Maximum auxiliary positions kept after the cutoff, and the chain-length
// filter bounds used across the pipeline.
inline constexpr int kMaxAuxEvents = 200;
inline constexpr int kMinChain = 20;
inline constexpr int kMaxChain = 200;

// Validates ordering, applies the cutoff rule and normalization.
TrainingExample make_example(const PatentRecord& record, int n, int horizon,
                             const Normalization& norm);

// n for an observation fraction: max(1, floor(fraction * len)).
int observation_count(int chain_len, double fraction);

// Line-delimited self-describing records; one JSON object per line.
std::vector<PatentRecord> load_sequence_file(const std::string& path);
void save_sequence_file(const std::string& path, const std::vector<PatentRecord>& records);

// A training minibatch: the member examples plus padded per-family arrays
// with masks. Padded positions are masked and never reach loss or attention.
struct Batch {
  std::vector<TrainingExample> members;

  // Observed patent window, padded across members.
  std::vector<std::vector<double>> obs_gaps;
  std::vector<std::vector<int>> obs_main, obs_sub;
  std::vector<std::vector<std::uint8_t>> obs_mask;
  // Target window.
  std::vector<std::vector<double>> target_gaps;
  std::vector<std::vector<std::uint8_t>> target_mask;
  // Auxiliary chains.
  std::vector<std::vector<double>> aux_a, aux_v;
  std::vector<std::vector<std::uint8_t>> mask_a, mask_v;

  static Batch build(std::vector<TrainingExample> members);
};

// Seeded shuffle then split; floor(fraction * size) records go to train.
struct Split {
  std::vector<PatentRecord> train;
  std::vector<PatentRecord> test;
};
Split split_records(std::vector<PatentRecord> records, double train_fraction, Rng& rng);

// Seeded shuffle then fixed-size chunks (the last one may be short).
std::vector<Batch> make_batches(std::vector<TrainingExample> examples, int batch_size, Rng& rng);

}  // namespace pcrnn
