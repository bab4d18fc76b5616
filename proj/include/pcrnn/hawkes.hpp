#pragma once

#include <cstdint>
#include <vector>

#include "pcrnn/data.hpp"
#include "pcrnn/rng.hpp"

namespace pcrnn {

// Self-exciting process with exponential kernel:
//   lambda(t) = mu + sum_{t_i < t} alpha * exp(-beta * (t - t_i))
// Requires 0 <= alpha < beta for stationarity.
struct HawkesParams {
  double mu = 1.0;
  double alpha = 0.5;
  double beta = 1.0;
  double horizon = 10.0;

  void validate() const;
};

// Exact thinning simulation over (0, horizon]. Times are strictly increasing;
// ties cannot occur because inter-arrival proposals are continuous.
std::vector<double> simulate_hawkes(const HawkesParams& params, Rng& rng);

// Deterministic marks over simulated times: the subcategory advances by one
// (mod sub_vocab) whenever the last three gaps all fall below the running
// median gap, and the main category is the subcategory's bucket. Burstiness
// therefore drives category switches, which gives the marks structure a
// sequence model can pick up.
struct MarkedTimes {
  std::vector<int> main_cats;
  std::vector<int> sub_cats;
};
MarkedTimes assign_marks(const std::vector<double>& times, int main_vocab = 7, int sub_vocab = 37);

// One synthetic patent record: a marked patent chain plus two independent
// auxiliary chains drawn from the same parameter family.
PatentRecord simulate_record(const HawkesParams& params, const std::string& patent_id, Rng& rng);

// Simulates until `count` records with chain lengths inside the usual
// [kMinChain, kMaxChain] bounds have been collected.
std::vector<PatentRecord> simulate_dataset(const HawkesParams& params, int count, Rng& rng);

}  // namespace pcrnn
