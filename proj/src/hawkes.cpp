#include "pcrnn/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcrnn/errors.hpp"

namespace pcrnn {

void HawkesParams::validate() const {
  if (mu < 0.0) throw ContractError("hawkes: mu must be nonnegative");
  if (alpha < 0.0) throw ContractError("hawkes: alpha must be nonnegative");
  if (alpha >= beta)
    throw StationarityError("hawkes: alpha = " + std::to_string(alpha) +
                            " must stay below beta = " + std::to_string(beta));
  if (horizon <= 0.0) throw ContractError("hawkes: horizon must be positive");
}

std::vector<double> simulate_hawkes(const HawkesParams& p, Rng& rng) {
  p.validate();
  std::vector<double> times;
  // decayed = sum of exp(-beta (t - t_i)) over past events, updated
  // recursively so each proposal costs O(1).
  double t = 0.0, decayed = 0.0;
  while (true) {
    // Intensity immediately after t bounds intensity until the next event.
    const double bound = p.mu + p.alpha * decayed;
    if (bound <= 0.0) break;
    const double wait = rng.exponential(bound);
    const double proposal = t + wait;
    if (proposal > p.horizon) break;
    decayed *= std::exp(-p.beta * (proposal - t));
    t = proposal;
    const double lambda = p.mu + p.alpha * decayed;
    if (rng.uniform01() * bound <= lambda) {
      times.push_back(t);
      decayed += 1.0;
    }
  }
  return times;
}

MarkedTimes assign_marks(const std::vector<double>& times, int main_vocab, int sub_vocab) {
  MarkedTimes m;
  std::vector<double> gaps, sorted_gaps;
  int sub = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) {
      const double gap = times[k] - times[k - 1];
      gaps.push_back(gap);
      sorted_gaps.insert(std::upper_bound(sorted_gaps.begin(), sorted_gaps.end(), gap), gap);
      const double median = sorted_gaps.size() % 2 == 1
                                ? sorted_gaps[sorted_gaps.size() / 2]
                                : 0.5 * (sorted_gaps[sorted_gaps.size() / 2 - 1] +
                                         sorted_gaps[sorted_gaps.size() / 2]);
      if (gaps.size() >= 3) {
        const std::size_t g = gaps.size();
        if (gaps[g - 1] < median && gaps[g - 2] < median && gaps[g - 3] < median)
          sub = (sub + 1) % sub_vocab;
      }
    }
    m.sub_cats.push_back(sub);
    m.main_cats.push_back(sub % main_vocab);
  }
  return m;
}

PatentRecord simulate_record(const HawkesParams& params, const std::string& patent_id, Rng& rng) {
  PatentRecord r;
  r.patent_id = patent_id;
  const auto times = simulate_hawkes(params, rng);
  const auto marks = assign_marks(times);
  for (std::size_t k = 0; k < times.size(); ++k)
    r.events.push_back({times[k], marks.main_cats[k], marks.sub_cats[k]});
  r.assignee_events = simulate_hawkes(params, rng);
  r.inventor_events = simulate_hawkes(params, rng);
  return r;
}

std::vector<PatentRecord> simulate_dataset(const HawkesParams& params, int count, Rng& rng) {
  if (count < 1) throw ContractError("simulate: count must be at least 1");
  std::vector<PatentRecord> records;
  long attempts = 0;
  while (static_cast<int>(records.size()) < count) {
    if (++attempts > 200L * count)
      throw NumericError("simulate: chain length bounds rejected too many draws; "
                         "adjust mu/alpha/beta/horizon");
    auto r = simulate_record(params, "synthetic-" + std::to_string(records.size()), rng);
    const int len = static_cast<int>(r.events.size());
    if (len < kMinChain || len > kMaxChain) continue;
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace pcrnn
