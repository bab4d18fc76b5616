#include "pcrnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

namespace pcrnn {

using nlohmann::json;

Normalization fit_normalization(const std::vector<PatentRecord>& train_records) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : train_records)
    for (const auto& e : r.events) {
      lo = std::min(lo, e.t);
      hi = std::max(hi, e.t);
    }
  if (!(hi > lo))
    throw NumericError("normalization: degenerate time span over the training split");
  return Normalization{lo, hi};
}

int observation_count(int chain_len, double fraction) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw ContractError("observation fraction must lie in (0, 1)");
  return std::max(1, static_cast<int>(std::floor(fraction * chain_len)));
}

TrainingExample make_example(const PatentRecord& record, int n, int horizon,
                             const Normalization& norm) {
  const int len = static_cast<int>(record.events.size());
  if (n < 1) throw ContractError("example: need at least one observation");
  if (horizon < 1) throw ContractError("example: horizon must be at least 1");
  if (n + horizon > len)
    throw ContractError("example '" + record.patent_id + "': n + horizon = " +
                        std::to_string(n + horizon) + " exceeds chain length " +
                        std::to_string(len));
  for (int k = 1; k < len; ++k)
    if (record.events[k].t < record.events[k - 1].t)
      throw OrderingError("example '" + record.patent_id + "': citation events out of order at " +
                          std::to_string(k));

  TrainingExample ex;
  ex.patent_id = record.patent_id;
  ex.n = n;
  ex.horizon = horizon;
  ex.norm = norm;
  ex.events.reserve(record.events.size());
  for (const auto& e : record.events)
    ex.events.push_back({norm.apply(e.t), e.main_cat, e.sub_cat});

  // Auxiliary events strictly before the observation window's end, most
  // recent kMaxAuxEvents kept.
  const double cutoff = record.events[n - 1].t;
  auto clip = [&](const std::vector<double>& chain) {
    std::vector<double> kept;
    for (std::size_t k = 1; k < chain.size(); ++k)
      if (chain[k] < chain[k - 1])
        throw OrderingError("example '" + record.patent_id + "': auxiliary events out of order");
    for (double t : chain)
      if (t < cutoff) kept.push_back(norm.apply(t));
    if (kept.size() > static_cast<std::size_t>(kMaxAuxEvents))
      kept.erase(kept.begin(), kept.end() - kMaxAuxEvents);
    return kept;
  };
  ex.assignee_events = clip(record.assignee_events);
  ex.inventor_events = clip(record.inventor_events);
  return ex;
}

std::vector<PatentRecord> load_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("sequence file: cannot open " + path);
  std::vector<PatentRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw SchemaError("sequence file: bad record at " + path + ":" + std::to_string(lineno));
    PatentRecord r;
    try {
      r.patent_id = j.at("patent_id").get<std::string>();
      for (const auto& e : j.at("events")) {
        CitationEvent ev;
        ev.t = e.at("t").get<double>();
        ev.main_cat = e.value("main_cat", -1);
        ev.sub_cat = e.value("sub_cat", -1);
        r.events.push_back(ev);
      }
      r.assignee_events = j.value("assignee_events", std::vector<double>{});
      r.inventor_events = j.value("inventor_events", std::vector<double>{});
    } catch (const json::exception& e) {
      throw SchemaError("sequence file: " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

void save_sequence_file(const std::string& path, const std::vector<PatentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw SchemaError("sequence file: cannot write " + path);
  for (const auto& r : records) {
    json events = json::array();
    for (const auto& e : r.events)
      events.push_back({{"t", e.t}, {"main_cat", e.main_cat}, {"sub_cat", e.sub_cat}});
    json j{{"patent_id", r.patent_id},
           {"events", std::move(events)},
           {"assignee_events", r.assignee_events},
           {"inventor_events", r.inventor_events}};
    out << j.dump() << '\n';
  }
}

Batch Batch::build(std::vector<TrainingExample> members) {
  Batch b;
  b.members = std::move(members);
  std::size_t max_n = 0, max_l = 0, max_a = 0, max_v = 0;
  for (const auto& m : b.members) {
    max_n = std::max(max_n, static_cast<std::size_t>(m.n));
    max_l = std::max(max_l, static_cast<std::size_t>(m.horizon));
    max_a = std::max(max_a, m.assignee_events.size());
    max_v = std::max(max_v, m.inventor_events.size());
  }
  for (const auto& m : b.members) {
    std::vector<double> gaps(max_n, 0.0), tg(max_l, 0.0);
    std::vector<int> mc(max_n, -1), sc(max_n, -1);
    std::vector<std::uint8_t> om(max_n, 0), tm(max_l, 0);
    for (int k = 0; k < m.n; ++k) {
      gaps[k] = m.gap(k);
      mc[k] = m.events[k].main_cat;
      sc[k] = m.events[k].sub_cat;
      om[k] = 1;
    }
    for (int j = 0; j < m.horizon; ++j) {
      tg[j] = m.target_gap(j);
      tm[j] = 1;
    }
    b.obs_gaps.push_back(std::move(gaps));
    b.obs_main.push_back(std::move(mc));
    b.obs_sub.push_back(std::move(sc));
    b.obs_mask.push_back(std::move(om));
    b.target_gaps.push_back(std::move(tg));
    b.target_mask.push_back(std::move(tm));

    auto pad = [](const std::vector<double>& src, std::size_t width,
                  std::vector<std::vector<double>>& vals,
                  std::vector<std::vector<std::uint8_t>>& masks) {
      std::vector<double> v(width, 0.0);
      std::vector<std::uint8_t> mk(width, 0);
      for (std::size_t i = 0; i < src.size(); ++i) {
        v[i] = src[i];
        mk[i] = 1;
      }
      vals.push_back(std::move(v));
      masks.push_back(std::move(mk));
    };
    pad(m.assignee_events, max_a, b.aux_a, b.mask_a);
    pad(m.inventor_events, max_v, b.aux_v, b.mask_v);
  }
  return b;
}

Split split_records(std::vector<PatentRecord> records, double train_fraction, Rng& rng) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ContractError("split: train fraction must lie in (0, 1)");
  rng.shuffle(records);
  const std::size_t n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(records.size())));
  Split s;
  s.train.assign(records.begin(), records.begin() + n_train);
  s.test.assign(records.begin() + n_train, records.end());
  return s;
}

std::vector<Batch> make_batches(std::vector<TrainingExample> examples, int batch_size, Rng& rng) {
  if (batch_size < 1) throw ContractError("batching: batch size must be at least 1");
  rng.shuffle(examples);
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < examples.size(); i += batch_size) {
    const std::size_t end = std::min(examples.size(), i + batch_size);
    batches.push_back(Batch::build({examples.begin() + i, examples.begin() + end}));
  }
  return batches;
}

}  // namespace pcrnn
