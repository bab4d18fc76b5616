#include "pcrnn/eval.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>

namespace pcrnn {

using nlohmann::json;

double mae(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.empty() || predicted.size() != truth.size())
    throw ContractError("mae: " + std::to_string(predicted.size()) + " predictions for " +
                        std::to_string(truth.size()) + " targets");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) acc += std::fabs(predicted[i] - truth[i]);
  return acc / static_cast<double>(predicted.size());
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.empty() || predicted.size() != truth.size())
    throw ContractError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                        std::to_string(truth.size()) + " targets");
  long hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::vector<BaselinePrediction> naive_baseline(const TrainingExample& ex, int horizon, Task task) {
  double mean_gap = 0.0;
  if (ex.n >= 2) mean_gap = (ex.events[ex.n - 1].t - ex.events[0].t) / (ex.n - 1);
  std::map<int, int> counts;
  for (int k = 0; k < ex.n; ++k) ++counts[ex.events[k].category(task)];
  int majority = -1, best = -1;
  for (const auto& [cat, count] : counts)  // ascending ids, so ties keep the lowest
    if (count > best) {
      best = count;
      majority = cat;
    }
  return std::vector<BaselinePrediction>(static_cast<std::size_t>(horizon),
                                         BaselinePrediction{mean_gap, majority});
}

void SweepReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SchemaError("sweep report: cannot write " + path);
  out << "task,fraction,acc,gap_mae,abs_mae,per_seq_acc,per_seq_gap_mae,per_seq_abs_mae,"
         "events,examples,skipped\n";
  char buf[360];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.4g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%ld,%ld\n",
                  r.task.c_str(), r.fraction, r.acc, r.gap_mae, r.abs_mae, r.per_seq_acc,
                  r.per_seq_gap_mae, r.per_seq_abs_mae, r.events, r.examples, r.skipped);
    out << buf;
  }
}

void SweepReport::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SchemaError("sweep report: cannot write " + path);
  for (const auto& r : rows) {
    json j{{"task", r.task},
           {"fraction", r.fraction},
           {"acc", r.acc},
           {"gap_mae", r.gap_mae},
           {"abs_mae", r.abs_mae},
           {"per_seq_acc", r.per_seq_acc},
           {"per_seq_gap_mae", r.per_seq_gap_mae},
           {"per_seq_abs_mae", r.per_seq_abs_mae},
           {"events", r.events},
           {"examples", r.examples},
           {"skipped", r.skipped}};
    out << j.dump() << '\n';
  }
}

SweepReport SweepReport::read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("sweep report: cannot open " + path);
  SweepReport report;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw SchemaError("sweep report: bad record at " + path + ":" + std::to_string(lineno));
    SweepRow r;
    r.task = j.at("task").get<std::string>();
    r.fraction = j.at("fraction").get<double>();
    r.acc = j.at("acc").get<double>();
    r.gap_mae = j.at("gap_mae").get<double>();
    r.abs_mae = j.at("abs_mae").get<double>();
    r.per_seq_acc = j.at("per_seq_acc").get<double>();
    r.per_seq_gap_mae = j.at("per_seq_gap_mae").get<double>();
    r.per_seq_abs_mae = j.at("per_seq_abs_mae").get<double>();
    r.events = j.at("events").get<long>();
    r.examples = j.at("examples").get<long>();
    r.skipped = j.at("skipped").get<long>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace pcrnn
