// Command-line surface of the citation-forecasting toolkit: data ingestion,
// synthetic sequence generation, training, evaluation, prediction, and the
// model-wide gradient self-check.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "pcrnn/checkpoint.hpp"
#include "pcrnn/eval.hpp"
#include "pcrnn/hawkes.hpp"
#include "pcrnn/ingest.hpp"
#include "pcrnn/model.hpp"
#include "pcrnn/trainer.hpp"
#include "pcrnn/verify.hpp"

using nlohmann::json;
using namespace pcrnn;

namespace {

// Everything a run can configure, initialized to the documented defaults,
// optionally overlaid by a JSON config file, then by command-line flags.
struct Settings {
  ModelConfig model = ModelConfig::standard(Task::main_category);
  AdamConfig adam;
  TrainOptions train;
  HawkesParams hawkes{0.6, 1.2, 2.0, 22.0};
  int simulate_count = 100;
  ColumnConfig columns;
  int min_chain = kMinChain;
  int max_chain = kMaxChain;
  double train_fraction = 0.8;
  std::vector<double> fractions{0.8, 0.5, 0.3, 0.1};
  std::string task = "main";

  void finish() {
    train.adam = adam;
    model.task = task == "sub" ? Task::sub_category : Task::main_category;
    if (task != "main" && task != "sub")
      throw ConfigError("config: task must be 'main' or 'sub', got '" + task + "'");
    model.vocab = task_vocab(model.task);
    model.validate();
  }
};

void expect_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* name : allowed) ok = ok || key == name;
    if (!ok) throw ConfigError(std::string("config: unknown key '") + key + "' in " + where);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void load_config_file(const std::string& path, Settings& s) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: " + path + " is not valid JSON");
  expect_keys(j, {"model", "optim", "train", "data", "columns", "simulate", "evaluate"}, "top level");

  if (j.contains("model")) {
    const auto& m = j.at("model");
    expect_keys(m, {"d_p", "d_a", "d_v", "emb_dim", "attn_dim", "pfn_inner", "stack",
                    "max_seq_len", "task"},
                "model");
    maybe(m, "d_p", s.model.d_p);
    maybe(m, "d_a", s.model.d_a);
    maybe(m, "d_v", s.model.d_v);
    maybe(m, "emb_dim", s.model.emb_dim);
    maybe(m, "attn_dim", s.model.attn_dim);
    maybe(m, "pfn_inner", s.model.pfn_inner);
    maybe(m, "stack", s.model.stack);
    maybe(m, "max_seq_len", s.model.max_seq_len);
    maybe(m, "task", s.task);
  }
  if (j.contains("optim")) {
    const auto& o = j.at("optim");
    expect_keys(o, {"lr", "beta1", "beta2", "eps", "clip_norm"}, "optim");
    maybe(o, "lr", s.adam.lr);
    maybe(o, "beta1", s.adam.beta1);
    maybe(o, "beta2", s.adam.beta2);
    maybe(o, "eps", s.adam.eps);
    maybe(o, "clip_norm", s.adam.clip_norm);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    expect_keys(t, {"epochs", "batch_size", "observed_fraction", "train_fraction", "seed",
                    "log_every"},
                "train");
    maybe(t, "epochs", s.train.epochs);
    maybe(t, "batch_size", s.train.batch_size);
    maybe(t, "observed_fraction", s.train.observed_fraction);
    maybe(t, "train_fraction", s.train_fraction);
    maybe(t, "seed", s.train.seed);
    maybe(t, "log_every", s.train.log_every);
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    expect_keys(d, {"min_chain", "max_chain"}, "data");
    maybe(d, "min_chain", s.min_chain);
    maybe(d, "max_chain", s.max_chain);
  }
  if (j.contains("columns")) {
    const auto& c = j.at("columns");
    expect_keys(c,
                {"citing", "cited", "patent", "date", "assignee_patent", "assignee",
                 "inventor_patent", "inventor", "category_patent", "main_cat", "sub_cat"},
                "columns");
    maybe(c, "citing", s.columns.citing);
    maybe(c, "cited", s.columns.cited);
    maybe(c, "patent", s.columns.patent);
    maybe(c, "date", s.columns.date);
    maybe(c, "assignee_patent", s.columns.assignee_patent);
    maybe(c, "assignee", s.columns.assignee);
    maybe(c, "inventor_patent", s.columns.inventor_patent);
    maybe(c, "inventor", s.columns.inventor);
    maybe(c, "category_patent", s.columns.category_patent);
    maybe(c, "main_cat", s.columns.main_cat);
    maybe(c, "sub_cat", s.columns.sub_cat);
  }
  if (j.contains("simulate")) {
    const auto& h = j.at("simulate");
    expect_keys(h, {"mu", "alpha", "beta", "horizon", "count"}, "simulate");
    maybe(h, "mu", s.hawkes.mu);
    maybe(h, "alpha", s.hawkes.alpha);
    maybe(h, "beta", s.hawkes.beta);
    maybe(h, "horizon", s.hawkes.horizon);
    maybe(h, "count", s.simulate_count);
  }
  if (j.contains("evaluate")) {
    const auto& e = j.at("evaluate");
    expect_keys(e, {"fractions"}, "evaluate");
    maybe(e, "fractions", s.fractions);
  }
}

// The training split is reproduced from the stored seed, so evaluate/predict
// see exactly the records that training never saw.
Split split_like_training(std::vector<PatentRecord> records, double train_fraction,
                          std::uint64_t seed) {
  Rng rng = Rng(seed).fork(0x73706c69);
  return split_records(std::move(records), train_fraction, rng);
}

int cmd_ingest(const Settings& s, const IngestPaths& paths, const std::string& out) {
  IngestStats stats;
  auto records = ingest_patentsview(paths, s.columns, s.min_chain, s.max_chain, &stats);
  save_sequence_file(out, records);
  std::printf("ingested %ld citation rows -> %ld usable chains (%s)\n", stats.citation_rows,
              stats.targets_kept, out.c_str());
  std::printf("  dropped: %ld short, %ld long; skipped rows: %ld bad date, %ld no category, "
              "%ld duplicates\n",
              stats.chains_dropped_short, stats.chains_dropped_long, stats.skipped_bad_date,
              stats.skipped_no_category, stats.duplicate_citations);
  return 0;
}

int cmd_simulate(const Settings& s, const std::string& out, std::uint64_t seed) {
  Rng rng = Rng(seed).fork(0x73696d);
  auto records = simulate_dataset(s.hawkes, s.simulate_count, rng);
  save_sequence_file(out, records);
  double events = 0;
  for (const auto& r : records) events += static_cast<double>(r.events.size());
  std::printf("simulated %d sequences (mean length %.1f) -> %s\n", s.simulate_count,
              events / static_cast<double>(records.size()), out.c_str());
  return 0;
}

int cmd_train(Settings& s, const std::string& data, const std::string& out,
              const std::string& trace_path) {
  auto records = load_sequence_file(data);
  if (records.empty()) throw ContractError("train: no records in " + data);
  auto split = split_like_training(std::move(records), s.train_fraction, s.train.seed);
  std::printf("training on %zu chains (%zu held out), task %s\n", split.train.size(),
              split.test.size(), task_name(s.model.task));

  auto model = PcrnnModel<float>::init(s.model, s.train.seed);
  Adam<float> optimizer(model.parameters(), s.adam);

  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw SchemaError("train: cannot write trace " + trace_path);
  }
  auto result = train_model(model, optimizer, split.train, s.train,
                            trace_path.empty() ? nullptr : &trace);
  save_checkpoint(out, model, result.norm, s.train.seed, &optimizer);
  std::printf("final loss %.6f (time %.6f, category %.6f) over %d epochs -> %s\n",
              result.trace.back().loss, result.trace.back().time_loss,
              result.trace.back().cat_loss, s.train.epochs, out.c_str());
  return 0;
}

int cmd_evaluate(const Settings& s, const std::string& data,
                 const std::vector<std::string>& checkpoints, const std::string& out_csv,
                 const std::string& out_jsonl, bool no_split) {
  SweepReport report;
  for (const std::string& ckpt_path : checkpoints) {
    auto ckpt = load_checkpoint(ckpt_path);
    auto records = load_sequence_file(data);
    std::vector<PatentRecord> eval_set;
    if (no_split) {
      eval_set = std::move(records);
    } else {
      eval_set = split_like_training(std::move(records), s.train_fraction, ckpt.seed).test;
    }
    auto part = run_observation_sweep(ckpt.model, eval_set, ckpt.norm, s.fractions);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
  }
  if (!out_csv.empty()) report.write_csv(out_csv);
  if (!out_jsonl.empty()) report.write_jsonl(out_jsonl);
  std::printf("task      fraction   ACC      gap-MAE    abs-MAE    events\n");
  for (const auto& r : report.rows)
    std::printf("%-9s %-10.2f %-8.4f %-10.6f %-10.6f %ld\n", r.task.c_str(), r.fraction, r.acc,
                r.gap_mae, r.abs_mae, r.events);
  return 0;
}

int cmd_predict(const Settings& s, const std::string& data, const std::string& ckpt_path,
                const std::string& out, double fraction, int horizon) {
  auto ckpt = load_checkpoint(ckpt_path);
  auto records = load_sequence_file(data);
  std::ofstream outf(out);
  if (!outf) throw SchemaError("predict: cannot write " + out);
  long skipped = 0;
  for (const auto& rec : records) {
    const int len = static_cast<int>(rec.events.size());
    const int n = observation_count(len, fraction);
    if (len - n < 1) {
      ++skipped;
      continue;
    }
    // Free-running decode can roll past the recorded chain, so an explicit
    // horizon may exceed len - n.
    const int steps = horizon > 0 ? horizon : len - n;
    auto ex = make_example(rec, n, len - n, ckpt.norm);
    Graph<float> g;
    auto run = ckpt.model.forecast(g, ex, steps, DecodeMode::free_running);
    json preds = json::array();
    double cum = ex.events[n - 1].t;
    for (int j = 0; j < steps; ++j) {
      const double gap = static_cast<double>(run.predictions[j].t_gap.value());
      cum += gap;
      preds.push_back({{"gap_norm", gap},
                       {"t_raw", ckpt.norm.invert(cum)},
                       {"category", run.predictions[j].category()}});
    }
    json record{{"patent_id", rec.patent_id}, {"observed", n}, {"predictions", std::move(preds)}};
    outf << record.dump() << '\n';
  }
  std::printf("wrote forecasts for %zu chains (%ld skipped) -> %s\n", records.size() - skipped,
              skipped, out.c_str());
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, double eps) {
  auto report = micro_gradcheck(seed, eps);
  std::printf("checked %ld coordinates, max relative error %.3e (%s[%ld]: analytic %.6e vs "
              "numeric %.6e)\n",
              report.coordinates, report.max_rel_err, report.worst_param.c_str(),
              report.worst_index, report.worst_analytic, report.worst_numeric);
  for (const auto& name : report.zero_grad_params)
    std::printf("warning: parameter '%s' has an all-zero gradient\n", name.c_str());
  const bool ok = report.pass(1e-4) && report.zero_grad_params.empty();
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patent-citation sequence forecasting toolkit"};
  app.require_subcommand(1);

  Settings s;
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file (flags override it)");

  // Config file values must land before flag values, so peek at argv now.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) load_config_file(config_path, s);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build a sequence file from bulk TSV dumps");
  IngestPaths paths;
  std::string out;
  ingest->add_option("--citations", paths.citations, "citation pairs TSV")->required();
  ingest->add_option("--patents", paths.patents, "patent grant dates TSV")->required();
  ingest->add_option("--assignees", paths.assignees, "patent-assignee map TSV")->required();
  ingest->add_option("--inventors", paths.inventors, "patent-inventor map TSV")->required();
  ingest->add_option("--categories", paths.categories, "patent category map TSV")->required();
  ingest->add_option("--out", out, "output sequence file")->required();
  ingest->add_option("--min-chain", s.min_chain, "drop chains shorter than this");
  ingest->add_option("--max-chain", s.max_chain, "drop chains longer than this");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic marked sequences");
  std::uint64_t seed = 7;
  simulate->add_option("--out", out, "output sequence file")->required();
  simulate->add_option("--count", s.simulate_count, "number of sequences");
  simulate->add_option("--mu", s.hawkes.mu, "base intensity");
  simulate->add_option("--alpha", s.hawkes.alpha, "excitation jump");
  simulate->add_option("--beta", s.hawkes.beta, "excitation decay rate");
  simulate->add_option("--horizon", s.hawkes.horizon, "simulation window length");
  simulate->add_option("--seed", seed, "random seed");

  // train
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  std::string data, trace_path;
  train->add_option("--data", data, "sequence file")->required();
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--trace", trace_path, "per-epoch loss CSV");
  train->add_option("--task", s.task, "main|sub category task");
  train->add_option("--epochs", s.train.epochs, "training epochs");
  train->add_option("--batch-size", s.train.batch_size, "examples per optimizer step");
  train->add_option("--observed-fraction", s.train.observed_fraction,
                    "observation window fraction");
  train->add_option("--train-fraction", s.train_fraction, "train split fraction");
  train->add_option("--seed", s.train.seed, "random seed");
  train->add_option("--lr", s.adam.lr, "learning rate");
  train->add_option("--clip-norm", s.adam.clip_norm, "global gradient norm limit");
  train->add_option("--log-every", s.train.log_every, "progress interval in epochs (0 = quiet)");
  train->add_option("--d-p", s.model.d_p, "patent encoder / decoder width");
  train->add_option("--d-a", s.model.d_a, "assignee encoder width");
  train->add_option("--d-v", s.model.d_v, "inventor encoder width");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Observation-window sweep over the test split");
  std::vector<std::string> checkpoints;
  std::string out_csv, out_jsonl;
  bool no_split = false;
  evaluate->add_option("--data", data, "sequence file")->required();
  evaluate->add_option("--checkpoint", checkpoints, "model checkpoint (repeat for both tasks)")
      ->required();
  evaluate->add_option("--fractions", s.fractions, "observation fractions")->delimiter(',');
  evaluate->add_option("--out-csv", out_csv, "report CSV path");
  evaluate->add_option("--out-jsonl", out_jsonl, "report JSONL path");
  evaluate->add_option("--train-fraction", s.train_fraction, "split fraction used at training");
  evaluate->add_flag("--no-split", no_split, "evaluate on every record in the file");

  // predict
  auto* predict = app.add_subcommand("predict", "Free-running forecasts per chain");
  std::string ckpt_path;
  double predict_fraction = 0.5;
  int predict_horizon = 0;
  predict->add_option("--data", data, "sequence file")->required();
  predict->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  predict->add_option("--out", out, "output forecast JSONL")->required();
  predict->add_option("--fraction", predict_fraction, "observation fraction");
  predict->add_option("--horizon", predict_horizon, "forecast steps (default: rest of chain)");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  double eps = 1e-5;
  gradcheck->add_option("--seed", seed, "parameter init seed");
  gradcheck->add_option("--eps", eps, "finite-difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    s.finish();
    if (app.got_subcommand(ingest)) return cmd_ingest(s, paths, out);
    if (app.got_subcommand(simulate)) return cmd_simulate(s, out, seed);
    if (app.got_subcommand(train)) return cmd_train(s, data, out, trace_path);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(s, data, checkpoints, out_csv, out_jsonl, no_split);
    if (app.got_subcommand(predict))
      return cmd_predict(s, data, ckpt_path, out, predict_fraction, predict_horizon);
    if (app.got_subcommand(gradcheck)) return cmd_gradcheck(seed, eps);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const VocabError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const OrderingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const StationarityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 1;
}
