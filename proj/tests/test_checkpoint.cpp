#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "pcrnn/checkpoint.hpp"
#include "pcrnn/hawkes.hpp"
#include "pcrnn/trainer.hpp"

using namespace pcrnn;

namespace {

std::filesystem::path tmp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("checkpoint round trip restores parameters bit-exactly") {
  auto cfg = ModelConfig::micro();
  cfg.task = Task::sub_category;
  cfg.vocab = 5;
  auto model = PcrnnModel<float>::init(cfg, 123);
  Normalization norm{100.25, 9876.5};
  const auto path = tmp_file("pcrnn_ckpt_roundtrip.bin");
  save_checkpoint(path.string(), model, norm, 42);

  auto loaded = load_checkpoint(path.string());
  CHECK(loaded.norm.t_min == norm.t_min);
  CHECK(loaded.norm.t_max == norm.t_max);
  CHECK(loaded.seed == 42);
  CHECK(loaded.model.cfg.task == Task::sub_category);
  CHECK(loaded.model.cfg.vocab == 5);
  CHECK_FALSE(loaded.has_optimizer);

  auto a = model.parameters();
  auto b = loaded.model.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    REQUIRE(a[i].second.shape == b[i].second.shape);
    CHECK(std::memcmp(a[i].second.data->data(), b[i].second.data->data(),
                      a[i].second.numel() * sizeof(float)) == 0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("loaded models predict identically on a fixed batch") {
  HawkesParams hp{0.6, 1.2, 2.0, 22.0};
  Rng rng(31);
  auto records = simulate_dataset(hp, 4, rng);
  auto norm = fit_normalization(records);
  auto examples = build_examples(records, 0.5, norm);

  auto cfg77 = ModelConfig::micro();
  cfg77.vocab = 7;
  auto model = PcrnnModel<float>::init(cfg77, 77);
  const auto path = tmp_file("pcrnn_ckpt_predict.bin");
  save_checkpoint(path.string(), model, norm, 7);
  auto loaded = load_checkpoint(path.string());

  for (const auto& ex : examples) {
    Graph<float> g1, g2;
    auto r1 = model.forecast(g1, ex, ex.horizon, DecodeMode::free_running);
    auto r2 = loaded.model.forecast(g2, ex, ex.horizon, DecodeMode::free_running);
    for (int j = 0; j < ex.horizon; ++j) {
      CHECK(r1.predictions[j].t_gap.value() == r2.predictions[j].t_gap.value());
      for (int c = 0; c < model.cfg.vocab; ++c)
        CHECK(r1.predictions[j].m.at(c) == r2.predictions[j].m.at(c));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("optimizer state round-trips bit-exactly") {
  auto model = PcrnnModel<float>::init(ModelConfig::micro(), 5);
  auto params = model.parameters();
  AdamConfig acfg;
  acfg.lr = 0.01;
  Adam<float> opt(params, acfg);
  // A couple of synthetic steps to fill the moment buffers.
  for (int s = 0; s < 3; ++s) {
    for (auto& [name, p] : params) {
      Tensor<float> view = p;
      view.zero_grad();
      for (std::size_t i = 0; i < p.numel(); ++i) (*p.grad)[i] = 0.01f * (1 + (i + s) % 7);
    }
    opt.step(params);
  }

  const auto path = tmp_file("pcrnn_ckpt_optim.bin");
  save_checkpoint(path.string(), model, Normalization{0, 1}, 9, &opt);
  auto loaded = load_checkpoint(path.string());
  REQUIRE(loaded.has_optimizer);
  CHECK(loaded.adam_step == 3);
  CHECK(loaded.adam_config.lr == 0.01);
  auto restored = loaded.make_optimizer();
  const auto& m0 = opt.first_moments();
  const auto& m1 = restored.first_moments();
  REQUIRE(m0.size() == m1.size());
  for (std::size_t i = 0; i < m0.size(); ++i)
    CHECK(std::memcmp(m0[i].data(), m1[i].data(), m0[i].size() * sizeof(float)) == 0);
  const auto& v0 = opt.second_moments();
  const auto& v1 = restored.second_moments();
  for (std::size_t i = 0; i < v0.size(); ++i)
    CHECK(std::memcmp(v0[i].data(), v1[i].data(), v0[i].size() * sizeof(float)) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("bad magic and version are rejected") {
  const auto path = tmp_file("pcrnn_ckpt_bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "JUNKJUNKJUNKJUNK";
  }
  CHECK_THROWS_AS(load_checkpoint(path.string()), SchemaError);

  // Valid file with a bumped version byte.
  auto model = PcrnnModel<float>::init(ModelConfig::micro(), 1);
  save_checkpoint(path.string(), model, Normalization{0, 1}, 1);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const std::uint32_t bogus = 999;
    f.write(reinterpret_cast<const char*>(&bogus), sizeof bogus);
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()), doctest::Contains("version"), SchemaError);

  // Truncation mid-tensor.
  save_checkpoint(path.string(), model, Normalization{0, 1}, 1);
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full / 2);
  CHECK_THROWS_AS(load_checkpoint(path.string()), SchemaError);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.bin"), SchemaError);
  std::filesystem::remove(path);
}
