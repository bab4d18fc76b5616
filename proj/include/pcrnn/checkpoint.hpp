#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pcrnn/data.hpp"
#include "pcrnn/model.hpp"
#include "pcrnn/optim.hpp"

namespace pcrnn {

// Binary model snapshot: format version, full config echo, normalization
// constants, named float32 parameter tensors, optional optimizer state, and
// the run seed. Little-endian throughout. Loading a saved model reproduces
// parameters bit-exactly.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
  PcrnnModel<float> model;
  Normalization norm;
  std::uint64_t seed = 0;
  bool has_optimizer = false;
  AdamConfig adam_config;
  std::int64_t adam_step = 0;
  std::vector<std::vector<float>> adam_m, adam_v;

  // Rebuilds the optimizer aligned with model.parameters().
  Adam<float> make_optimizer() const {
    Adam<float> opt(model.parameters(), adam_config);
    if (has_optimizer) opt.restore(adam_step, adam_m, adam_v);
    return opt;
  }
};

void save_checkpoint(const std::string& path, const PcrnnModel<float>& model,
                     const Normalization& norm, std::uint64_t seed,
                     const Adam<float>* optimizer = nullptr);

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace pcrnn
