#include "pcrnn/rng.hpp"

#include <cmath>

namespace pcrnn {

double Rng::exponential(double rate) {
  return -std::log1p(-uniform01()) / rate;
}

Rng Rng::fork(std::uint64_t salt) const {
  Rng child(state_ ^ (salt * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL));
  child.next_u64();
  return child;
}

}  // namespace pcrnn
