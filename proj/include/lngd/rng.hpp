#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace lngd {

using Engine = std::mt19937_64;

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Seed for sub-stream `stream_id` of `master`. Distinct ids give
/// statistically independent seeds; the mapping is fixed and documented in
/// every run manifest.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

/// Folds a path of indices into a seed, e.g. {row, col, replicate} for a
/// sweep cell.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

enum class Stream : std::uint64_t {
  data = 1,
  init = 2,
  label_noise = 3,
  test = 4,
};

std::string_view stream_name(Stream s);

struct StreamSeeds {
  std::uint64_t master = 0;
  std::uint64_t data = 0;
  std::uint64_t init = 0;
  std::uint64_t label_noise = 0;
  std::uint64_t test = 0;

  static StreamSeeds from_master(std::uint64_t master);
};

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

}  // namespace lngd
