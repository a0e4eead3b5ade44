#include "lngd/rng.hpp"

namespace lngd {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  // Mix the master once so that nearby masters do not share prefixes, then
  // offset by the stream id and mix again.
  std::uint64_t s = master;
  std::uint64_t base = splitmix64_next(s);
  std::uint64_t t = base ^ (stream_id * 0xD1B54A32D192ED03ULL);
  return splitmix64_next(t);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  for (auto id : path) s = derive_seed(s, id);
  return s;
}

std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::data: return "data";
    case Stream::init: return "init";
    case Stream::label_noise: return "label_noise";
    case Stream::test: return "test";
  }
  return "unknown";
}

StreamSeeds StreamSeeds::from_master(std::uint64_t master) {
  StreamSeeds out;
  out.master = master;
  out.data = derive_seed(master, static_cast<std::uint64_t>(Stream::data));
  out.init = derive_seed(master, static_cast<std::uint64_t>(Stream::init));
  out.label_noise =
      derive_seed(master, static_cast<std::uint64_t>(Stream::label_noise));
  out.test = derive_seed(master, static_cast<std::uint64_t>(Stream::test));
  return out;
}

}  // namespace lngd
