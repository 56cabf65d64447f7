#include "difflab/rng.hpp"

namespace difflab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::uint64_t stream) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(run + 0x632BE59BD9B4E019ULL));
  return splitmix64(h ^ splitmix64(stream + 0x8CB92BA72F3D8DD7ULL));
}

}  // namespace difflab
