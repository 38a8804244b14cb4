#pragma once

#include <array>
#include <cstdint>

namespace grfmask {

// Philox4x32-10 (Salmon et al., SC 2011). Stateless block function: the same
// (counter, key) always produces the same four words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// splitmix64 finalizer, used to derive sub-seeds from the experiment seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

// An independent random stream addressed by (master seed, stream a, stream b).
// For walk sampling a = node index and b = walk index, so every walk owns its
// stream regardless of which thread samples it.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t master_seed, std::uint32_t stream_a, std::uint32_t stream_b);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound), bound > 0, unbiased (rejection).
  std::uint32_t uniform_index(std::uint32_t bound);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_a_;
  std::uint32_t stream_b_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
};

}  // namespace grfmask
