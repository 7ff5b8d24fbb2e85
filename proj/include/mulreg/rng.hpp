#pragma once

#include <array>
#include <cstdint>

namespace mulreg {

//! Identifier written to manifests; bump when the stream layout changes.
inline constexpr const char* kRngVersion = "philox4x32-10/v1";

//! Philox4x32 with 10 rounds (Salmon et al., Random123). Counter-based, so
//! any block of the stream can be computed independently.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

//! SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

//! Seed of replication `index` under `master`. Independent of evaluation
//! order, which keeps parallel Monte Carlo reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

//! Sequential view of the Philox stream keyed by a 64-bit seed.
class UniformStream {
public:
  explicit UniformStream(std::uint64_t seed);

  std::uint32_t next_u32();
  //! Uniform on [0, 1) with 53 random bits.
  double next_double();

private:
  Philox4x32::Key key_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

} // namespace mulreg
