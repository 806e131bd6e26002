#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace lss {

/// Purpose tags separating the independent substreams used within one trial.
enum class StreamTag : std::uint32_t {
  H0Noise = 1,
  H0NoiseProfile = 2,
  H1Noise = 3,
  H1NoiseProfile = 4,
  H1Channel = 5,
  H1Signal = 6,
  InverseScm = 7,
  Oracle = 8,
};

/// Counter-based generator (Philox4x32-10). A stream is fully determined by
/// (seed, index, tag): draw k of a stream is a pure function of those three
/// values and k, so trials can be evaluated in any order or on any thread.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index, StreamTag tag);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform on [lo, hi].
  double uniform(double lo, double hi);
  double normal();
  /// Circular complex Gaussian CN(0, variance): real and imaginary parts each
  /// have variance / 2.
  std::complex<double> complex_normal(double variance = 1.0);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

}  // namespace lss
