#pragma once

#include <cstdint>
#include <random>

namespace semimarkov {

/// Source of uniform variates on the open interval (0, 1).
class UniformSource {
 public:
  virtual ~UniformSource() = default;
  virtual double uniform() = 0;
};

/// Deterministic stream: mt19937_64 with a fixed bits-to-double mapping, so
/// draws do not depend on the standard library's distribution implementations.
class SeededStream final : public UniformSource {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() override {
    // 53 random bits, centred in their cell: never exactly 0 or 1.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Box-Muller; consumes two uniforms.
double standard_normal(UniformSource& stream);

}  // namespace semimarkov
