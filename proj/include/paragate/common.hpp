// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace paragate {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr cxd iu{0.0, 1.0};

// Angular-frequency unit helpers: all internal frequencies are rad/s, all
// times seconds.  Configs carry ordinary frequencies (GHz/MHz/kHz) and are
// scaled on ingestion.
namespace units {
inline constexpr double GHz = two_pi * 1e9;
inline constexpr double MHz = two_pi * 1e6;
inline constexpr double kHz = two_pi * 1e3;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;
}  // namespace units

// Error taxonomy: `invalid` covers bad arguments/config (CLI exit code 2),
// `numeric` covers solver/convergence failures (CLI exit code 3).
enum class ErrorKind { invalid, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  [[noreturn]] static void invalid(const std::string& msg) {
    throw Error(ErrorKind::invalid, msg);
  }
  [[noreturn]] static void numeric(const std::string& msg) {
    throw Error(ErrorKind::numeric, msg);
  }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) Error::invalid(msg);
}

// Deterministic RNG.  Distributions are hand-evaluated from the raw 64-bit
// stream so outputs are identical across standard-library implementations
// (the reproducibility contract is byte-identical reruns).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  // Derive an independent stream (used to keep Monte-Carlo results
  // independent of worker count / evaluation order).
  Rng spawn(std::uint64_t stream) const {
    return Rng(mix(state_ ^ mix(stream + 0x632be59bd9b4e019ull)));
  }

  std::uint64_t next_u64() {
    // splitmix64: small state, passes BigCrush, trivially seedable.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection-free multiply-shift is fine here: n is always tiny compared
    // with 2^64, the modulo bias is < n/2^64.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  // Standard normal via Box-Muller (cached second value).
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cache_ = r * std::sin(two_pi * u2);
    have_cache_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace paragate
