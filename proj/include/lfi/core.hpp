#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

namespace lfi {

using Scalar = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Random engine used everywhere; all stochastic routines take it by reference.
using Rng = std::mt19937_64;

inline constexpr Scalar kLog2Pi = 1.83787706640934548356;

/// Draws a vector of iid standard normals.
inline Vector standard_normal(Index n, Rng& rng) {
  std::normal_distribution<Scalar> z;
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = z(rng);
  return out;
}

inline Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<Scalar> z;
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = z(rng);
  return out;
}

inline Scalar uniform01(Rng& rng) {
  return std::uniform_real_distribution<Scalar>(0.0, 1.0)(rng);
}

/// Deterministic child seed, so that sub-tasks of a seeded run get independent streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace lfi
