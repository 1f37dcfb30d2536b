#ifndef ASYBO_SAMPLING_HPP
#define ASYBO_SAMPLING_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "asybo/types.hpp"

namespace asybo {

/// splitmix64 step; used to derive independent stream seeds from a run seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Latin hypercube sample of n points in [0,1]^d: one point per stratum and
/// dimension, strata shuffled independently per dimension.
inline Matrix latin_hypercube(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  Matrix out(n, d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = (perm[static_cast<std::size_t>(i)] + unit(rng)) / static_cast<double>(n);
  }
  return out;
}

/// Uniform draw inside a box.
inline Vector uniform_in_box(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector u(box.dim());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unit(rng);
  return box.denormalize(u);
}

}  // namespace asybo

#endif  // ASYBO_SAMPLING_HPP
