#pragma once

// Hand-rolled random generators for the property tests. Each test seeds its
// own engine so failures reproduce.

#include <random>

#include "bergman_lab/types.hpp"

namespace bergman_lab::testing {

inline CMatrix random_complex(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CMatrix a(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) a(r, c) = cplx(g(rng), g(rng));
  return a;
}

/// Hermitian positive definite with smallest eigenvalue at least `floor`.
inline HermitianMatrix random_hpd(std::mt19937_64& rng, Index size, double floor = 0.1) {
  const CMatrix a = random_complex(rng, size, size);
  HermitianMatrix h = a * a.adjoint() / static_cast<double>(size) + floor * HermitianMatrix::Identity(size, size);
  return 0.5 * (h + h.adjoint());
}

/// Hermitian, possibly indefinite.
inline HermitianMatrix random_hermitian(std::mt19937_64& rng, Index size) {
  const CMatrix a = random_complex(rng, size, size);
  return 0.5 * (a + a.adjoint());
}

inline cplx random_point_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 2.0 * 3.141592653589793 * u(rng));
}

}  // namespace bergman_lab::testing
