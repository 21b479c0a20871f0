#pragma once

#include <cmath>
#include <vector>

#include "bergman_lab/types.hpp"

namespace bergman_lab {

// Offsets of the real-coordinate central-difference stencil for all
// d^2/dx_a dconj(x_b) in `dim` complex variables: the center, then
// +-h e_a, +-ih e_a for each a, then for each pair a < b the same four
// points along e_a + e_b and along e_a + i e_b. 1 + 4n + 4n(n-1) points.
inline std::vector<CVector> polarization_offsets(int dim, double h) {
  std::vector<CVector> out;
  const cplx I(0.0, 1.0);
  out.push_back(CVector::Zero(dim));
  auto push4 = [&](const CVector& v) {
    out.push_back(h * v);
    out.push_back(-h * v);
    out.push_back(I * h * v);
    out.push_back(-I * h * v);
  };
  for (int a = 0; a < dim; ++a) push4(CVector::Unit(dim, a));
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      push4(CVector::Unit(dim, a) + CVector::Unit(dim, b));
      push4(CVector::Unit(dim, a) + I * CVector::Unit(dim, b));
    }
  }
  return out;
}

// Complex Hessian H(a, b) = d^2 f / dx_a dconj(x_b) from samples taken at
// polarization_offsets(dim, h). Hermitian by construction.
inline HermitianMatrix assemble_polarized_hessian(const RVector& samples, int dim, double h) {
  const Index expected = 1 + 4 * dim + 4 * dim * (dim - 1);
  if (samples.size() != expected) throw Error(ErrorKind::grid_mismatch, "stencil sample count mismatch");
  for (Index j = 0; j < samples.size(); ++j)
    if (!std::isfinite(samples(j))) throw Error(ErrorKind::non_finite, "non-finite field value on stencil");
  const double f0 = samples(0);
  auto quad = [&](Index start) {
    return (samples(start) + samples(start + 1) + samples(start + 2) + samples(start + 3) - 4.0 * f0) /
           (4.0 * h * h);
  };
  HermitianMatrix hess = HermitianMatrix::Zero(dim, dim);
  std::vector<double> diag(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    diag[static_cast<std::size_t>(a)] = quad(1 + 4 * a);
    hess(a, a) = diag[static_cast<std::size_t>(a)];
  }
  Index next = 1 + 4 * dim;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      const double qa = diag[static_cast<std::size_t>(a)];
      const double qb = diag[static_cast<std::size_t>(b)];
      const double re = 0.5 * (quad(next) - qa - qb);
      const double im = 0.5 * (quad(next + 4) - qa - qb);
      next += 8;
      hess(a, b) = cplx(re, im);
      hess(b, a) = cplx(re, -im);
    }
  }
  return hess;
}

// Wirtinger gradient df/dx_a = (df/dRe - i df/dIm) / 2 from the same samples.
inline CVector assemble_polarized_gradient(const RVector& samples, int dim, double h) {
  CVector g(dim);
  for (int a = 0; a < dim; ++a) {
    const Index s = 1 + 4 * a;
    const double dx = (samples(s) - samples(s + 1)) / (2.0 * h);
    const double dy = (samples(s + 2) - samples(s + 3)) / (2.0 * h);
    g(a) = 0.5 * cplx(dx, -dy);
  }
  return g;
}

template <typename F>
RVector sample_polarization(F&& f, const CVector& x, double h) {
  const auto offsets = polarization_offsets(static_cast<int>(x.size()), h);
  RVector samples(static_cast<Index>(offsets.size()));
  for (std::size_t j = 0; j < offsets.size(); ++j) samples(static_cast<Index>(j)) = f(CVector(x + offsets[j]));
  return samples;
}

template <typename F>
HermitianMatrix polarized_hessian(F&& f, const CVector& x, double h) {
  return assemble_polarized_hessian(sample_polarization(f, x, h), static_cast<int>(x.size()), h);
}

}  // namespace bergman_lab
