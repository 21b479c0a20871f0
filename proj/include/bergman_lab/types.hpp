#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bergman_lab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Points of the base patch (t_1..t_n) and of the fiber (xi_1..xi_d).
using BasePoint = CVector;
using FiberPoint = CVector;

// Dense complex matrix expected to be conjugate-symmetric.
using HermitianMatrix = CMatrix;

enum class ErrorKind {
  invalid_argument,
  degenerate_basis,
  fiber_degenerate,
  not_a_weight,
  unconverged,
  parse,
  outside_domain,
  non_finite,
  grid_mismatch,
  indefinite,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::degenerate_basis: return "degenerate basis";
    case ErrorKind::fiber_degenerate: return "fiber-degenerate";
    case ErrorKind::not_a_weight: return "not a weight";
    case ErrorKind::unconverged: return "unconverged basis";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::outside_domain: return "outside domain";
    case ErrorKind::non_finite: return "non-finite value";
    case ErrorKind::grid_mismatch: return "grid mismatch";
    case ErrorKind::indefinite: return "indefinite matrix";
  }
  return "error";
}

// Relative conjugate-symmetry defect ||A - A^H|| / max(1, ||A||).
template <typename Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& a) {
  const double scale = std::max(1.0, static_cast<double>(a.norm()));
  return static_cast<double>((a - a.adjoint()).norm()) / scale;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-14) {
  return a.rows() == a.cols() && hermitian_defect(a) <= rel_tol;
}

// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const HermitianMatrix& a);

// Index-by-index point with complex coordinates given as initializer list.
CVector make_point(std::initializer_list<cplx> coords);

}  // namespace bergman_lab
