#pragma once

#include <map>
#include <string>
#include <vector>

#include "bergman_lab/types.hpp"

namespace bergman_lab {

/// Polynomial in x_1..x_V and their conjugates. Variables are the base
/// coordinates t_1..t_n followed by the fiber coordinates z_1..z_d.
class Polynomial {
 public:
  // Exponent key: p_1..p_V (holomorphic) followed by q_1..q_V (conjugate).
  using Key = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, cplx c);
  static Polynomial variable(int nvars, int index, bool conjugated = false);

  int nvars() const { return nvars_; }
  const std::map<Key, cplx>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int total_degree() const;

  void add_term(const Key& key, cplx coeff);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(cplx s) const;
  Polynomial operator-() const { return *this * cplx(-1.0); }
  Polynomial pow(int k) const;
  Polynomial conj() const;

  // Wirtinger derivatives d/dx_k and d/dconj(x_k).
  Polynomial d(int k) const;
  Polynomial dbar(int k) const;

  cplx evaluate(const CVector& x) const;

  // True when conj() equals *this up to `tol` in every coefficient.
  bool is_real(double tol = 1e-12) const;

  std::string to_string(int base_dim) const;

 private:
  int nvars_ = 0;
  std::map<Key, cplx> terms_;
};

/// Parses infix text such as "|t|^2 + |z|^2 + 2*re(0.5*t*conj(z))".
/// Variables t1..tn and z1..zd (t and z alias t1 and z1), the unit i, real
/// literals, + - * ^ with non-negative integer powers, division by literals,
/// conj(), re(), im(), abs2(), and |e|^(2k).
Polynomial parse_polynomial(const std::string& text, int base_dim, int fiber_dim);

}  // namespace bergman_lab
