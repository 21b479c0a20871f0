#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bergman_lab/types.hpp"

namespace bergman_lab {

/// Prefix expression tree for custom weights, e.g.
///   (+ (* (exp (abs2 t1)) (abs2 z1)) (abs2 t1))
/// Operators: + * - conj exp log abs2 re. Leaves: real literals, i, t1..tn,
/// z1..zd (t and z alias t1 and z1).
class Expression {
 public:
  enum class Op { literal, variable, add, mul, sub, conj, exp, log, abs2, re };

  Expression() = default;

  static Expression parse(const std::string& text, int base_dim, int fiber_dim);

  // x = (t_1..t_n, z_1..z_d).
  cplx evaluate(const CVector& x) const;

  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }

  struct Node {
    Op op = Op::literal;
    cplx value = 0.0;
    int var = -1;
    std::vector<std::shared_ptr<const Node>> args;
  };

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace bergman_lab
