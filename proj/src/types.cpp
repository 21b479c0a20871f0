#include "bergman_lab/types.hpp"

namespace bergman_lab {

double min_eigenvalue(const HermitianMatrix& a) {
  if (a.size() == 0) return 0.0;
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

CVector make_point(std::initializer_list<cplx> coords) {
  CVector p(static_cast<Index>(coords.size()));
  Index i = 0;
  for (const cplx& c : coords) p(i++) = c;
  return p;
}

}  // namespace bergman_lab
