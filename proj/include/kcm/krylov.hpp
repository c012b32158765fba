#pragma once

#include "kcm/types.hpp"

namespace kcm {

struct ExpvStats {
  int steps = 0;
  int rejections = 0;
  int matvecs = 0;
  double error_estimate = 0.0;
};

/// w = exp(t A) v by adaptive Krylov (Arnoldi) time stepping with a local error
/// estimate per step, after Sidje's expv. `tol` bounds the local error per unit time.
VectorXc expv(double t, const SparseOperator& A, const VectorXc& v, double tol = 1e-12, int krylov_dim = 30,
              ExpvStats* stats = nullptr);

}  // namespace kcm
