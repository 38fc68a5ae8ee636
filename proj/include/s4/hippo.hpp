#pragma once

#include "s4/common.hpp"

namespace s4 {

// Lower-triangular LegS transition matrix: diagonal -(k+1), strictly lower
// entries -sqrt(2n+1)sqrt(2k+1) (zero-based n, k).
struct HippoMatrix {
  int n = 0;
  RMatrix dense;
};

// A + p p^T = -I/2 + s with p_k = sqrt((2k+1)/2) and s skew-symmetric.
struct NplrParts {
  int n = 0;
  RVector p;
  RMatrix s;
};

// Diagonalized normal part: dynamics diag(lambda) - p q^* in the eigenbasis
// of s. q == p at initialization; it is kept separate because the general
// p q^* parameterization is exercised by validation tests. unitary holds V
// and is used only by tests.
struct DplrSystem {
  CVector lambda;
  CVector p;
  CVector q;
  CVector b;
  CMatrix c;  // channels x n
  CMatrix unitary;
};

HippoMatrix build_hippo(int n);
NplrParts nplr_decompose(const HippoMatrix& h);
DplrSystem to_dplr(const NplrParts& parts);

// diag(lambda) - p q^*, the dense form used by oracles.
CMatrix dplr_dense(const DplrSystem& sys);

}  // namespace s4
