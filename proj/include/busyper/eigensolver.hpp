#pragma once

// Symmetric tridiagonal eigensolver: implicit-shift QL with full eigenvector
// accumulation.  Absolute eigenvalue accuracy ~eps*||T||; callers needing
// full relative precision on tiny eigenvalues refine afterwards (Sturm
// bisection / Newton on the LU pivot), see the spectral engine.

#include <vector>

namespace busyper {

struct TridiagEigen {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column-major: vectors[k + n*j] = component k of eigenvector j
    int n = 0;

    double vec(int k, int j) const { return vectors[k + std::size_t(n) * j]; }
};

// diag has n entries, offdiag n-1 (n >= 1).  Throws NumericError on
// non-convergence (iteration cap per eigenvalue).
TridiagEigen eig_tridiag(std::vector<double> diag, std::vector<double> offdiag);

// max |V^T V - I| entry, the orthonormality certificate
double orthonormality_residual(const TridiagEigen& e);

}  // namespace busyper
