#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qmpemba/errors.hpp"

namespace qmpemba::linalg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Eigenvalues with paired right/left eigenvector matrices of a square matrix.
// Columns of `right` are right eigenvectors, rows of `left` are left
// eigenvectors, scaled so that left * right = identity. Eigenvalues are
// sorted by descending real part, ties by ascending imaginary part, and
// remaining ties by the solver's original index, so identical inputs always
// produce identical orderings.
struct SpectralDecomposition {
    CVector eigenvalues;
    CMatrix right;
    CMatrix left;
    double residual = 0.0;  // max of the two defect norms below
};

// Residual tolerance shared by the decomposition invariants:
// max|M R - R diag| and max|L R - I| must both stay below this.
inline constexpr double kSpectralTolerance = 1e-9;

// Decomposes a square matrix (dimension 1..16) into a biorthonormal
// eigensystem. Throws DimensionMismatch for bad shapes or non-finite
// entries, NonConvergence if the QR iteration fails, and DefectiveMatrix if
// no biorthonormal system reaches the residual tolerance.
SpectralDecomposition eigendecompose(const CMatrix& m);

// Evolves state0 to time t as sum_i exp(lambda_i t) alpha_i v_i with
// alpha = left * state0. At t = 0 this reproduces state0 within 1e-12.
CVector propagate(const SpectralDecomposition& decomp, const CVector& state0,
                  double t);

// Mode amplitudes alpha = left * state0.
CVector modeCoefficients(const SpectralDecomposition& decomp,
                         const CVector& state0);

// Classical fixed-step fourth-order Runge-Kutta integration of
// d/dt x = apply(x), with the final partial step shortened to land exactly
// on tEnd. Serves as the independent oracle for spectral propagation.
CVector rk4Integrate(const std::function<CVector(const CVector&)>& apply,
                     const CVector& state0, double tEnd, double dt);

// Returns the eigenvector for the eigenvalue closest to zero (which must be
// within 1e-9 of zero), scaled so its components sum to 1.
CVector nullVector(const CMatrix& m);

}  // namespace qmpemba::linalg
