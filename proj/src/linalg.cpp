#include "qmpemba/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmpemba::linalg {

namespace {

void checkSquareSmall(const CMatrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("matrix must be square, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
    }
    if (m.rows() < 1 || m.rows() > 16) {
        throw DimensionMismatch("matrix dimension must be in 1..16, got " +
                                std::to_string(m.rows()));
    }
    if (!m.allFinite()) {
        throw DimensionMismatch("matrix contains non-finite entries");
    }
}

}  // namespace

SpectralDecomposition eigendecompose(const CMatrix& m) {
    checkSquareSmall(m);
    const auto n = m.rows();

    Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() == Eigen::NoConvergence) {
        throw NonConvergence("eigenvalue iteration did not converge");
    }
    if (solver.info() != Eigen::Success) {
        throw NonConvergence("eigenvalue solver failed");
    }

    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const CVector& raw = solver.eigenvalues();
    std::sort(order.begin(), order.end(),
              [&raw](Eigen::Index a, Eigen::Index b) {
                  if (raw[a].real() != raw[b].real()) {
                      return raw[a].real() > raw[b].real();
                  }
                  if (raw[a].imag() != raw[b].imag()) {
                      return raw[a].imag() < raw[b].imag();
                  }
                  return a < b;
              });

    SpectralDecomposition out;
    out.eigenvalues.resize(n);
    out.right.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues[i] = raw[order[static_cast<size_t>(i)]];
        out.right.col(i) = solver.eigenvectors().col(order[static_cast<size_t>(i)]);
    }

    Eigen::PartialPivLU<CMatrix> lu(out.right);
    out.left = lu.solve(CMatrix::Identity(n, n));
    if (!out.left.allFinite()) {
        throw DefectiveMatrix(
            "right eigenvectors are not invertible; no biorthonormal system");
    }

    const double defectRight =
        (m * out.right - out.right * out.eigenvalues.asDiagonal())
            .cwiseAbs()
            .maxCoeff();
    const double defectPairing =
        (out.left * out.right - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    // Reconstruction defect. A defective matrix can slip past the first two
    // checks when the solver pads the basis with a nearly parallel column:
    // the column residuals stay tiny while the inverse blows up. Demanding
    // right * diag * left == m rules that out, because a spurious basis
    // cannot reproduce the nilpotent part.
    const double defectReconstruct =
        (out.right * out.eigenvalues.asDiagonal() * out.left - m)
            .cwiseAbs()
            .maxCoeff();
    out.residual =
        std::max(defectRight, std::max(defectPairing, defectReconstruct));
    if (!(out.residual <= kSpectralTolerance)) {
        throw DefectiveMatrix("no biorthonormal system reaches residual " +
                              std::to_string(kSpectralTolerance) +
                              " (got " + std::to_string(out.residual) + ")");
    }
    return out;
}

CVector propagate(const SpectralDecomposition& decomp, const CVector& state0,
                  double t) {
    if (state0.size() != decomp.eigenvalues.size()) {
        throw DimensionMismatch("state dimension " +
                                std::to_string(state0.size()) +
                                " does not match decomposition dimension " +
                                std::to_string(decomp.eigenvalues.size()));
    }
    CVector alpha = decomp.left * state0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        alpha[i] *= std::exp(decomp.eigenvalues[i] * t);
    }
    return decomp.right * alpha;
}

CVector modeCoefficients(const SpectralDecomposition& decomp,
                         const CVector& state0) {
    if (state0.size() != decomp.eigenvalues.size()) {
        throw DimensionMismatch("state dimension " +
                                std::to_string(state0.size()) +
                                " does not match decomposition dimension " +
                                std::to_string(decomp.eigenvalues.size()));
    }
    return decomp.left * state0;
}

CVector rk4Integrate(const std::function<CVector(const CVector&)>& apply,
                     const CVector& state0, double tEnd, double dt) {
    if (tEnd == 0.0) {
        return state0;
    }
    if (!(tEnd > 0.0)) {
        throw InvalidStep("tEnd must be nonnegative");
    }
    if (!(dt > 0.0)) {
        throw InvalidStep("dt must be positive");
    }

    const auto step = [&apply](CVector& x, double h) {
        const CVector k1 = apply(x);
        const CVector k2 = apply(x + (h / 2.0) * k1);
        const CVector k3 = apply(x + (h / 2.0) * k2);
        const CVector k4 = apply(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    CVector x = state0;
    const auto fullSteps =
        static_cast<long long>(std::floor(tEnd / dt + 1e-12));
    for (long long i = 0; i < fullSteps; ++i) {
        step(x, dt);
    }
    const double remainder = tEnd - static_cast<double>(fullSteps) * dt;
    if (remainder > 1e-15 * std::max(1.0, tEnd)) {
        step(x, remainder);
    }
    return x;
}

CVector nullVector(const CMatrix& m) {
    const SpectralDecomposition decomp = eigendecompose(m);
    Eigen::Index best = 0;
    double bestAbs = std::abs(decomp.eigenvalues[0]);
    for (Eigen::Index i = 1; i < decomp.eigenvalues.size(); ++i) {
        const double a = std::abs(decomp.eigenvalues[i]);
        if (a < bestAbs) {
            bestAbs = a;
            best = i;
        }
    }
    if (bestAbs > kSpectralTolerance) {
        throw NoNullSpace("smallest eigenvalue magnitude " +
                          std::to_string(bestAbs) + " exceeds tolerance");
    }
    CVector v = decomp.right.col(best);
    const Complex total = v.sum();
    if (std::abs(total) < 1e-12) {
        throw NoNullSpace("null vector cannot be trace-normalized");
    }
    return v / total;
}

}  // namespace qmpemba::linalg
