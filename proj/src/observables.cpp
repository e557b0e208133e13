#include "qmpemba/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmpemba::obs {

namespace {

constexpr double kDensityTolerance = 1e-6;
constexpr double kHermitianTolerance = 1e-8;
constexpr double kEigenvalueFloor = -1e-8;

double hermitianDefect(const Eigen::MatrixXcd& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void checkDensityMatrix(const Eigen::Matrix4cd& rho, const char* label) {
    const double defect = hermitianDefect(rho);
    if (defect > kDensityTolerance) {
        throw NotADensityMatrix(std::string(label) +
                                ": Hermiticity defect " +
                                std::to_string(defect) + " exceeds 1e-6");
    }
    const std::complex<double> tr = rho.trace();
    if (std::abs(tr - std::complex<double>(1.0, 0.0)) > kDensityTolerance) {
        throw NotADensityMatrix(std::string(label) + ": trace " +
                                std::to_string(tr.real()) +
                                " differs from 1 beyond 1e-6");
    }
}

}  // namespace

double concurrenceLocal(const Eigen::Matrix4cd& rhoLocal) {
    checkDensityMatrix(rhoLocal, "concurrence input");
    const double offdiag = std::abs(rhoLocal(1, 2));
    const double p1 = std::max(0.0, rhoLocal(0, 0).real());
    const double p4 = std::max(0.0, rhoLocal(3, 3).real());
    return 2.0 * std::max(0.0, offdiag - std::sqrt(p1 * p4));
}

double concurrenceEigenbasis(const twosite::TwoSiteState& state) {
    if (state.coherence != std::complex<double>(0.0, 0.0)) {
        throw OutOfDomain(
            "the eigenbasis concurrence formula assumes a vanishing "
            "coherence; use the local-basis route for coherent states");
    }
    const Eigen::Vector4d& p = state.populations;
    const double imbalance = 0.5 * std::abs(p(1) - p(2));
    const double corners =
        std::sqrt(std::max(0.0, p(0)) * std::max(0.0, p(3)));
    return 2.0 * std::max(0.0, imbalance - corners);
}

double vonNeumannEntropy(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 1) {
        throw DimensionMismatch("entropy input must be a square matrix");
    }
    const double defect = hermitianDefect(rho);
    if (defect > kHermitianTolerance) {
        throw NotADensityMatrix("entropy input: Hermiticity defect " +
                                std::to_string(defect) + " exceeds 1e-8");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
    if (solver.info() != Eigen::Success) {
        throw NonConvergence("Hermitian eigenvalue solve failed");
    }
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        const double p = solver.eigenvalues()(i);
        if (p < kEigenvalueFloor) {
            throw NotADensityMatrix("entropy input has eigenvalue " +
                                    std::to_string(p) +
                                    " below the -1e-8 floor");
        }
        if (p > 0.0) {
            entropy -= p * std::log2(p);
        }
    }
    return std::max(0.0, entropy);
}

Eigen::Matrix2cd reducedState(const Eigen::Matrix4cd& rhoLocal, Site site) {
    checkDensityMatrix(rhoLocal, "partial-trace input");
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
    if (site == Site::A) {
        r(0, 0) = rhoLocal(0, 0) + rhoLocal(1, 1);
        r(1, 1) = rhoLocal(2, 2) + rhoLocal(3, 3);
        r(0, 1) = rhoLocal(0, 2) + rhoLocal(1, 3);
    } else {
        r(0, 0) = rhoLocal(0, 0) + rhoLocal(2, 2);
        r(1, 1) = rhoLocal(1, 1) + rhoLocal(3, 3);
        r(0, 1) = rhoLocal(0, 1) + rhoLocal(2, 3);
    }
    r(1, 0) = std::conj(r(0, 1));
    return r;
}

double quantumMutualInformation(const Eigen::Matrix4cd& rhoLocal) {
    const Eigen::Matrix2cd a = reducedState(rhoLocal, Site::A);
    const Eigen::Matrix2cd b = reducedState(rhoLocal, Site::B);
    return vonNeumannEntropy(a) + vonNeumannEntropy(b) -
           vonNeumannEntropy(rhoLocal);
}

}  // namespace qmpemba::obs
