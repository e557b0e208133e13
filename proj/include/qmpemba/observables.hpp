#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qmpemba/errors.hpp"
#include "qmpemba/twosite.hpp"

namespace qmpemba::obs {

// One point of an observable trajectory.
struct ObservableSample {
    double time = 0.0;
    double value = 0.0;
};

// Which site to keep when tracing out the other.
enum class Site { A, B };

// Two-qubit concurrence of a local-basis density matrix of the form
// produced by globalToLocal: 2*max(0, |rho23| - sqrt(rho11*rho44)).
// The input must be Hermitian with unit trace within 1e-6
// (NotADensityMatrix otherwise).
double concurrenceLocal(const Eigen::Matrix4cd& rhoLocal);

// Concurrence evaluated directly on energy-eigenbasis populations:
// 2*max(0, |p2 - p3|/2 - sqrt(p1*p4)). Valid only for coherence-free
// states of the symmetric system; throws OutOfDomain when the coherence is
// nonzero (route such states through concurrenceLocal instead).
double concurrenceEigenbasis(const twosite::TwoSiteState& state);

// Von Neumann entropy in bits: -tr(rho log2 rho). The matrix must be
// Hermitian within 1e-8 and its eigenvalues must be >= -1e-8 (smaller
// values throw NotADensityMatrix; small negatives are clamped to zero).
double vonNeumannEntropy(const Eigen::MatrixXcd& rho);

// Partial trace of a 4x4 local-basis density matrix down to one site.
// Basis ordering: (both occupied, site-A occupied, site-B occupied, empty).
Eigen::Matrix2cd reducedState(const Eigen::Matrix4cd& rhoLocal, Site site);

// Quantum mutual information in bits:
// S(rho_A) + S(rho_B) - S(rho_AB), nonnegative for valid states.
double quantumMutualInformation(const Eigen::Matrix4cd& rhoLocal);

}  // namespace qmpemba::obs
