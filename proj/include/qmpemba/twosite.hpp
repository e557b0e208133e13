#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qmpemba/errors.hpp"
#include "qmpemba/linalg.hpp"

namespace qmpemba::twosite {

// A single fermionic reservoir: temperature and chemical potential.
struct Bath {
    double temperature = 1.0;
    double mu = 0.0;
};

// Two tunnel-coupled sites, each exchanging particles with its own bath.
struct TwoSiteParams {
    double omega1 = 0.0;  // site-1 energy
    double omega2 = 0.0;  // site-2 energy
    double delta = 0.0;   // inter-site tunneling amplitude
    double gamma1 = 1.0;  // site-1 decay rate (must be positive)
    double gamma2 = 1.0;  // site-2 decay rate (must be positive)
    Bath bath1;
    Bath bath2;
};

// Diagonalization data of the single-particle Hamiltonian: mixing angle and
// the two eigenmode energies, ordered omegaPrime1 >= omegaPrime2.
struct DerivedAngles {
    double theta = 0.0;
    double omegaPrime1 = 0.0;
    double omegaPrime2 = 0.0;
};

// Fermi factors of the eigenmodes against each bath:
// n[k][i] = Fermi(omegaPrime_{k+1}; bath_{i+1}) for k, i in {0, 1}.
struct OccupationTable {
    double n[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

enum class GeneratorMode { Lindblad, Redfield };

// Relaxation generator in the energy eigenbasis. Lindblad mode: a 4x4
// population matrix. Redfield mode: a 6x6 matrix over (populations,
// rho23, rho32) that couples populations to the coherence pair.
struct TwoSiteGenerator {
    GeneratorMode mode = GeneratorMode::Lindblad;
    linalg::CMatrix matrix;
};

// System state in the energy eigenbasis, components ordered by increasing
// energy: (empty, lower mode occupied, upper mode occupied, doubly
// occupied), plus the coherence rho23 between the two singly-occupied
// states.
struct TwoSiteState {
    Eigen::Vector4d populations = Eigen::Vector4d::Zero();
    std::complex<double> coherence = 0.0;
};

// Trajectory produced by evolveTwoSite. coherenceIgnored reports that a
// nonzero input coherence was dropped because the generator was population
// only; worstPopulationViolation records the largest excursion of any
// population outside [0, 1] seen along the trajectory (Redfield dynamics is
// not completely positive, so small excursions are monitored, not fatal).
struct EvolveResult {
    std::vector<TwoSiteState> states;
    bool coherenceIgnored = false;
    double worstPopulationViolation = 0.0;
};

// Decomposition of a population state over the relaxation modes of the
// symmetric population generator. alpha[i] pairs with rate[i]; the ordering
// is (-4*Gamma, -2*Gamma, -2*Gamma, 0). The strong condition holds when
// both slow-mode weights (indices 1 and 2) vanish within 1e-9, in which
// case relaxation proceeds at the fast rate alone.
struct StrongCoefficients {
    Eigen::Vector4d alpha = Eigen::Vector4d::Zero();
    std::array<double, 4> rates{};
    bool strongCondition = false;
};

// Mixing angle and eigenmode energies. Throws DegenerateSpectrum when
// omega1 == omega2 and delta == 0 (the angle is undefined there).
DerivedAngles deriveAngles(const TwoSiteParams& params);

// Fermi factors of both eigenmodes against both baths.
// Throws NonPositiveTemperature for a bath with T <= 0.
OccupationTable occupationTable(const TwoSiteParams& params);

// The scalar coupling between populations and the coherence pair. It is
// proportional to the occupation imbalance between the baths and vanishes
// when the baths are identical.
double coherenceCoupling(const TwoSiteParams& params);

// Assembles the relaxation generator for the requested mode. Population
// columns sum to zero in both modes, and the Redfield population block
// equals the Lindblad matrix.
TwoSiteGenerator buildGenerator(const TwoSiteParams& params,
                                GeneratorMode mode);

// Closed-form left-eigenvector rows of the symmetric population generator,
// ordered to pair with rates (-4*Gamma, -2*Gamma, -2*Gamma, 0). Requires
// the population-only description (OutOfDomain for Redfield) in the
// symmetric equal-rate case omega1 == omega2, gamma1 == gamma2
// (OutOfDomain otherwise).
Eigen::Matrix4d deltaMatrix(const TwoSiteParams& params,
                            GeneratorMode mode = GeneratorMode::Lindblad);

// Stationary state of the generator (unique null mode, trace-normalized).
TwoSiteState steadyState(const TwoSiteParams& params, GeneratorMode mode);

// Spectral evolution of state0 over the given times (nonnegative, strictly
// increasing). The input state must satisfy the density-matrix-like bounds
// (populations summing to 1, components within [-1e-6, 1+1e-6], coherence
// bounded by the geometric mean of its populations); violations throw
// NotADensityMatrix.
EvolveResult evolveTwoSite(const TwoSiteGenerator& gen,
                           const TwoSiteState& state0,
                           const std::vector<double>& times);

// Mode weights of a population state against the deltaMatrix rows, plus the
// strong-relaxation predicate. Same domain restrictions as deltaMatrix.
StrongCoefficients strongMpembaCoefficients(
    const TwoSiteParams& params, const TwoSiteState& state0,
    GeneratorMode mode = GeneratorMode::Lindblad);

// Transformation of an energy-eigenbasis state to the 4x4 density matrix in
// the local (site) basis, valid for symmetric sites omega1 == omega2
// (OutOfDomain otherwise). Trace and Hermiticity are preserved.
Eigen::Matrix4cd globalToLocal(const TwoSiteParams& params,
                               const TwoSiteState& state);

// Inverse of globalToLocal for matrices of its image form.
TwoSiteState localToGlobal(const Eigen::Matrix4cd& local);

// Checks the density-matrix-like bounds on a state; throws
// NotADensityMatrix with a description of the first violated bound.
void validateTwoSiteState(const TwoSiteState& state);

}  // namespace qmpemba::twosite
