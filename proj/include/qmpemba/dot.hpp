#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qmpemba/errors.hpp"
#include "qmpemba/linalg.hpp"

namespace qmpemba::dot {

// A pair of fermionic reservoirs characterized by chemical potentials and
// temperatures (energies in units of k_B T, rates in units of the base decay
// rate).
struct BathPair {
    double muLeft = 0.0;
    double muRight = 0.0;
    double tLeft = 1.0;
    double tRight = 1.0;
};

// Four-state dot parameters: on-site energy, Coulomb repulsion, overall decay
// rate, and the reservoirs driving relaxation.
struct DotParams {
    double epsilon0 = 0.0;
    double u = 0.0;
    double gamma = 1.0;
    BathPair relaxBaths;
};

// Summed reservoir occupations evaluated at the two addition energies:
// f0 at epsilon0 and f1 at epsilon0 + u. Both lie in (0, 2) at finite
// temperature, and f0 >= f1 whenever u >= 0 with shared baths.
struct OccupationFactors {
    double f0 = 1.0;
    double f1 = 1.0;
};

// Population state of the dot: (doubly occupied, spin-up, spin-down, empty).
using DotState = Eigen::Vector4d;

// Closed-form eigensystem of the dot transition matrix in base-rate units.
// Mode order: index 1 is the stationary mode (eigenvalue 0), index 2 decays
// at -(2 - f0 + f1), index 3 at -(2 + f0 - f1), index 4 at -4. Columns of
// `right` / rows of `left` follow the same order and satisfy left*right = I
// after the normalization pass.
struct DotSpectralData {
    std::array<double, 4> eigenvalues{};
    Eigen::Matrix4d right;
    Eigen::Matrix4d left;
};

// Value of the two-mode competition ratio S_n together with the window
// predicate -1 < S_n < 0 (the regime in which the slow and fast decaying
// modes force a population crossing at positive time).
struct CriterionResult {
    double value = 0.0;
    bool inWindow = false;
};

// Raw numerator and denominator of the criterion ratio,
// num = R(n,3) * da3 and den = R(n,4) * da4 with da = left * (rhoI - rhoII).
// Exposed separately so boundary tracing can root-find a smooth function.
struct CriterionParts {
    double num = 0.0;
    double den = 0.0;
};

// Sum of the two reservoirs' Fermi occupations at the given energy.
// Throws NonPositiveTemperature if either temperature is <= 0.
double fermiSum(double energy, const BathPair& baths);

// Occupation factors for the given parameters against an explicit bath pair.
OccupationFactors occupationFactors(const DotParams& params,
                                    const BathPair& baths);

// Occupation factors against the relaxation baths stored in params.
OccupationFactors occupationFactors(const DotParams& params);

// The 4x4 population-transition generator in base-rate units. Every column
// sums to zero (probability conservation).
Eigen::Matrix4d buildTransitionMatrix(const OccupationFactors& f);

// Closed-form spectral data. Requires f0 > 1e-12, f1 > 1e-12 and
// |f0 - f1| < 2 - 1e-12 (denominator guards); throws SingularOccupation
// otherwise. The left matrix is rescaled so left*right = I; if the pairing
// product is not diagonal, InternalInconsistency is thrown.
DotSpectralData analyticSpectralData(const OccupationFactors& f);

// Stationary state for the given baths (closed-form, trace-normalized).
DotState steadyState(const DotParams& params, const BathPair& baths);

// Initial-state preparation: the stationary state of the preparing baths.
DotState prepareInitialState(const DotParams& params,
                             const BathPair& preparingBaths);

// Spectral evolution of rho0 over the given times (nonnegative, strictly
// increasing). Uses the closed-form eigensystem; time is scaled by
// params.gamma.
std::vector<DotState> evolveDot(const DotParams& params, const DotState& rho0,
                                const std::vector<double>& times);

// Criterion numerator/denominator for component n (1-based).
CriterionParts criterionParts(const DotParams& params, const DotState& rhoI,
                              const DotState& rhoII, int n);

// The two-mode competition ratio S_n for component n. Throws
// DegenerateDifference when the difference carries no usable mode weight
// (identical states, a difference collinear with (-1,1,1,-1), or both mode
// products below 1e-12) and DivisionBlocked when only the denominator
// vanishes.
CriterionResult mpembaCriterion(const DotParams& params, const DotState& rhoI,
                                const DotState& rhoII, int n);

// First positive time at which the component-n trajectories of the two
// states cross. Uses the closed form ln(-1/S_n)/(lambda3 - lambda4) when
// S_n lies in (-1, 0) and the difference is spin-symmetric (da2 = 0);
// otherwise falls back to sampled sign-change bisection on (0, 50] in
// base-rate time units. Returns nullopt when no crossing exists.
std::optional<double> dotCrossingTime(const DotParams& params,
                                      const DotState& rhoI,
                                      const DotState& rhoII, int n);

}  // namespace qmpemba::dot
