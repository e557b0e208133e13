#pragma once

#include <stdexcept>
#include <string>

namespace qmpemba {

// Root of the engine's error hierarchy. Every failure the library signals is a
// subclass of this, so callers can catch one type at the boundary.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define QMPEMBA_ERROR_TYPE(NAME)                             \
    struct NAME : Error {                                    \
        explicit NAME(const std::string& what)               \
            : Error(std::string(#NAME) + ": " + what) {}     \
    };

// Vector/matrix shape disagreements, including dimensions outside the
// supported 1..16 range.
QMPEMBA_ERROR_TYPE(DimensionMismatch)
// The iterative eigensolver did not converge within its iteration budget.
QMPEMBA_ERROR_TYPE(NonConvergence)
// No biorthonormal eigenvector system reaches the residual tolerance
// (geometric multiplicity deficit).
QMPEMBA_ERROR_TYPE(DefectiveMatrix)
// Invalid integrator step size or time grid.
QMPEMBA_ERROR_TYPE(InvalidStep)
// The matrix has no eigenvalue within tolerance of zero, or the null vector
// cannot be trace-normalized.
QMPEMBA_ERROR_TYPE(NoNullSpace)
// A bath temperature is zero or negative.
QMPEMBA_ERROR_TYPE(NonPositiveTemperature)
// An occupation factor or closed-form denominator is too close to its
// singular value for the analytic expressions to be evaluated.
QMPEMBA_ERROR_TYPE(SingularOccupation)
// The state difference carries no usable weight in the two competing decay
// modes (identical states, or a difference proportional to (-1,1,1,-1)).
QMPEMBA_ERROR_TYPE(DegenerateDifference)
// Only the denominator mode amplitude vanishes; the criterion ratio is
// undefined.
QMPEMBA_ERROR_TYPE(DivisionBlocked)
// Operation called outside its supported parameter domain.
QMPEMBA_ERROR_TYPE(OutOfDomain)
// The two-site eigenmode splitting vanishes (omega1 = omega2 and delta = 0),
// leaving the rotation angle undefined.
QMPEMBA_ERROR_TYPE(DegenerateSpectrum)
// Input fails Hermiticity/positivity/trace checks for a density matrix.
QMPEMBA_ERROR_TYPE(NotADensityMatrix)
// Crossing detection received series on mismatched or invalid time grids.
QMPEMBA_ERROR_TYPE(GridMismatch)
// No sign-change bracket exists for a requested boundary point.
QMPEMBA_ERROR_TYPE(NoBracket)
// A scan over the allowed parameter window found no qualifying value.
QMPEMBA_ERROR_TYPE(NotFound)
// Configuration file or flag errors, with location diagnostics.
QMPEMBA_ERROR_TYPE(ConfigError)
// An internal cross-check between two supposedly equivalent computations
// failed; indicates a defect in the engine itself, not in user input.
QMPEMBA_ERROR_TYPE(InternalInconsistency)

#undef QMPEMBA_ERROR_TYPE

}  // namespace qmpemba
