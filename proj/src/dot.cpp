#include "qmpemba/dot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmpemba::dot {

namespace {

constexpr double kOccupationFloor = 1e-12;
constexpr double kModeFloor = 1e-12;
constexpr double kCollinearTolerance = 1e-10;
constexpr double kPairingTolerance = 1e-9;
constexpr double kHorizonBase = 50.0;  // in base-rate time units
constexpr int kScanSamples = 2000;

double fermi(double x) { return 1.0 / (1.0 + std::exp(x)); }

void checkState(const DotState& rho, const char* label) {
    if (!rho.allFinite()) {
        throw DimensionMismatch(std::string(label) +
                                " has non-finite entries");
    }
}

void checkComponent(int n) {
    if (n < 1 || n > 4) {
        throw DimensionMismatch("component index must lie in 1..4, got " +
                                std::to_string(n));
    }
}

// Mode weights of the difference rhoI - rhoII as seen by component n:
// contribution i decays at eigenvalue lambda_i and enters component n with
// amplitude right(n,i) * (left * diff)(i).
struct ModeWeights {
    std::array<double, 4> amplitude{};  // right(n,i) * da_i
    std::array<double, 4> rate{};       // eigenvalues, base-rate units
};

ModeWeights modeWeights(const DotSpectralData& data, const DotState& diff,
                        int n) {
    const Eigen::Vector4d da = data.left * diff;
    ModeWeights w;
    for (int i = 0; i < 4; ++i) {
        w.amplitude[i] = data.right(n - 1, i) * da(i);
        w.rate[i] = data.eigenvalues[i];
    }
    return w;
}

double componentDifference(const ModeWeights& w, double t) {
    double d = 0.0;
    for (int i = 0; i < 4; ++i) {
        d += w.amplitude[i] * std::exp(w.rate[i] * t);
    }
    return d;
}

}  // namespace

double fermiSum(double energy, const BathPair& baths) {
    if (!(baths.tLeft > 0.0) || !(baths.tRight > 0.0)) {
        throw NonPositiveTemperature(
            "bath temperatures must be positive, got tLeft=" +
            std::to_string(baths.tLeft) +
            " tRight=" + std::to_string(baths.tRight));
    }
    return fermi((energy - baths.muLeft) / baths.tLeft) +
           fermi((energy - baths.muRight) / baths.tRight);
}

OccupationFactors occupationFactors(const DotParams& params,
                                    const BathPair& baths) {
    OccupationFactors f;
    f.f0 = fermiSum(params.epsilon0, baths);
    f.f1 = fermiSum(params.epsilon0 + params.u, baths);
    return f;
}

OccupationFactors occupationFactors(const DotParams& params) {
    return occupationFactors(params, params.relaxBaths);
}

Eigen::Matrix4d buildTransitionMatrix(const OccupationFactors& f) {
    const double f0 = f.f0;
    const double f1 = f.f1;
    Eigen::Matrix4d m;
    m << -2.0 * (2.0 - f1), f1, f1, 0.0,                      //
        2.0 - f1, -2.0 + f0 - f1, 0.0, f0,                    //
        2.0 - f1, 0.0, -2.0 + f0 - f1, f0,                    //
        0.0, 2.0 - f0, 2.0 - f0, -2.0 * f0;
    return m;
}

DotSpectralData analyticSpectralData(const OccupationFactors& f) {
    const double f0 = f.f0;
    const double f1 = f.f1;
    if (!(f0 > kOccupationFloor) || !(f1 > kOccupationFloor)) {
        throw SingularOccupation(
            "occupation factors must exceed 1e-12, got f0=" +
            std::to_string(f0) + " f1=" + std::to_string(f1));
    }
    if (!(std::abs(f0 - f1) < 2.0 - kOccupationFloor)) {
        throw SingularOccupation(
            "|f0 - f1| too close to 2; mode denominators vanish (f0=" +
            std::to_string(f0) + " f1=" + std::to_string(f1) + ")");
    }

    DotSpectralData data;
    data.eigenvalues = {0.0, -(2.0 - f0 + f1), -(2.0 + f0 - f1), -4.0};

    const double d2 = 4.0 + 2.0 * (f0 - f1);
    const double d3 = (f0 - f1) * (f0 - f1) - 4.0;  // negative on the domain
    const double d4 = 4.0 - 2.0 * (f0 - f1);

    Eigen::Matrix4d r;
    r << f0 * f1 / d2, 0.0, 2.0 * f0 * f1 / d3, f0 * f1 / d4,              //
        f0 * (2.0 - f1) / d2, -0.5, f0 * (2.0 - f0 - f1) / d3,             //
        -f0 * f1 / d4,                                                     //
        f0 * (2.0 - f1) / d2, 0.5, f0 * (2.0 - f0 - f1) / d3,              //
        -f0 * f1 / d4,                                                     //
        (2.0 - f0) * (2.0 - f1) / d2, 0.0, -2.0 * f0 * (2.0 - f0) / d3,    //
        f0 * f1 / d4;

    Eigen::Matrix4d l;
    l << 1.0, 1.0, 1.0, 1.0,                                               //
        0.0, -1.0, 1.0, 0.0,                                               //
        -(2.0 - f1) / f0, -(2.0 - f0 - f1) / (2.0 * f0),                   //
        -(2.0 - f0 - f1) / (2.0 * f0), 1.0,                                //
        (2.0 - f0) * (2.0 - f1) / (f0 * f1), -(2.0 - f0) / f0,             //
        -(2.0 - f0) / f0, 1.0;

    // The closed forms fix each mode only up to scale; the pairing product
    // l * r must be diagonal, and its diagonal supplies the normalization.
    const Eigen::Matrix4d pairing = l * r;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i != j && std::abs(pairing(i, j)) > kPairingTolerance) {
                throw InternalInconsistency(
                    "left/right mode pairing is not diagonal at (" +
                    std::to_string(i) + "," + std::to_string(j) +
                    "): " + std::to_string(pairing(i, j)));
            }
        }
    }
    for (int i = 0; i < 4; ++i) {
        const double scale = pairing(i, i);
        if (std::abs(scale) < kOccupationFloor) {
            throw InternalInconsistency(
                "left/right mode pairing has a vanishing diagonal entry");
        }
        l.row(i) /= scale;
    }

    data.right = r;
    data.left = l;
    return data;
}

DotState steadyState(const DotParams& params, const BathPair& baths) {
    const OccupationFactors f = occupationFactors(params, baths);
    const DotSpectralData data = analyticSpectralData(f);
    DotState p = data.right.col(0);
    const double total = p.sum();
    if (!(std::abs(total) > kOccupationFloor)) {
        throw InternalInconsistency("stationary column has vanishing trace");
    }
    return p / total;
}

DotState prepareInitialState(const DotParams& params,
                             const BathPair& preparingBaths) {
    return steadyState(params, preparingBaths);
}

std::vector<DotState> evolveDot(const DotParams& params, const DotState& rho0,
                                const std::vector<double>& times) {
    checkState(rho0, "initial state");
    if (!(params.gamma > 0.0)) {
        throw InvalidStep("decay rate gamma must be positive, got " +
                          std::to_string(params.gamma));
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) {
            throw InvalidStep("times must be nonnegative");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw InvalidStep("times must be strictly increasing");
        }
    }

    const OccupationFactors f = occupationFactors(params);
    const DotSpectralData data = analyticSpectralData(f);
    const Eigen::Vector4d alpha = data.left * rho0;

    std::vector<DotState> out;
    out.reserve(times.size());
    for (double t : times) {
        DotState p = DotState::Zero();
        for (int i = 0; i < 4; ++i) {
            p += std::exp(data.eigenvalues[i] * params.gamma * t) * alpha(i) *
                 data.right.col(i);
        }
        out.push_back(p);
    }
    return out;
}

CriterionParts criterionParts(const DotParams& params, const DotState& rhoI,
                              const DotState& rhoII, int n) {
    checkComponent(n);
    checkState(rhoI, "first state");
    checkState(rhoII, "second state");
    const OccupationFactors f = occupationFactors(params);
    const DotSpectralData data = analyticSpectralData(f);
    const Eigen::Vector4d da = data.left * (rhoI - rhoII);
    CriterionParts parts;
    parts.num = data.right(n - 1, 2) * da(2);
    parts.den = data.right(n - 1, 3) * da(3);
    return parts;
}

CriterionResult mpembaCriterion(const DotParams& params, const DotState& rhoI,
                                const DotState& rhoII, int n) {
    checkComponent(n);
    checkState(rhoI, "first state");
    checkState(rhoII, "second state");
    const Eigen::Vector4d diff = rhoI - rhoII;
    const double diffNorm = diff.norm();
    if (!(diffNorm > 0.0)) {
        throw DegenerateDifference("the two states are identical");
    }
    // A difference proportional to (-1, 1, 1, -1) carries no weight in the
    // slow mode: the ratio is identically zero by construction, not by
    // dynamics, so it is rejected rather than reported.
    static const Eigen::Vector4d axis(-1.0, 1.0, 1.0, -1.0);
    const double projection = diff.dot(axis) / 4.0;
    const double residual = (diff - projection * axis).norm();
    if (residual <= kCollinearTolerance * diffNorm) {
        throw DegenerateDifference(
            "state difference is collinear with (-1, 1, 1, -1)");
    }

    const CriterionParts parts = criterionParts(params, rhoI, rhoII, n);
    if (std::abs(parts.num) <= kModeFloor &&
        std::abs(parts.den) <= kModeFloor) {
        throw DegenerateDifference(
            "both competing mode amplitudes vanish for component " +
            std::to_string(n));
    }
    if (std::abs(parts.den) <= kModeFloor) {
        throw DivisionBlocked(
            "fast-mode amplitude vanishes for component " + std::to_string(n) +
            "; the ratio is unbounded");
    }
    CriterionResult result;
    result.value = parts.num / parts.den;
    result.inWindow = result.value > -1.0 && result.value < 0.0;
    return result;
}

std::optional<double> dotCrossingTime(const DotParams& params,
                                      const DotState& rhoI,
                                      const DotState& rhoII, int n) {
    checkComponent(n);
    checkState(rhoI, "first state");
    checkState(rhoII, "second state");
    if (!(params.gamma > 0.0)) {
        throw InvalidStep("decay rate gamma must be positive, got " +
                          std::to_string(params.gamma));
    }
    const OccupationFactors f = occupationFactors(params);
    const DotSpectralData data = analyticSpectralData(f);
    const Eigen::Vector4d diff = rhoI - rhoII;
    const ModeWeights w = modeWeights(data, diff, n);

    const double c2 = w.amplitude[1];
    const double c3 = w.amplitude[2];
    const double c4 = w.amplitude[3];
    if (std::abs(c2) <= kModeFloor && std::abs(c3) <= kModeFloor &&
        std::abs(c4) <= kModeFloor) {
        return std::nullopt;  // trajectories coincide in this component
    }

    if (std::abs(c2) <= kModeFloor) {
        // Pure two-mode competition: the difference is
        // c4 e^{l4 t} (S e^{(l3-l4) t} + 1) with S = c3/c4, so a positive
        // root exists exactly when S lies in (-1, 0).
        if (std::abs(c3) <= kModeFloor || std::abs(c4) <= kModeFloor) {
            return std::nullopt;  // a single exponential never changes sign
        }
        const double s = c3 / c4;
        if (s > -1.0 && s < 0.0) {
            const double gap = w.rate[2] - w.rate[3];  // = 2 - f0 + f1 > 0
            return std::log(-1.0 / s) / (gap * params.gamma);
        }
        return std::nullopt;
    }

    // Three competing modes: locate the first sign change on a sampled grid
    // and refine it by bisection. Times below are in base-rate units.
    const double horizon = kHorizonBase;
    double prevT = 0.0;
    double prevD = componentDifference(w, 0.0);
    int prevSign = (prevD > 0.0) ? 1 : (prevD < 0.0 ? -1 : 0);
    for (int i = 1; i <= kScanSamples; ++i) {
        const double t = horizon * static_cast<double>(i) / kScanSamples;
        const double d = componentDifference(w, t);
        const int sign = (d > 0.0) ? 1 : (d < 0.0 ? -1 : 0);
        if (sign != 0 && prevSign == 0) {
            prevSign = sign;  // leading zeros (e.g. equal at t = 0) skipped
        } else if (sign != 0 && sign != prevSign) {
            double lo = prevT;
            double hi = t;
            double dLo = prevD;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                const double dMid = componentDifference(w, mid);
                if (dMid == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((dLo > 0.0) == (dMid > 0.0)) {
                    lo = mid;
                    dLo = dMid;
                } else {
                    hi = mid;
                }
                if (hi - lo <=
                    1e-15 * std::max(1.0, hi)) {
                    break;
                }
            }
            return 0.5 * (lo + hi) / params.gamma;
        }
        prevT = t;
        prevD = d;
        if (sign != 0) {
            prevSign = sign;
        }
    }
    return std::nullopt;
}

}  // namespace qmpemba::dot
