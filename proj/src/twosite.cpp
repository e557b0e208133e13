#include "qmpemba/twosite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmpemba::twosite {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kTraceTolerance = 1e-9;
constexpr double kComponentSlack = 1e-6;
constexpr double kStrongTolerance = 1e-9;

double fermi(double energy, const Bath& bath) {
    return 1.0 / (1.0 + std::exp((energy - bath.mu) / bath.temperature));
}

void checkParams(const TwoSiteParams& p) {
    if (!(p.gamma1 > 0.0) || !(p.gamma2 > 0.0)) {
        throw OutOfDomain("decay rates must be positive, got gamma1=" +
                          std::to_string(p.gamma1) +
                          " gamma2=" + std::to_string(p.gamma2));
    }
    if (!std::isfinite(p.omega1) || !std::isfinite(p.omega2) ||
        !std::isfinite(p.delta)) {
        throw OutOfDomain("site energies and tunneling must be finite");
    }
}

// Population-relaxation matrix in the internal mode ordering
// (empty, upper mode, lower mode, double); the public basis orders the two
// singly-occupied components by increasing energy, i.e. swaps rows/columns
// 2 and 3 of this block.
Eigen::Matrix4d populationBlockModeOrdered(const TwoSiteParams& p,
                                           double& cOut) {
    const DerivedAngles ang = deriveAngles(p);
    const OccupationTable n = occupationTable(p);
    const double s2 = std::sin(ang.theta / 2.0) * std::sin(ang.theta / 2.0);
    const double c2 = std::cos(ang.theta / 2.0) * std::cos(ang.theta / 2.0);
    const double g1 = p.gamma1;
    const double g2 = p.gamma2;
    const double a1 = g1 * (s2 * n.n[0][0] + c2 * n.n[0][1]);
    const double a2 = g2 * (c2 * n.n[1][0] + s2 * n.n[1][1]);

    const double m11_11 = -2.0 * (a1 + a2);
    const double m11_22 = 2.0 * g1 - 2.0 * a1;
    const double m11_33 = 2.0 * g2 - 2.0 * a2;
    const double m22_11 = -m11_22 + 2.0 * g1;
    const double m22_22 = -m11_22 + m11_33 - 2.0 * g2;
    const double m22_44 = m11_33;
    const double m33_11 = 2.0 * a2;
    const double m33_33 = m11_22 - 2.0 * g1 - m11_33;
    const double m33_44 = m11_22;
    const double m44_22 = m33_11;
    const double m44_33 = m22_11;
    const double m44_44 = -m11_22 - m11_33;

    Eigen::Matrix4d m;
    m << m11_11, m11_22, m11_33, 0.0,  //
        m22_11, m22_22, 0.0, m22_44,   //
        m33_11, 0.0, m33_33, m33_44,   //
        0.0, m44_22, m44_33, m44_44;

    const double sc = std::sin(ang.theta / 2.0) * std::cos(ang.theta / 2.0);
    cOut = -sc * (g1 * (n.n[0][0] - n.n[0][1]) + g2 * (n.n[1][0] - n.n[1][1]));
    return m;
}

Eigen::Matrix4d swapMiddle(const Eigen::Matrix4d& m) {
    Eigen::Matrix4d out = m;
    out.row(1).swap(out.row(2));
    out.col(1).swap(out.col(2));
    return out;
}

void requireSymmetricEqualRates(const TwoSiteParams& p, GeneratorMode mode,
                                const char* what) {
    if (mode == GeneratorMode::Redfield) {
        throw OutOfDomain(std::string(what) +
                          " is defined for the population-only description; "
                          "coherence-coupled mode is outside its domain");
    }
    if (std::abs(p.omega1 - p.omega2) > kSymmetryTolerance) {
        throw OutOfDomain(std::string(what) +
                          " requires equal site energies, got omega1=" +
                          std::to_string(p.omega1) +
                          " omega2=" + std::to_string(p.omega2));
    }
    if (std::abs(p.gamma1 - p.gamma2) > kSymmetryTolerance) {
        throw OutOfDomain(std::string(what) +
                          " requires equal decay rates, got gamma1=" +
                          std::to_string(p.gamma1) +
                          " gamma2=" + std::to_string(p.gamma2));
    }
}

}  // namespace

DerivedAngles deriveAngles(const TwoSiteParams& params) {
    checkParams(params);
    const double diff = params.omega1 - params.omega2;
    const double disc =
        std::sqrt(diff * diff + 4.0 * params.delta * params.delta);
    if (disc == 0.0) {
        throw DegenerateSpectrum(
            "equal site energies with zero tunneling leave the mixing angle "
            "undefined");
    }
    DerivedAngles ang;
    ang.theta = std::acos((params.omega2 - params.omega1) / disc);
    ang.omegaPrime1 = 0.5 * (params.omega1 + params.omega2 + disc);
    ang.omegaPrime2 = 0.5 * (params.omega1 + params.omega2 - disc);
    return ang;
}

OccupationTable occupationTable(const TwoSiteParams& params) {
    if (!(params.bath1.temperature > 0.0) ||
        !(params.bath2.temperature > 0.0)) {
        throw NonPositiveTemperature(
            "bath temperatures must be positive, got T1=" +
            std::to_string(params.bath1.temperature) +
            " T2=" + std::to_string(params.bath2.temperature));
    }
    const DerivedAngles ang = deriveAngles(params);
    OccupationTable t;
    t.n[0][0] = fermi(ang.omegaPrime1, params.bath1);
    t.n[0][1] = fermi(ang.omegaPrime1, params.bath2);
    t.n[1][0] = fermi(ang.omegaPrime2, params.bath1);
    t.n[1][1] = fermi(ang.omegaPrime2, params.bath2);
    return t;
}

double coherenceCoupling(const TwoSiteParams& params) {
    double c = 0.0;
    (void)populationBlockModeOrdered(params, c);
    return c;
}

TwoSiteGenerator buildGenerator(const TwoSiteParams& params,
                                GeneratorMode mode) {
    double c = 0.0;
    const Eigen::Matrix4d block = swapMiddle(populationBlockModeOrdered(params, c));

    TwoSiteGenerator gen;
    gen.mode = mode;
    if (mode == GeneratorMode::Lindblad) {
        gen.matrix = block.cast<linalg::Complex>();
        return gen;
    }

    const DerivedAngles ang = deriveAngles(params);
    const linalg::Complex decay(-params.gamma1 - params.gamma2,
                                ang.omegaPrime1 - ang.omegaPrime2);
    linalg::CMatrix g = linalg::CMatrix::Zero(6, 6);
    g.topLeftCorner<4, 4>() = block.cast<linalg::Complex>();
    const Eigen::Vector4d axis(1.0, -1.0, -1.0, 1.0);
    g.col(4).head<4>() = (c * axis).cast<linalg::Complex>();
    g.col(5).head<4>() = (c * axis).cast<linalg::Complex>();
    g.row(4).head<4>().setConstant(linalg::Complex(-c, 0.0));
    g.row(5).head<4>().setConstant(linalg::Complex(-c, 0.0));
    g(4, 4) = decay;
    g(5, 5) = std::conj(decay);
    gen.matrix = g;
    return gen;
}

Eigen::Matrix4d deltaMatrix(const TwoSiteParams& params, GeneratorMode mode) {
    requireSymmetricEqualRates(params, mode, "the mode-weight matrix");
    const OccupationTable t = occupationTable(params);
    const double n1p = t.n[0][0] + t.n[0][1];
    const double n2p = t.n[1][0] + t.n[1][1];

    Eigen::Matrix4d d;
    d << 0.25 * n1p * n2p, 0.25 * (n1p - 2.0) * n2p,
        0.25 * n1p * (n2p - 2.0), 0.25 * (n1p - 2.0) * (n2p - 2.0),  //
        -0.5 * n1p * n2p, -0.5 * (n1p - 1.0) * n2p, -0.5 * n1p * (n2p - 1.0),
        0.5 * (-n2p * n1p + n1p + n2p),  //
        0.5 * (n1p - 1.0) * n2p, 0.5 * (n1p - 2.0) * n2p,
        0.5 * (n1p * (n2p - 1.0) - n2p + 2.0),
        0.5 * (n1p - 2.0) * (n2p - 1.0),  //
        0.25 * n1p * n2p, 0.25 * n1p * n2p, 0.25 * n1p * n2p,
        0.25 * n1p * n2p;

    // The rows are written against the internal mode ordering; swapping the
    // middle columns re-expresses them over the energy-ordered components.
    d.col(1).swap(d.col(2));
    return d;
}

TwoSiteState steadyState(const TwoSiteParams& params, GeneratorMode mode) {
    const TwoSiteGenerator gen = buildGenerator(params, mode);
    const linalg::SpectralDecomposition decomp =
        linalg::eigendecompose(gen.matrix);
    int best = 0;
    double bestAbs = std::abs(decomp.eigenvalues(0));
    for (int i = 1; i < decomp.eigenvalues.size(); ++i) {
        const double a = std::abs(decomp.eigenvalues(i));
        if (a < bestAbs) {
            bestAbs = a;
            best = i;
        }
    }
    if (bestAbs > 1e-9) {
        throw NoNullSpace("no stationary mode: smallest eigenvalue modulus " +
                          std::to_string(bestAbs));
    }
    linalg::CVector v = decomp.right.col(best);
    const linalg::Complex popSum = v.head<4>().sum();
    if (std::abs(popSum) < 1e-12) {
        throw NoNullSpace("stationary mode carries no population weight");
    }
    v /= popSum;

    TwoSiteState state;
    for (int i = 0; i < 4; ++i) {
        if (std::abs(v(i).imag()) > kTraceTolerance) {
            throw InternalInconsistency(
                "stationary populations have an imaginary residue of " +
                std::to_string(v(i).imag()));
        }
        state.populations(i) = v(i).real();
    }
    if (mode == GeneratorMode::Redfield) {
        state.coherence = 0.5 * (v(4) + std::conj(v(5)));
    }
    return state;
}

void validateTwoSiteState(const TwoSiteState& state) {
    if (!state.populations.allFinite() ||
        !std::isfinite(state.coherence.real()) ||
        !std::isfinite(state.coherence.imag())) {
        throw NotADensityMatrix("state has non-finite entries");
    }
    const double total = state.populations.sum();
    if (std::abs(total - 1.0) > kTraceTolerance) {
        throw NotADensityMatrix("populations sum to " + std::to_string(total) +
                                ", expected 1 within 1e-9");
    }
    for (int i = 0; i < 4; ++i) {
        if (state.populations(i) < -kComponentSlack ||
            state.populations(i) > 1.0 + kComponentSlack) {
            throw NotADensityMatrix(
                "population component " + std::to_string(i + 1) + " = " +
                std::to_string(state.populations(i)) + " is out of [0, 1]");
        }
    }
    const double bound =
        std::sqrt(std::max(0.0, state.populations(1)) *
                  std::max(0.0, state.populations(2))) +
        kComponentSlack;
    if (std::abs(state.coherence) > bound) {
        throw NotADensityMatrix(
            "coherence modulus " + std::to_string(std::abs(state.coherence)) +
            " exceeds the bound set by its populations");
    }
}

EvolveResult evolveTwoSite(const TwoSiteGenerator& gen,
                           const TwoSiteState& state0,
                           const std::vector<double>& times) {
    validateTwoSiteState(state0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) {
            throw InvalidStep("times must be nonnegative");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw InvalidStep("times must be strictly increasing");
        }
    }
    const Eigen::Index dim = gen.matrix.rows();
    const bool full = (gen.mode == GeneratorMode::Redfield);
    if ((full && dim != 6) || (!full && dim != 4)) {
        throw DimensionMismatch("generator matrix has dimension " +
                                std::to_string(dim) +
                                ", inconsistent with its mode");
    }

    EvolveResult result;
    if (!full && std::abs(state0.coherence) > 0.0) {
        result.coherenceIgnored = true;
    }

    linalg::CVector v0(dim);
    v0.head<4>() = state0.populations.cast<linalg::Complex>();
    if (full) {
        v0(4) = state0.coherence;
        v0(5) = std::conj(state0.coherence);
    }

    const linalg::SpectralDecomposition decomp =
        linalg::eigendecompose(gen.matrix);
    result.states.reserve(times.size());
    for (double t : times) {
        const linalg::CVector v = linalg::propagate(decomp, v0, t);
        TwoSiteState s;
        for (int i = 0; i < 4; ++i) {
            s.populations(i) = v(i).real();
            const double violation = std::max(-s.populations(i),
                                              s.populations(i) - 1.0);
            result.worstPopulationViolation =
                std::max(result.worstPopulationViolation, violation);
        }
        if (full) {
            s.coherence = 0.5 * (v(4) + std::conj(v(5)));
        }
        result.states.push_back(s);
    }
    return result;
}

StrongCoefficients strongMpembaCoefficients(const TwoSiteParams& params,
                                            const TwoSiteState& state0,
                                            GeneratorMode mode) {
    const Eigen::Matrix4d d = deltaMatrix(params, mode);
    validateTwoSiteState(state0);
    StrongCoefficients out;
    out.alpha = d * state0.populations;
    const double g = params.gamma1;
    out.rates = {-4.0 * g, -2.0 * g, -2.0 * g, 0.0};
    out.strongCondition = std::abs(out.alpha(1)) <= kStrongTolerance &&
                          std::abs(out.alpha(2)) <= kStrongTolerance;
    return out;
}

Eigen::Matrix4cd globalToLocal(const TwoSiteParams& params,
                               const TwoSiteState& state) {
    if (std::abs(params.omega1 - params.omega2) > kSymmetryTolerance) {
        throw OutOfDomain(
            "the local-basis transformation requires equal site energies, "
            "got omega1=" +
            std::to_string(params.omega1) +
            " omega2=" + std::to_string(params.omega2));
    }
    const Eigen::Vector4d& p = state.populations;
    const double half = 0.5 * (p(1) - p(2));
    const double mean = 0.5 * (p(1) + p(2));
    const double x = state.coherence.real();
    const double y = state.coherence.imag();

    Eigen::Matrix4cd local = Eigen::Matrix4cd::Zero();
    local(0, 0) = p(0);
    local(1, 1) = mean - x;
    local(2, 2) = mean + x;
    local(3, 3) = p(3);
    local(1, 2) = linalg::Complex(-half, y);
    local(2, 1) = linalg::Complex(-half, -y);
    return local;
}

TwoSiteState localToGlobal(const Eigen::Matrix4cd& local) {
    const double mean = 0.5 * (local(1, 1).real() + local(2, 2).real());
    const double x = 0.5 * (local(2, 2).real() - local(1, 1).real());
    const double half = -local(1, 2).real();
    const double y = local(1, 2).imag();
    TwoSiteState state;
    state.populations(0) = local(0, 0).real();
    state.populations(1) = mean + half;
    state.populations(2) = mean - half;
    state.populations(3) = local(3, 3).real();
    state.coherence = linalg::Complex(x, y);
    return state;
}

}  // namespace qmpemba::twosite
