#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "qmpemba/errors.hpp"
#include "qmpemba/twosite.hpp"

namespace {

using qmpemba::twosite::GeneratorMode;
using qmpemba::twosite::TwoSiteParams;
using qmpemba::twosite::TwoSiteState;

// Weakly coupled symmetric pair: rates 0.05, site energy 1, tunneling 0.2,
// both baths at unit temperature and potential 3.
TwoSiteParams symmetricParams() {
    TwoSiteParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.0;
    p.delta = 0.2;
    p.gamma1 = 0.05;
    p.gamma2 = 0.05;
    p.bath1 = {1.0, 3.0};
    p.bath2 = {1.0, 3.0};
    return p;
}

// Same pair under a strong bath imbalance (potentials 0.1 and 3, tunneling
// 0.05), the setting where population-coherence coupling matters.
TwoSiteParams imbalancedParams() {
    TwoSiteParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.0;
    p.delta = 0.05;
    p.gamma1 = 0.05;
    p.gamma2 = 0.05;
    p.bath1 = {1.0, 0.1};
    p.bath2 = {1.0, 3.0};
    return p;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * i / (n - 1);
    }
    return out;
}

}  // namespace

TEST_SUITE("twosite") {

TEST_CASE("derived angles cover symmetric, tilted, and degenerate cases") {
    const auto sym = qmpemba::twosite::deriveAngles(symmetricParams());
    CHECK(sym.theta == doctest::Approx(M_PI / 2.0).epsilon(1e-14));
    CHECK(sym.omegaPrime1 == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(sym.omegaPrime2 == doctest::Approx(0.8).epsilon(1e-14));

    TwoSiteParams tilted = symmetricParams();
    tilted.omega1 = 1.0;
    tilted.omega2 = 2.0;
    tilted.delta = 0.5;
    const auto t = qmpemba::twosite::deriveAngles(tilted);
    const double disc = std::sqrt(2.0);  // sqrt((1-2)^2 + 4*0.25)
    CHECK(t.theta == doctest::Approx(std::acos(1.0 / disc)).epsilon(1e-14));
    CHECK(t.omegaPrime1 == doctest::Approx(1.5 + disc / 2.0).epsilon(1e-14));
    CHECK(t.omegaPrime2 == doctest::Approx(1.5 - disc / 2.0).epsilon(1e-14));

    TwoSiteParams degenerate = symmetricParams();
    degenerate.delta = 0.0;
    CHECK_THROWS_AS(qmpemba::twosite::deriveAngles(degenerate),
                    qmpemba::DegenerateSpectrum);
}

TEST_CASE("occupation table matches the frozen Fermi factors") {
    const auto table = qmpemba::twosite::occupationTable(symmetricParams());
    // Upper mode at energy 1.2 against a bath at T = 1, mu = 3.
    CHECK(table.n[0][0] ==
          doctest::Approx(0.8581489350995123).epsilon(1e-14));
    CHECK(table.n[0][1] ==
          doctest::Approx(0.8581489350995123).epsilon(1e-14));
    // The two baths are identical here, so the rows agree with themselves
    // and the summed occupations match the frozen pair values.
    CHECK(table.n[0][0] + table.n[0][1] ==
          doctest::Approx(1.7162978701990246).epsilon(1e-14));
    CHECK(table.n[1][0] + table.n[1][1] ==
          doctest::Approx(1.8004990217606296).epsilon(1e-14));

    TwoSiteParams cold = symmetricParams();
    cold.bath2.temperature = 0.0;
    CHECK_THROWS_AS(qmpemba::twosite::occupationTable(cold),
                    qmpemba::NonPositiveTemperature);
}

TEST_CASE("generators conserve probability in both modes") {
    for (const auto& params : {symmetricParams(), imbalancedParams()}) {
        for (const auto mode :
             {GeneratorMode::Lindblad, GeneratorMode::Redfield}) {
            const auto gen = qmpemba::twosite::buildGenerator(params, mode);
            const Eigen::Index n = gen.matrix.cols();
            REQUIRE(gen.matrix.rows() == n);
            for (Eigen::Index c = 0; c < n; ++c) {
                // Trace motion only involves the population rows.
                std::complex<double> sum = 0.0;
                for (int r = 0; r < 4; ++r) {
                    sum += gen.matrix(r, c);
                }
                CHECK(std::abs(sum) <= 1e-12);
            }
        }
    }
}

TEST_CASE("redfield population block equals the lindblad generator") {
    const auto params = imbalancedParams();
    const auto lindblad =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Lindblad);
    const auto redfield =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Redfield);
    REQUIRE(lindblad.matrix.rows() == 4);
    REQUIRE(redfield.matrix.rows() == 6);
    CHECK((redfield.matrix.topLeftCorner(4, 4) - lindblad.matrix)
              .cwiseAbs()
              .maxCoeff() <= 1e-15);
}

TEST_CASE("symmetric spectra form the frozen rate ladders") {
    const auto params = symmetricParams();
    const double g = params.gamma1;

    const auto lindblad =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Lindblad);
    auto dec = qmpemba::linalg::eigendecompose(lindblad.matrix);
    std::vector<double> real;
    for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
        real.push_back(dec.eigenvalues(i).real());
        CHECK(std::abs(dec.eigenvalues(i).imag()) <= 1e-9);
    }
    std::sort(real.begin(), real.end());
    CHECK(real[0] == doctest::Approx(-4.0 * g).epsilon(1e-9));
    CHECK(real[1] == doctest::Approx(-2.0 * g).epsilon(1e-9));
    CHECK(real[2] == doctest::Approx(-2.0 * g).epsilon(1e-9));
    CHECK(std::abs(real[3]) <= 1e-9);

    const auto redfield =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Redfield);
    dec = qmpemba::linalg::eigendecompose(redfield.matrix);
    bool plus = false;
    bool minus = false;
    for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
        const auto ev = dec.eigenvalues(i);
        if (std::abs(ev - std::complex<double>(-2.0 * g, 2.0 * params.delta)) <=
            1e-9) {
            plus = true;
        }
        if (std::abs(ev - std::complex<double>(-2.0 * g, -2.0 * params.delta)) <=
            1e-9) {
            minus = true;
        }
    }
    CHECK(plus);
    CHECK(minus);
}

TEST_CASE("stationary state matches the frozen reference") {
    const auto params = symmetricParams();
    const auto steady =
        qmpemba::twosite::steadyState(params, GeneratorMode::Lindblad);
    CHECK(steady.populations(0) ==
          doctest::Approx(0.0141497131059718).epsilon(1e-12));
    CHECK(steady.populations(1) ==
          doctest::Approx(0.1277013517945159).epsilon(1e-12));
    CHECK(steady.populations(2) ==
          doctest::Approx(0.0856007760137133).epsilon(1e-12));
    CHECK(steady.populations(3) ==
          doctest::Approx(0.7725481590857990).epsilon(1e-12));
    CHECK(std::abs(steady.populations.sum() - 1.0) <= 1e-12);

    const auto gen =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Lindblad);
    const Eigen::Vector4cd residual =
        gen.matrix * steady.populations.cast<std::complex<double>>();
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("redfield stationary state carries the frozen coherence") {
    const auto params = imbalancedParams();
    const auto steady =
        qmpemba::twosite::steadyState(params, GeneratorMode::Redfield);
    CHECK(steady.populations(0) ==
          doctest::Approx(0.1284848314).epsilon(1e-8));
    CHECK(steady.populations(1) ==
          doctest::Approx(0.2943494367).epsilon(1e-8));
    CHECK(steady.populations(2) ==
          doctest::Approx(0.2788249305).epsilon(1e-8));
    CHECK(steady.populations(3) ==
          doctest::Approx(0.2983408014).epsilon(1e-8));
    CHECK(steady.coherence.real() ==
          doctest::Approx(-0.14788457262877).epsilon(1e-9));
    CHECK(steady.coherence.imag() ==
          doctest::Approx(-0.14788457262871).epsilon(1e-9));
}

TEST_CASE("coherence coupling vanishes for identical baths") {
    CHECK(std::abs(qmpemba::twosite::coherenceCoupling(symmetricParams())) <=
          1e-15);
    CHECK(qmpemba::twosite::coherenceCoupling(imbalancedParams()) ==
          doctest::Approx(0.029576914525740725).epsilon(1e-12));
}

TEST_CASE("mode-weight rows are left eigenvectors of the population block") {
    const auto params = symmetricParams();
    const Eigen::Matrix4d delta = qmpemba::twosite::deltaMatrix(params);
    const auto gen =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Lindblad);
    const Eigen::Matrix4d block = gen.matrix.real();
    const double g = params.gamma1;
    const double rates[4] = {-4.0 * g, -2.0 * g, -2.0 * g, 0.0};
    for (int r = 0; r < 4; ++r) {
        const Eigen::RowVector4d row = delta.row(r);
        CHECK((row * block - rates[r] * row).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("mode-weight rows require the symmetric population description") {
    CHECK_THROWS_AS(qmpemba::twosite::deltaMatrix(symmetricParams(),
                                                  GeneratorMode::Redfield),
                    qmpemba::OutOfDomain);

    TwoSiteParams tilted = symmetricParams();
    tilted.omega2 = 1.5;
    CHECK_THROWS_AS(qmpemba::twosite::deltaMatrix(tilted),
                    qmpemba::OutOfDomain);

    TwoSiteParams lopsided = symmetricParams();
    lopsided.gamma2 = 0.1;
    CHECK_THROWS_AS(qmpemba::twosite::deltaMatrix(lopsided),
                    qmpemba::OutOfDomain);
}

TEST_CASE("strong-relaxation weights match the frozen reference") {
    const auto params = symmetricParams();
    TwoSiteState state;
    state.populations << 0.1, 0.1, 0.7, 0.1;
    const auto coeffs =
        qmpemba::twosite::strongMpembaCoefficients(params, state);
    CHECK(coeffs.alpha(0) ==
          doctest::Approx(-0.0192812366383553).epsilon(1e-10));
    CHECK(coeffs.alpha(1) ==
          doctest::Approx(-0.6532669224474437).epsilon(1e-10));
    CHECK(coeffs.alpha(2) ==
          doctest::Approx(-0.0469825884328712).epsilon(1e-10));
    CHECK(coeffs.alpha(3) ==
          doctest::Approx(0.7725481590857989).epsilon(1e-10));
    CHECK(coeffs.rates[0] == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(coeffs.rates[3] == 0.0);
    CHECK_FALSE(coeffs.strongCondition);

    // The stationary state excites no decaying mode: the slow weights vanish
    // and the strong condition holds.
    const auto steady =
        qmpemba::twosite::steadyState(params, GeneratorMode::Lindblad);
    const auto stationaryCoeffs =
        qmpemba::twosite::strongMpembaCoefficients(params, steady);
    CHECK(std::abs(stationaryCoeffs.alpha(1)) <= 1e-12);
    CHECK(std::abs(stationaryCoeffs.alpha(2)) <= 1e-12);
    CHECK(stationaryCoeffs.alpha(3) ==
          doctest::Approx(0.77254815908580).epsilon(1e-10));
    CHECK(stationaryCoeffs.strongCondition);
}

TEST_CASE("evolution conserves trace and matches the stepped integrator") {
    const auto params = imbalancedParams();
    const auto gen =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Redfield);
    TwoSiteState state0;
    state0.populations << 0.1, 0.25, 0.65, 0.0;
    state0.coherence = {0.2, 0.0};

    const std::vector<double> times = linspace(0.0, 40.0, 81);
    const auto result = qmpemba::twosite::evolveTwoSite(gen, state0, times);
    REQUIRE(result.states.size() == times.size());
    CHECK_FALSE(result.coherenceIgnored);
    for (const auto& state : result.states) {
        CHECK(std::abs(state.populations.sum() - 1.0) <= 1e-12);
    }

    qmpemba::linalg::CVector packed(6);
    packed << 0.1, 0.25, 0.65, 0.0, std::complex<double>(0.2, 0.0),
        std::complex<double>(0.2, 0.0);
    const qmpemba::linalg::CVector stepped = qmpemba::linalg::rk4Integrate(
        [&gen](const qmpemba::linalg::CVector& v) {
            return qmpemba::linalg::CVector(gen.matrix * v);
        },
        packed, times.back(), 1e-3);
    const auto& last = result.states.back();
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(stepped(i).real() - last.populations(i)) <= 1e-8);
    }
    const std::complex<double> steppedCoherence =
        0.5 * (stepped(4) + std::conj(stepped(5)));
    CHECK(std::abs(steppedCoherence - last.coherence) <= 1e-8);
}

TEST_CASE("population-only evolution drops the input coherence") {
    const auto params = symmetricParams();
    const auto gen =
        qmpemba::twosite::buildGenerator(params, GeneratorMode::Lindblad);
    TwoSiteState state0;
    state0.populations << 0.1, 0.25, 0.65, 0.0;
    state0.coherence = {0.2, 0.0};
    const auto result =
        qmpemba::twosite::evolveTwoSite(gen, state0, {0.0, 1.0, 2.0});
    CHECK(result.coherenceIgnored);
    for (const auto& state : result.states) {
        CHECK(std::abs(state.coherence) == 0.0);
    }
}

TEST_CASE("state validation enforces density-matrix-like bounds") {
    TwoSiteState offTrace;
    offTrace.populations << 0.5, 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(qmpemba::twosite::validateTwoSiteState(offTrace),
                    qmpemba::NotADensityMatrix);

    TwoSiteState overCoherent;
    overCoherent.populations << 0.25, 0.25, 0.25, 0.25;
    overCoherent.coherence = {0.5, 0.0};
    CHECK_THROWS_AS(qmpemba::twosite::validateTwoSiteState(overCoherent),
                    qmpemba::NotADensityMatrix);

    TwoSiteState fine;
    fine.populations << 0.25, 0.25, 0.25, 0.25;
    fine.coherence = {0.2, 0.1};
    CHECK_NOTHROW(qmpemba::twosite::validateTwoSiteState(fine));
}

TEST_CASE("basis change round-trips and preserves trace") {
    const auto params = imbalancedParams();
    TwoSiteState state;
    state.populations << 0.1, 0.25, 0.65, 0.0;
    state.coherence = {0.2, -0.05};

    const Eigen::Matrix4cd local =
        qmpemba::twosite::globalToLocal(params, state);
    CHECK(std::abs(local.trace() - std::complex<double>(1.0, 0.0)) <= 1e-12);
    CHECK((local - local.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);

    const TwoSiteState back = qmpemba::twosite::localToGlobal(local);
    CHECK((back.populations - state.populations).cwiseAbs().maxCoeff() <=
          1e-14);
    CHECK(std::abs(back.coherence - state.coherence) <= 1e-14);

    TwoSiteParams tilted = params;
    tilted.omega2 = 2.0;
    CHECK_THROWS_AS(qmpemba::twosite::globalToLocal(tilted, state),
                    qmpemba::OutOfDomain);
}

TEST_CASE("nonpositive rates are rejected") {
    TwoSiteParams bad = symmetricParams();
    bad.gamma1 = 0.0;
    CHECK_THROWS_AS(
        qmpemba::twosite::buildGenerator(bad, GeneratorMode::Lindblad),
        qmpemba::OutOfDomain);
}

}  // TEST_SUITE
