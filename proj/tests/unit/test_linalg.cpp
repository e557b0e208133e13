#include <cmath>
#include <complex>

#include <doctest.h>

#include "qmpemba/errors.hpp"
#include "qmpemba/linalg.hpp"

namespace {

using qmpemba::linalg::CMatrix;
using qmpemba::linalg::Complex;
using qmpemba::linalg::CVector;

CMatrix exchangeMatrix() {
    CMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

// A conservative rate matrix with known stationary distribution (2/3, 1/3).
CMatrix twoStateRateMatrix() {
    CMatrix m(2, 2);
    m << -1.0, 2.0, 1.0, -2.0;
    return m;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("eigendecompose orders eigenvalues and pairs the vector systems") {
    const auto dec = qmpemba::linalg::eigendecompose(exchangeMatrix());
    REQUIRE(dec.eigenvalues.size() == 2);
    CHECK(dec.eigenvalues(0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dec.eigenvalues(1).real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(dec.eigenvalues(0).imag()) <= 1e-12);

    const CMatrix pairing = dec.left * dec.right;
    CHECK((pairing - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(dec.residual <= qmpemba::linalg::kSpectralTolerance);
}

TEST_CASE("eigendecompose is deterministic across repeated calls") {
    CMatrix m(3, 3);
    m << -2.0, 0.5, 0.1, 1.3, -1.0, 0.2, 0.7, 0.5, -0.3;
    const auto a = qmpemba::linalg::eigendecompose(m);
    const auto b = qmpemba::linalg::eigendecompose(m);
    for (int i = 0; i < 3; ++i) {
        CHECK(a.eigenvalues(i) == b.eigenvalues(i));
        for (int j = 0; j < 3; ++j) {
            CHECK(a.right(i, j) == b.right(i, j));
            CHECK(a.left(i, j) == b.left(i, j));
        }
    }
}

TEST_CASE("propagate reproduces the initial state at time zero") {
    CMatrix m(3, 3);
    m << -1.0, 0.3, 0.0, 0.8, -0.5, 0.2, 0.2, 0.2, -0.2;
    const auto dec = qmpemba::linalg::eigendecompose(m);
    CVector state0(3);
    state0 << 0.2, 0.5, 0.3;
    const CVector back = qmpemba::linalg::propagate(dec, state0, 0.0);
    CHECK((back - state0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("propagate matches the stepped integrator") {
    const CMatrix m = twoStateRateMatrix();
    const auto dec = qmpemba::linalg::eigendecompose(m);
    CVector state0(2);
    state0 << 0.9, 0.1;

    const double t = 2.5;
    const CVector spectral = qmpemba::linalg::propagate(dec, state0, t);
    const CVector stepped = qmpemba::linalg::rk4Integrate(
        [&m](const CVector& v) { return CVector(m * v); }, state0, t, 1e-3);
    CHECK((spectral - stepped).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("mode coefficients reconstruct the state") {
    CMatrix m(3, 3);
    m << -1.0, 0.3, 0.0, 0.8, -0.5, 0.2, 0.2, 0.2, -0.2;
    const auto dec = qmpemba::linalg::eigendecompose(m);
    CVector state0(3);
    state0 << 0.1, 0.6, 0.3;
    const CVector alpha = qmpemba::linalg::modeCoefficients(dec, state0);
    CVector rebuilt = CVector::Zero(3);
    for (int i = 0; i < 3; ++i) {
        rebuilt += alpha(i) * dec.right.col(i);
    }
    CHECK((rebuilt - state0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stepped integrator solves exponential decay") {
    CVector state0(1);
    state0 << 1.0;
    const auto decay = [](const CVector& v) { return CVector(-v); };
    const CVector result =
        qmpemba::linalg::rk4Integrate(decay, state0, 1.0, 1e-3);
    CHECK(std::abs(result(0).real() - std::exp(-1.0)) <= 1e-10);

    const CVector frozen = qmpemba::linalg::rk4Integrate(decay, state0, 0.0,
                                                         1e-3);
    CHECK(frozen(0) == state0(0));

    CHECK_THROWS_AS(qmpemba::linalg::rk4Integrate(decay, state0, -1.0, 1e-3),
                    qmpemba::InvalidStep);
    CHECK_THROWS_AS(qmpemba::linalg::rk4Integrate(decay, state0, 1.0, 0.0),
                    qmpemba::InvalidStep);
}

TEST_CASE("null vector of a conservative generator is its stationary state") {
    const CVector stationary =
        qmpemba::linalg::nullVector(twoStateRateMatrix());
    CHECK(std::abs(stationary(0).real() - 2.0 / 3.0) <= 1e-12);
    CHECK(std::abs(stationary(1).real() - 1.0 / 3.0) <= 1e-12);
    CHECK(std::abs(stationary.sum() - Complex(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("null vector requires an eigenvalue at zero") {
    CMatrix m(2, 2);
    m << -1.0, 0.0, 0.0, -2.0;
    CHECK_THROWS_AS(qmpemba::linalg::nullVector(m), qmpemba::NoNullSpace);
}

TEST_CASE("defective matrices are rejected") {
    CMatrix jordan(2, 2);
    jordan << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(qmpemba::linalg::eigendecompose(jordan),
                    qmpemba::DefectiveMatrix);
}

TEST_CASE("bad shapes and non-finite entries are rejected") {
    CMatrix rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(qmpemba::linalg::eigendecompose(rect),
                    qmpemba::DimensionMismatch);

    CMatrix nan(2, 2);
    nan.setZero();
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(qmpemba::linalg::eigendecompose(nan),
                    qmpemba::DimensionMismatch);
}

}  // TEST_SUITE
