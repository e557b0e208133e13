// Python bindings for the relaxation-crossing engine: model builders,
// spectral evolution, crossing detection, observables and the scan
// drivers, with the C++ error hierarchy surfaced as Python exceptions.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "qmpemba/dot.hpp"
#include "qmpemba/errors.hpp"
#include "qmpemba/linalg.hpp"
#include "qmpemba/observables.hpp"
#include "qmpemba/scan.hpp"
#include "qmpemba/twosite.hpp"
#include "qmpemba/version.hpp"

namespace py = pybind11;

namespace {

std::vector<qmpemba::obs::ObservableSample> makeSeries(
    const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size()) {
        throw qmpemba::GridMismatch(
            "time and value arrays must have equal length");
    }
    std::vector<qmpemba::obs::ObservableSample> series(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        series[i] = {times[i], values[i]};
    }
    return series;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Relaxation-crossing engine for open fermionic systems";
    m.attr("__version__") = qmpemba::kEngineVersion;

    auto base = py::register_exception<qmpemba::Error>(m, "EngineError");
    py::register_exception<qmpemba::OutOfDomain>(m, "OutOfDomainError",
                                                 base.ptr());
    py::register_exception<qmpemba::ConfigError>(m, "ConfigFileError",
                                                 base.ptr());
    py::register_exception<qmpemba::NotFound>(m, "NotFoundError", base.ptr());
    py::register_exception<qmpemba::GridMismatch>(m, "GridMismatchError",
                                                  base.ptr());
    py::register_exception<qmpemba::NotADensityMatrix>(
        m, "NotADensityMatrixError", base.ptr());
    py::register_exception<qmpemba::NonPositiveTemperature>(
        m, "NonPositiveTemperatureError", base.ptr());
    py::register_exception<qmpemba::DegenerateDifference>(
        m, "DegenerateDifferenceError", base.ptr());
    py::register_exception<qmpemba::DivisionBlocked>(m, "DivisionBlockedError",
                                                     base.ptr());
    py::register_exception<qmpemba::InvalidStep>(m, "InvalidStepError",
                                                 base.ptr());

    // ------------------------------------------------------------- dot
    auto dotm = m.def_submodule("dot", "Four-state dot between reservoirs");

    py::class_<qmpemba::dot::BathPair>(dotm, "BathPair")
        .def(py::init([](double muLeft, double muRight, double tLeft,
                         double tRight) {
                 return qmpemba::dot::BathPair{muLeft, muRight, tLeft,
                                               tRight};
             }),
             py::arg("mu_left") = 0.0, py::arg("mu_right") = 0.0,
             py::arg("t_left") = 1.0, py::arg("t_right") = 1.0)
        .def_readwrite("mu_left", &qmpemba::dot::BathPair::muLeft)
        .def_readwrite("mu_right", &qmpemba::dot::BathPair::muRight)
        .def_readwrite("t_left", &qmpemba::dot::BathPair::tLeft)
        .def_readwrite("t_right", &qmpemba::dot::BathPair::tRight);

    py::class_<qmpemba::dot::DotParams>(dotm, "DotParams")
        .def(py::init([](double epsilon0, double u, double gamma,
                         const qmpemba::dot::BathPair& baths) {
                 return qmpemba::dot::DotParams{epsilon0, u, gamma, baths};
             }),
             py::arg("epsilon0"), py::arg("u"), py::arg("gamma") = 1.0,
             py::arg("baths") = qmpemba::dot::BathPair{})
        .def_readwrite("epsilon0", &qmpemba::dot::DotParams::epsilon0)
        .def_readwrite("u", &qmpemba::dot::DotParams::u)
        .def_readwrite("gamma", &qmpemba::dot::DotParams::gamma)
        .def_readwrite("baths", &qmpemba::dot::DotParams::relaxBaths);

    dotm.def(
        "occupation_factors",
        [](const qmpemba::dot::DotParams& params) {
            const auto f = qmpemba::dot::occupationFactors(params);
            return py::make_tuple(f.f0, f.f1);
        },
        py::arg("params"),
        "Summed reservoir occupations (f0, f1) at the two addition "
        "energies.");
    dotm.def(
        "generator",
        [](const qmpemba::dot::DotParams& params) {
            const auto f = qmpemba::dot::occupationFactors(params);
            return Eigen::Matrix4d(params.gamma *
                                   qmpemba::dot::buildTransitionMatrix(f));
        },
        py::arg("params"),
        "Population-transition generator including the overall rate.");
    dotm.def(
        "spectral_data",
        [](const qmpemba::dot::DotParams& params) {
            const auto data = qmpemba::dot::analyticSpectralData(
                qmpemba::dot::occupationFactors(params));
            py::dict out;
            out["eigenvalues"] = data.eigenvalues;
            out["right"] = data.right;
            out["left"] = data.left;
            return out;
        },
        py::arg("params"),
        "Closed-form eigensystem in base-rate units (left * right = I).");
    dotm.def(
        "steady_state",
        [](const qmpemba::dot::DotParams& params) {
            return qmpemba::dot::steadyState(params, params.relaxBaths);
        },
        py::arg("params"));
    dotm.def("prepare_initial_state", &qmpemba::dot::prepareInitialState,
             py::arg("params"), py::arg("preparing_baths"),
             "Stationary state of the preparing baths.");
    dotm.def(
        "evolve",
        [](const qmpemba::dot::DotParams& params,
           const qmpemba::dot::DotState& rho0,
           const std::vector<double>& times) {
            const auto traj = qmpemba::dot::evolveDot(params, rho0, times);
            Eigen::MatrixXd out(traj.size(), 4);
            for (std::size_t i = 0; i < traj.size(); ++i) {
                out.row(static_cast<Eigen::Index>(i)) = traj[i].transpose();
            }
            return out;
        },
        py::arg("params"), py::arg("rho0"), py::arg("times"),
        "Population trajectory, one row per requested time.");
    dotm.def(
        "mpemba_criterion",
        [](const qmpemba::dot::DotParams& params,
           const qmpemba::dot::DotState& rhoI,
           const qmpemba::dot::DotState& rhoII, int n) {
            const auto r = qmpemba::dot::mpembaCriterion(params, rhoI, rhoII,
                                                         n);
            return py::make_tuple(r.value, r.inWindow);
        },
        py::arg("params"), py::arg("rho_i"), py::arg("rho_ii"),
        py::arg("component") = 2,
        "Two-mode competition ratio and the crossing-window predicate.");
    dotm.def("crossing_time", &qmpemba::dot::dotCrossingTime,
             py::arg("params"), py::arg("rho_i"), py::arg("rho_ii"),
             py::arg("component") = 2,
             "First positive crossing time of the chosen component, or "
             "None.");

    // --------------------------------------------------------- twosite
    auto ts = m.def_submodule("twosite", "Tunnel-coupled site pair");

    py::class_<qmpemba::twosite::Bath>(ts, "Bath")
        .def(py::init([](double temperature, double mu) {
                 return qmpemba::twosite::Bath{temperature, mu};
             }),
             py::arg("temperature") = 1.0, py::arg("mu") = 0.0)
        .def_readwrite("temperature", &qmpemba::twosite::Bath::temperature)
        .def_readwrite("mu", &qmpemba::twosite::Bath::mu);

    py::class_<qmpemba::twosite::TwoSiteParams>(ts, "TwoSiteParams")
        .def(py::init([](double omega1, double omega2, double delta,
                         double gamma1, double gamma2,
                         const qmpemba::twosite::Bath& bath1,
                         const qmpemba::twosite::Bath& bath2) {
                 return qmpemba::twosite::TwoSiteParams{
                     omega1, omega2, delta, gamma1, gamma2, bath1, bath2};
             }),
             py::arg("omega1"), py::arg("omega2"), py::arg("delta"),
             py::arg("gamma1") = 1.0, py::arg("gamma2") = 1.0,
             py::arg("bath1") = qmpemba::twosite::Bath{},
             py::arg("bath2") = qmpemba::twosite::Bath{})
        .def_readwrite("omega1", &qmpemba::twosite::TwoSiteParams::omega1)
        .def_readwrite("omega2", &qmpemba::twosite::TwoSiteParams::omega2)
        .def_readwrite("delta", &qmpemba::twosite::TwoSiteParams::delta)
        .def_readwrite("gamma1", &qmpemba::twosite::TwoSiteParams::gamma1)
        .def_readwrite("gamma2", &qmpemba::twosite::TwoSiteParams::gamma2)
        .def_readwrite("bath1", &qmpemba::twosite::TwoSiteParams::bath1)
        .def_readwrite("bath2", &qmpemba::twosite::TwoSiteParams::bath2);

    py::enum_<qmpemba::twosite::GeneratorMode>(ts, "GeneratorMode")
        .value("LINDBLAD", qmpemba::twosite::GeneratorMode::Lindblad)
        .value("REDFIELD", qmpemba::twosite::GeneratorMode::Redfield);

    py::class_<qmpemba::twosite::TwoSiteState>(ts, "TwoSiteState")
        .def(py::init([](const Eigen::Vector4d& populations,
                         std::complex<double> coherence) {
                 qmpemba::twosite::TwoSiteState s;
                 s.populations = populations;
                 s.coherence = coherence;
                 return s;
             }),
             py::arg("populations"),
             py::arg("coherence") = std::complex<double>(0.0, 0.0))
        .def_readwrite("populations",
                       &qmpemba::twosite::TwoSiteState::populations)
        .def_readwrite("coherence",
                       &qmpemba::twosite::TwoSiteState::coherence);

    ts.def(
        "derive_angles",
        [](const qmpemba::twosite::TwoSiteParams& params) {
            const auto a = qmpemba::twosite::deriveAngles(params);
            return py::make_tuple(a.theta, a.omegaPrime1, a.omegaPrime2);
        },
        py::arg("params"),
        "(mixing angle, upper mode energy, lower mode energy).");
    ts.def(
        "generator",
        [](const qmpemba::twosite::TwoSiteParams& params,
           qmpemba::twosite::GeneratorMode mode) {
            return qmpemba::twosite::buildGenerator(params, mode).matrix;
        },
        py::arg("params"), py::arg("mode"),
        "Relaxation generator: 4x4 population-only, or 6x6 with the "
        "coherence pair appended.");
    ts.def("coherence_coupling", &qmpemba::twosite::coherenceCoupling,
           py::arg("params"));
    ts.def("delta_matrix", &qmpemba::twosite::deltaMatrix, py::arg("params"),
           py::arg("mode") = qmpemba::twosite::GeneratorMode::Lindblad,
           "Closed-form left-eigenvector rows of the symmetric "
           "population generator.");
    ts.def("steady_state", &qmpemba::twosite::steadyState, py::arg("params"),
           py::arg("mode"));
    ts.def(
        "evolve",
        [](const qmpemba::twosite::TwoSiteParams& params,
           qmpemba::twosite::GeneratorMode mode,
           const qmpemba::twosite::TwoSiteState& state0,
           const std::vector<double>& times) {
            const auto gen = qmpemba::twosite::buildGenerator(params, mode);
            const auto result =
                qmpemba::twosite::evolveTwoSite(gen, state0, times);
            Eigen::MatrixXd populations(result.states.size(), 4);
            Eigen::VectorXcd coherences(result.states.size());
            for (std::size_t i = 0; i < result.states.size(); ++i) {
                const auto idx = static_cast<Eigen::Index>(i);
                populations.row(idx) =
                    result.states[i].populations.transpose();
                coherences(idx) = result.states[i].coherence;
            }
            py::dict out;
            out["populations"] = populations;
            out["coherences"] = coherences;
            out["coherence_ignored"] = result.coherenceIgnored;
            out["worst_population_violation"] =
                result.worstPopulationViolation;
            return out;
        },
        py::arg("params"), py::arg("mode"), py::arg("state0"),
        py::arg("times"),
        "Trajectory dict: populations (n, 4), coherences (n,), whether a "
        "nonzero coherence was ignored, and the worst population "
        "excursion.");
    ts.def(
        "strong_coefficients",
        [](const qmpemba::twosite::TwoSiteParams& params,
           const qmpemba::twosite::TwoSiteState& state0,
           qmpemba::twosite::GeneratorMode mode) {
            const auto c = qmpemba::twosite::strongMpembaCoefficients(
                params, state0, mode);
            py::dict out;
            out["alpha"] = c.alpha;
            out["rates"] = c.rates;
            out["strong_condition"] = c.strongCondition;
            return out;
        },
        py::arg("params"), py::arg("state0"),
        py::arg("mode") = qmpemba::twosite::GeneratorMode::Lindblad,
        "Mode weights against the closed-form rows, with the "
        "strong-relaxation predicate.");
    ts.def("global_to_local", &qmpemba::twosite::globalToLocal,
           py::arg("params"), py::arg("state"),
           "Density matrix in the site basis (symmetric sites only).");
    ts.def("local_to_global", &qmpemba::twosite::localToGlobal,
           py::arg("local"));

    // ------------------------------------------------------------- obs
    auto obsm = m.def_submodule("obs", "Correlation observables");

    obsm.def("concurrence_local", &qmpemba::obs::concurrenceLocal,
             py::arg("local"),
             "Concurrence of a site-basis density matrix.");
    obsm.def("concurrence_eigenbasis", &qmpemba::obs::concurrenceEigenbasis,
             py::arg("state"),
             "Concurrence straight from eigenbasis populations "
             "(coherence-free states only).");
    obsm.def("von_neumann_entropy", &qmpemba::obs::vonNeumannEntropy,
             py::arg("rho"), "Entropy in bits.");
    py::enum_<qmpemba::obs::Site>(obsm, "Site")
        .value("A", qmpemba::obs::Site::A)
        .value("B", qmpemba::obs::Site::B);
    obsm.def("reduced_state", &qmpemba::obs::reducedState, py::arg("local"),
             py::arg("site"));
    obsm.def("quantum_mutual_information",
             &qmpemba::obs::quantumMutualInformation, py::arg("local"));

    // ------------------------------------------------------------ scan
    auto scanm = m.def_submodule("scan", "Crossing and boundary scans");

    scanm.def(
        "detect_crossings",
        [](const std::vector<double>& times, const std::vector<double>& a,
           const std::vector<double>& b,
           const std::function<double(double)>& difference) {
            const auto crossings = qmpemba::scan::detectCrossings(
                makeSeries(times, a), makeSeries(times, b), difference);
            std::vector<std::pair<double, int>> out;
            out.reserve(crossings.size());
            for (const auto& c : crossings) {
                out.emplace_back(c.time, c.direction);
            }
            return out;
        },
        py::arg("times"), py::arg("a"), py::arg("b"),
        py::arg("difference") = py::none(),
        "Sign changes of a - b as (time, direction) pairs; an optional "
        "continuous difference evaluator enables bisection refinement.");
    scanm.def("entanglement_crossing_time",
              &qmpemba::scan::entanglementCrossingTime, py::arg("params"),
              py::arg("state_i"), py::arg("state_ii"), py::arg("bias"),
              py::arg("mean"),
              py::arg("window_over_rate") =
                  qmpemba::scan::kCrossingWindowOverRate,
              py::arg("samples") = qmpemba::scan::kCrossingSamples,
              "First concurrence crossing time, or None.");

    py::class_<qmpemba::scan::BoundaryConfig>(scanm, "BoundaryConfig")
        .def(py::init<>())
        .def_readwrite("params", &qmpemba::scan::BoundaryConfig::params)
        .def_readwrite("mu_bar", &qmpemba::scan::BoundaryConfig::muBar)
        .def_readwrite("bias", &qmpemba::scan::BoundaryConfig::bias)
        .def_readwrite("prep_temperature",
                       &qmpemba::scan::BoundaryConfig::prepTemperature)
        .def_readwrite("tilde_mu1", &qmpemba::scan::BoundaryConfig::tildeMu1)
        .def_readwrite("tilde_mu3", &qmpemba::scan::BoundaryConfig::tildeMu3)
        .def_readwrite("mu2_lo", &qmpemba::scan::BoundaryConfig::mu2Lo)
        .def_readwrite("mu2_hi", &qmpemba::scan::BoundaryConfig::mu2Hi)
        .def_readwrite("mu2_samples",
                       &qmpemba::scan::BoundaryConfig::mu2Samples)
        .def_readwrite("mu4_lo", &qmpemba::scan::BoundaryConfig::mu4Lo)
        .def_readwrite("mu4_hi", &qmpemba::scan::BoundaryConfig::mu4Hi)
        .def_readwrite("mu4_nodes", &qmpemba::scan::BoundaryConfig::mu4Nodes)
        .def_readwrite("threads", &qmpemba::scan::BoundaryConfig::threads);

    scanm.def(
        "trace_boundary",
        [](const qmpemba::scan::BoundaryConfig& config, double target) {
            const auto curve = qmpemba::scan::traceBoundary(config, target);
            Eigen::MatrixXd points(curve.points.size(), 2);
            for (std::size_t i = 0; i < curve.points.size(); ++i) {
                points(static_cast<Eigen::Index>(i), 0) = curve.points[i][0];
                points(static_cast<Eigen::Index>(i), 1) = curve.points[i][1];
            }
            py::dict out;
            out["target"] = curve.target;
            out["points"] = points;
            out["diverged_beyond"] =
                curve.divergedBeyond
                    ? py::object(py::float_(*curve.divergedBeyond))
                    : py::object(py::none());
            out["skipped"] = curve.skipped;
            return out;
        },
        py::arg("config"), py::arg("target"),
        "Level curve of the criterion over the preparing-potential "
        "plane.");
    scanm.def("threshold_bias", &qmpemba::scan::thresholdBias,
              py::arg("config"), py::arg("mu2_fixed"),
              "Smallest relaxation bias at which the minus-one curve stops "
              "being solvable.");

    py::class_<qmpemba::scan::RegionGrid>(scanm, "RegionGrid")
        .def(py::init<>())
        .def_readwrite("bias_lo", &qmpemba::scan::RegionGrid::biasLo)
        .def_readwrite("bias_hi", &qmpemba::scan::RegionGrid::biasHi)
        .def_readwrite("bias_samples",
                       &qmpemba::scan::RegionGrid::biasSamples)
        .def_readwrite("mean_lo", &qmpemba::scan::RegionGrid::meanLo)
        .def_readwrite("mean_hi", &qmpemba::scan::RegionGrid::meanHi)
        .def_readwrite("mean_samples",
                       &qmpemba::scan::RegionGrid::meanSamples)
        .def_readwrite("window_over_rate",
                       &qmpemba::scan::RegionGrid::windowOverRate)
        .def_readwrite("samples", &qmpemba::scan::RegionGrid::samples)
        .def_readwrite("threads", &qmpemba::scan::RegionGrid::threads);

    scanm.def(
        "coherence_region_map",
        [](const qmpemba::twosite::TwoSiteParams& base,
           const qmpemba::scan::RegionGrid& grid,
           const qmpemba::twosite::TwoSiteState& stateI,
           const qmpemba::twosite::TwoSiteState& stateII) {
            const auto map =
                qmpemba::scan::coherenceRegionMap(base, grid, stateI,
                                                  stateII);
            py::dict out;
            out["bias_axis"] = map.biasAxis;
            out["mean_axis"] = map.meanAxis;
            out["redfield"] = map.redfieldFlags;
            out["lindblad"] = map.lindbladFlags;
            return out;
        },
        py::arg("base"), py::arg("grid"), py::arg("state_i"),
        py::arg("state_ii"),
        "Crossing flags over the (bias, mean) bath-potential grid for "
        "both generator modes.");
}
