// Command-line front end: configuration parsing, experiment orchestration,
// and deterministic CSV/JSON emission.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmpemba/dot.hpp"
#include "qmpemba/errors.hpp"
#include "qmpemba/io.hpp"
#include "qmpemba/linalg.hpp"
#include "qmpemba/observables.hpp"
#include "qmpemba/scan.hpp"
#include "qmpemba/twosite.hpp"
#include "qmpemba/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using qmpemba::io::Config;

struct OutputOptions {
    std::string path;  // empty or "-" means stdout
    std::string format = "csv";
    int precision = qmpemba::io::kDefaultPrecision;
    int threads = 1;
};

OutputOptions outputOptionsFrom(const Config& cfg) {
    OutputOptions opts;
    opts.path = cfg.getString("output.path", "");
    opts.format = cfg.getString("output.format", "csv");
    if (opts.format != "csv" && opts.format != "json") {
        throw qmpemba::ConfigError(
            "field 'output.format': expected csv or json, got '" +
            opts.format + "'");
    }
    opts.precision =
        cfg.getInt("output.precision", qmpemba::io::kDefaultPrecision);
    if (opts.precision < qmpemba::io::kMinPrecision ||
        opts.precision > qmpemba::io::kMaxPrecision) {
        throw qmpemba::ConfigError(
            "field 'output.precision': must lie in [6, 17], got " +
            std::to_string(opts.precision));
    }
    opts.threads = cfg.getInt("output.threads", 1);
    if (opts.threads < 1) {
        throw qmpemba::ConfigError(
            "field 'output.threads': must be at least 1");
    }
    return opts;
}

void writeOutput(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw qmpemba::ConfigError("cannot open output file '" + path + "'");
    }
    out << content;
    if (!out) {
        throw qmpemba::ConfigError("failed writing output file '" + path +
                                   "'");
    }
}

// Re-parses the formatted representation so JSON output carries exactly the
// digits the configured precision allows.
json quantized(double value, int precision) {
    return json(std::strtod(qmpemba::io::formatDouble(value, precision).c_str(),
                            nullptr));
}

json metadataBlock(const Config& cfg) {
    json echo = json::object();
    for (const auto& [key, value] : cfg.entries()) {
        // Where the file lands and how many workers computed it must not
        // change the emitted bytes; every content-determining key is
        // echoed.
        if (key == "output.path" || key == "output.threads") {
            continue;
        }
        echo[key] = value;
    }
    json meta = json::object();
    meta["engine_version"] = qmpemba::kEngineVersion;
    meta["config"] = echo;
    return meta;
}

std::string renderJson(const Config& cfg, json data) {
    json root = json::object();
    root["metadata"] = metadataBlock(cfg);
    root["data"] = std::move(data);
    return root.dump(2) + "\n";
}

qmpemba::dot::DotParams dotParamsFrom(const Config& cfg) {
    qmpemba::dot::DotParams p;
    p.epsilon0 = cfg.getDouble("dot.epsilon0");
    p.u = cfg.getDouble("dot.u");
    p.gamma = cfg.getDouble("dot.gamma", 1.0);
    const double temperature = cfg.getDouble("dot.temperature", 1.0);
    if (!(temperature > 0.0)) {
        throw qmpemba::NonPositiveTemperature(
            "field 'dot.temperature': must be positive, got " +
            std::to_string(temperature));
    }
    const double muBar = cfg.getDouble("dot.mu_bar");
    const double bias = cfg.getDouble("dot.bias", 0.0);
    p.relaxBaths.muLeft = muBar + bias;
    p.relaxBaths.muRight = muBar - bias;
    p.relaxBaths.tLeft = temperature;
    p.relaxBaths.tRight = temperature;
    return p;
}

qmpemba::twosite::TwoSiteParams twoSiteParamsFrom(const Config& cfg) {
    qmpemba::twosite::TwoSiteParams p;
    p.omega1 = cfg.getDouble("twosite.omega1");
    p.omega2 = cfg.getDouble("twosite.omega2");
    p.delta = cfg.getDouble("twosite.delta");
    p.gamma1 = cfg.getDouble("twosite.gamma1");
    p.gamma2 = cfg.getDouble("twosite.gamma2");
    p.bath1.temperature = cfg.getDouble("twosite.t1");
    p.bath1.mu = cfg.getDouble("twosite.mu1");
    p.bath2.temperature = cfg.getDouble("twosite.t2");
    p.bath2.mu = cfg.getDouble("twosite.mu2");
    if (!(p.bath1.temperature > 0.0)) {
        throw qmpemba::NonPositiveTemperature(
            "field 'twosite.t1': must be positive, got " +
            std::to_string(p.bath1.temperature));
    }
    if (!(p.bath2.temperature > 0.0)) {
        throw qmpemba::NonPositiveTemperature(
            "field 'twosite.t2': must be positive, got " +
            std::to_string(p.bath2.temperature));
    }
    if (p.omega1 == p.omega2 && p.delta == 0.0) {
        throw qmpemba::DegenerateSpectrum(
            "fields 'twosite.omega1', 'twosite.omega2', 'twosite.delta': "
            "equal site energies with zero tunneling leave the eigenmodes "
            "undefined");
    }
    return p;
}

qmpemba::twosite::GeneratorMode modeFrom(const Config& cfg) {
    const std::string mode = cfg.getString("experiment.mode", "lindblad");
    if (mode == "lindblad") {
        return qmpemba::twosite::GeneratorMode::Lindblad;
    }
    if (mode == "redfield") {
        return qmpemba::twosite::GeneratorMode::Redfield;
    }
    throw qmpemba::ConfigError(
        "field 'experiment.mode': expected lindblad or redfield, got '" +
        mode + "'");
}

qmpemba::twosite::TwoSiteState stateFrom(const Config& cfg,
                                         const std::string& section) {
    qmpemba::twosite::TwoSiteState state;
    const std::vector<double> populations =
        cfg.getDoubleList(section + ".populations");
    if (populations.size() != 4) {
        throw qmpemba::ConfigError("field '" + section +
                                   ".populations': expected 4 entries, got " +
                                   std::to_string(populations.size()));
    }
    for (int i = 0; i < 4; ++i) {
        state.populations(i) = populations[i];
    }
    if (cfg.has(section + ".coherence")) {
        const std::vector<double> coherence =
            cfg.getDoubleList(section + ".coherence");
        if (coherence.size() != 2) {
            throw qmpemba::ConfigError(
                "field '" + section +
                ".coherence': expected 2 entries (re, im), got " +
                std::to_string(coherence.size()));
        }
        state.coherence = {coherence[0], coherence[1]};
    }
    return state;
}

std::vector<double> timeGridFrom(const Config& cfg) {
    const double tMax = cfg.getDouble("time.tmax");
    const int samples = cfg.getInt("time.samples");
    if (!(tMax > 0.0)) {
        throw qmpemba::ConfigError("field 'time.tmax': must be positive");
    }
    if (samples < 2) {
        throw qmpemba::ConfigError(
            "field 'time.samples': need at least 2 samples, got " +
            std::to_string(samples));
    }
    std::vector<double> times(samples);
    for (int i = 0; i < samples; ++i) {
        times[i] = tMax * static_cast<double>(i) / (samples - 1);
    }
    return times;
}

void progressLine(const std::string& what, std::size_t count) {
    std::cerr << what << ": " << count << " rows\n";
}

// ---------------------------------------------------------------- evolve

int runEvolve(const Config& cfg, const OutputOptions& opts) {
    const std::string model = cfg.getString("experiment.model");
    qmpemba::io::Table table;
    json data = json::object();

    if (model == "qdot") {
        const qmpemba::dot::DotParams params = dotParamsFrom(cfg);
        const double prepT = cfg.getDouble("dot.prep_temperature", 1.0);
        if (!(prepT > 0.0)) {
            throw qmpemba::NonPositiveTemperature(
                "field 'dot.prep_temperature': must be positive");
        }
        const auto prepare = [&](const std::string& key) {
            const std::vector<double> mus = cfg.getDoubleList(key);
            if (mus.size() != 2) {
                throw qmpemba::ConfigError(
                    "field '" + key + "': expected 2 preparing potentials");
            }
            qmpemba::dot::BathPair baths;
            baths.muLeft = mus[0];
            baths.muRight = mus[1];
            baths.tLeft = prepT;
            baths.tRight = prepT;
            return qmpemba::dot::prepareInitialState(params, baths);
        };
        const qmpemba::dot::DotState rhoI = prepare("dot.states.muI");
        const bool twoStates = cfg.has("dot.states.muII");
        const std::vector<double> times = timeGridFrom(cfg);
        const std::vector<qmpemba::dot::DotState> trajI =
            qmpemba::dot::evolveDot(params, rhoI, times);
        std::vector<qmpemba::dot::DotState> trajII;
        if (twoStates) {
            trajII = qmpemba::dot::evolveDot(params, prepare("dot.states.muII"),
                                             times);
        }

        table.header = {"t", "I.p1", "I.p2", "I.p3", "I.p4"};
        if (twoStates) {
            for (const char* name : {"II.p1", "II.p2", "II.p3", "II.p4"}) {
                table.header.push_back(name);
            }
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::vector<std::string> row;
            row.push_back(qmpemba::io::formatDouble(times[i], opts.precision));
            for (int c = 0; c < 4; ++c) {
                row.push_back(
                    qmpemba::io::formatDouble(trajI[i](c), opts.precision));
            }
            if (twoStates) {
                for (int c = 0; c < 4; ++c) {
                    row.push_back(qmpemba::io::formatDouble(trajII[i](c),
                                                            opts.precision));
                }
            }
            table.rows.push_back(std::move(row));
        }
    } else if (model == "two-site") {
        const qmpemba::twosite::TwoSiteParams params = twoSiteParamsFrom(cfg);
        const qmpemba::twosite::GeneratorMode mode = modeFrom(cfg);
        const qmpemba::twosite::TwoSiteGenerator gen =
            qmpemba::twosite::buildGenerator(params, mode);
        const qmpemba::twosite::TwoSiteState stateI = stateFrom(cfg, "state.I");
        const bool twoStates = cfg.has("state.II.populations");
        const std::vector<double> times = timeGridFrom(cfg);

        const qmpemba::twosite::EvolveResult trajI =
            qmpemba::twosite::evolveTwoSite(gen, stateI, times);
        qmpemba::twosite::EvolveResult trajII;
        if (twoStates) {
            trajII = qmpemba::twosite::evolveTwoSite(
                gen, stateFrom(cfg, "state.II"), times);
        }

        const auto stateColumns = [](const std::string& prefix) {
            return std::vector<std::string>{
                prefix + ".p1",          prefix + ".p2",
                prefix + ".p3",          prefix + ".p4",
                prefix + ".coh_re",      prefix + ".coh_im",
                prefix + ".concurrence", prefix + ".qmi",
                prefix + ".entropy"};
        };
        table.header = {"t"};
        for (const std::string& c : stateColumns("I")) {
            table.header.push_back(c);
        }
        if (twoStates) {
            for (const std::string& c : stateColumns("II")) {
                table.header.push_back(c);
            }
        }

        // Correlation observables are defined on the site basis, which is
        // only reachable when the two site energies coincide; for tilted
        // configurations the correlation columns stay empty.
        const bool symmetricSites =
            std::abs(params.omega1 - params.omega2) <= 1e-12;
        const auto appendState = [&](std::vector<std::string>& row,
                                     const qmpemba::twosite::TwoSiteState& s) {
            for (int c = 0; c < 4; ++c) {
                row.push_back(qmpemba::io::formatDouble(s.populations(c),
                                                        opts.precision));
            }
            row.push_back(qmpemba::io::formatDouble(s.coherence.real(),
                                                    opts.precision));
            row.push_back(qmpemba::io::formatDouble(s.coherence.imag(),
                                                    opts.precision));
            if (symmetricSites) {
                const Eigen::Matrix4cd local =
                    qmpemba::twosite::globalToLocal(params, s);
                row.push_back(qmpemba::io::formatDouble(
                    qmpemba::obs::concurrenceLocal(local), opts.precision));
                row.push_back(qmpemba::io::formatDouble(
                    qmpemba::obs::quantumMutualInformation(local),
                    opts.precision));
                row.push_back(qmpemba::io::formatDouble(
                    qmpemba::obs::vonNeumannEntropy(local), opts.precision));
            } else {
                row.push_back("");
                row.push_back("");
                row.push_back("");
            }
        };
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::vector<std::string> row;
            row.push_back(qmpemba::io::formatDouble(times[i], opts.precision));
            appendState(row, trajI.states[i]);
            if (twoStates) {
                appendState(row, trajII.states[i]);
            }
            table.rows.push_back(std::move(row));
        }
        if (trajI.coherenceIgnored ||
            (twoStates && trajII.coherenceIgnored)) {
            std::cerr << "note: population-only generator ignored a nonzero "
                         "initial coherence\n";
        }
    } else {
        throw qmpemba::ConfigError(
            "field 'experiment.model': expected qdot or two-site, got '" +
            model + "'");
    }

    if (opts.format == "csv") {
        writeOutput(opts.path, qmpemba::io::writeCsv(table));
    } else {
        data["columns"] = table.header;
        json rows = json::array();
        for (const auto& row : table.rows) {
            json jrow = json::array();
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (row[c].empty()) {
                    jrow.push_back(json(nullptr));
                } else {
                    jrow.push_back(
                        json(std::strtod(row[c].c_str(), nullptr)));
                }
            }
            rows.push_back(std::move(jrow));
        }
        data["rows"] = std::move(rows);
        writeOutput(opts.path, renderJson(cfg, std::move(data)));
    }
    progressLine("evolve", table.rows.size());
    return 0;
}

// ------------------------------------------------------------------ scan

qmpemba::scan::BoundaryConfig boundaryConfigFrom(const Config& cfg,
                                                 const OutputOptions& opts) {
    qmpemba::scan::BoundaryConfig bc;
    bc.params = dotParamsFrom(cfg);
    bc.muBar = cfg.getDouble("dot.mu_bar");
    bc.bias = cfg.getDouble("dot.bias", 0.0);
    bc.prepTemperature = cfg.getDouble("dot.prep_temperature", 1.0);
    bc.tildeMu1 = cfg.getDouble("scan.mu1_tilde", 2.0);
    bc.tildeMu3 = cfg.getDouble("scan.mu3_tilde", 1.0);
    bc.mu2Lo = cfg.getDouble("scan.mu2_lo", 0.0);
    bc.mu2Hi = cfg.getDouble("scan.mu2_hi", 2.0);
    bc.mu2Samples = cfg.getInt("scan.mu2_samples", 41);
    bc.mu4Lo = cfg.getDouble("scan.mu4_lo", -50.0);
    bc.mu4Hi = cfg.getDouble("scan.mu4_hi", 50.0);
    bc.mu4Nodes = cfg.getInt("scan.mu4_nodes", 4001);
    bc.threads = opts.threads;
    return bc;
}

int runScan(const Config& cfg, const OutputOptions& opts) {
    const std::string kind = cfg.getString("scan.kind");
    qmpemba::io::Table table;
    json data = json::object();

    if (kind == "boundary") {
        const qmpemba::scan::BoundaryConfig bc = boundaryConfigFrom(cfg, opts);
        const std::vector<double> targets = cfg.getDoubleList("scan.targets");
        table.header = {"mu2", "mu4", "target"};
        json curves = json::array();
        for (double target : targets) {
            const qmpemba::scan::BoundaryCurve curve =
                qmpemba::scan::traceBoundary(bc, target);
            json jc = json::object();
            jc["target"] = quantized(target, opts.precision);
            json points = json::array();
            for (const auto& point : curve.points) {
                table.rows.push_back(
                    {qmpemba::io::formatDouble(point[0], opts.precision),
                     qmpemba::io::formatDouble(point[1], opts.precision),
                     qmpemba::io::formatDouble(target, opts.precision)});
                points.push_back(json::array(
                    {quantized(point[0], opts.precision),
                     quantized(point[1], opts.precision)}));
            }
            jc["points"] = std::move(points);
            jc["divergedBeyond"] =
                curve.divergedBeyond
                    ? quantized(*curve.divergedBeyond, opts.precision)
                    : json(nullptr);
            json skipped = json::array();
            for (double s : curve.skipped) {
                skipped.push_back(quantized(s, opts.precision));
            }
            jc["skipped"] = std::move(skipped);
            curves.push_back(std::move(jc));
        }
        data["curves"] = std::move(curves);
    } else if (kind == "threshold") {
        const qmpemba::scan::BoundaryConfig bc = boundaryConfigFrom(cfg, opts);
        const double mu2 = cfg.getDouble("scan.mu2");
        const double threshold = qmpemba::scan::thresholdBias(bc, mu2);
        table.header = {"mu2", "threshold"};
        table.rows.push_back(
            {qmpemba::io::formatDouble(mu2, opts.precision),
             qmpemba::io::formatDouble(threshold, opts.precision)});
        data["mu2"] = quantized(mu2, opts.precision);
        data["threshold"] = quantized(threshold, opts.precision);
    } else if (kind == "region") {
        const qmpemba::twosite::TwoSiteParams base = twoSiteParamsFrom(cfg);
        qmpemba::scan::RegionGrid grid;
        grid.biasLo = cfg.getDouble("scan.bias_lo");
        grid.biasHi = cfg.getDouble("scan.bias_hi");
        grid.biasSamples = cfg.getInt("scan.bias_samples");
        grid.meanLo = cfg.getDouble("scan.mean_lo");
        grid.meanHi = cfg.getDouble("scan.mean_hi");
        grid.meanSamples = cfg.getInt("scan.mean_samples");
        grid.windowOverRate = cfg.getDouble(
            "scan.window", qmpemba::scan::kCrossingWindowOverRate);
        grid.samples =
            cfg.getInt("scan.samples", qmpemba::scan::kCrossingSamples);
        grid.threads = opts.threads;
        const qmpemba::twosite::TwoSiteState stateI = stateFrom(cfg, "state.I");
        const qmpemba::twosite::TwoSiteState stateII =
            stateFrom(cfg, "state.II");
        const qmpemba::scan::RegionMap map =
            qmpemba::scan::coherenceRegionMap(base, grid, stateI, stateII);

        table.header = {"bias", "mean", "redfield", "lindblad"};
        for (std::size_t i = 0; i < map.biasAxis.size(); ++i) {
            for (std::size_t j = 0; j < map.meanAxis.size(); ++j) {
                table.rows.push_back(
                    {qmpemba::io::formatDouble(map.biasAxis[i],
                                               opts.precision),
                     qmpemba::io::formatDouble(map.meanAxis[j],
                                               opts.precision),
                     map.redfieldFlags[i][j] ? "1" : "0",
                     map.lindbladFlags[i][j] ? "1" : "0"});
            }
        }
        json biasAxis = json::array();
        for (double b : map.biasAxis) {
            biasAxis.push_back(quantized(b, opts.precision));
        }
        json meanAxis = json::array();
        for (double m : map.meanAxis) {
            meanAxis.push_back(quantized(m, opts.precision));
        }
        json red = json::array();
        json lin = json::array();
        for (std::size_t i = 0; i < map.biasAxis.size(); ++i) {
            json redRow = json::array();
            json linRow = json::array();
            for (std::size_t j = 0; j < map.meanAxis.size(); ++j) {
                redRow.push_back(map.redfieldFlags[i][j] ? 1 : 0);
                linRow.push_back(map.lindbladFlags[i][j] ? 1 : 0);
            }
            red.push_back(std::move(redRow));
            lin.push_back(std::move(linRow));
        }
        data["bias_axis"] = std::move(biasAxis);
        data["mean_axis"] = std::move(meanAxis);
        data["redfield"] = std::move(red);
        data["lindblad"] = std::move(lin);
    } else if (kind == "crossing") {
        const qmpemba::twosite::TwoSiteParams params = twoSiteParamsFrom(cfg);
        const qmpemba::twosite::TwoSiteState stateI = stateFrom(cfg, "state.I");
        const qmpemba::twosite::TwoSiteState stateII =
            stateFrom(cfg, "state.II");
        const double mean = cfg.getDouble("scan.mean");
        const std::vector<double> biases = cfg.getDoubleList("scan.bias_list");
        table.header = {"bias", "tstar"};
        json points = json::array();
        for (double bias : biases) {
            const std::optional<double> time =
                qmpemba::scan::entanglementCrossingTime(params, stateI,
                                                        stateII, bias, mean);
            table.rows.push_back(
                {qmpemba::io::formatDouble(bias, opts.precision),
                 time ? qmpemba::io::formatDouble(*time, opts.precision)
                      : std::string()});
            json point = json::object();
            point["bias"] = quantized(bias, opts.precision);
            point["time"] =
                time ? quantized(*time, opts.precision) : json(nullptr);
            points.push_back(std::move(point));
        }
        data["mean"] = quantized(mean, opts.precision);
        data["points"] = std::move(points);
    } else {
        throw qmpemba::ConfigError(
            "field 'scan.kind': expected boundary, threshold, region or "
            "crossing, got '" +
            kind + "'");
    }

    if (opts.format == "csv") {
        writeOutput(opts.path, qmpemba::io::writeCsv(table));
    } else {
        writeOutput(opts.path, renderJson(cfg, std::move(data)));
    }
    progressLine("scan", table.rows.size());
    return 0;
}

// -------------------------------------------------------------- validate

struct CheckReport {
    bool ok = true;
    std::ostringstream lines;

    void record(const std::string& name, bool pass, double residual,
                double tolerance) {
        lines << (pass ? "ok   " : "FAIL ") << name << " (residual "
              << residual << ", tolerance " << tolerance << ")\n";
        ok = ok && pass;
    }
    void fail(const std::string& name, const std::string& message) {
        lines << "FAIL " << name << ": " << message << "\n";
        ok = false;
    }
    void note(const std::string& message) { lines << "note " << message
                                                  << "\n"; }
};

int runValidate(const Config& cfg) {
    CheckReport report;

    // Dot model defaults match the four-state benchmark configuration; a
    // config file can override them.
    qmpemba::dot::DotParams dotParams;
    dotParams.epsilon0 = cfg.getDouble("dot.epsilon0", 2.0);
    dotParams.u = cfg.getDouble("dot.u", 1.25);
    dotParams.gamma = cfg.getDouble("dot.gamma", 1.0);
    {
        const double temperature = cfg.getDouble("dot.temperature", 1.0);
        if (!(temperature > 0.0)) {
            throw qmpemba::NonPositiveTemperature(
                "field 'dot.temperature': must be positive, got " +
                std::to_string(temperature));
        }
        const double muBar = cfg.getDouble("dot.mu_bar", 3.0);
        const double bias = cfg.getDouble("dot.bias", 0.0);
        dotParams.relaxBaths = {muBar + bias, muBar - bias, temperature,
                                temperature};
    }

    try {
        const qmpemba::dot::OccupationFactors f =
            qmpemba::dot::occupationFactors(dotParams);
        const Eigen::Matrix4d m = qmpemba::dot::buildTransitionMatrix(f);
        const qmpemba::dot::DotSpectralData data =
            qmpemba::dot::analyticSpectralData(f);

        Eigen::Matrix4d lambda = Eigen::Matrix4d::Zero();
        for (int i = 0; i < 4; ++i) {
            lambda(i, i) = data.eigenvalues[i];
        }
        const double right =
            (m * data.right - data.right * lambda).cwiseAbs().maxCoeff();
        const double left =
            (data.left * m - lambda * data.left).cwiseAbs().maxCoeff();
        const double pairing =
            (data.left * data.right - Eigen::Matrix4d::Identity())
                .cwiseAbs()
                .maxCoeff();
        report.record("dot right eigensystem", right <= 1e-9, right, 1e-9);
        report.record("dot left eigensystem", left <= 1e-9, left, 1e-9);
        report.record("dot mode pairing", pairing <= 1e-9, pairing, 1e-9);

        // Analytic eigenvalues versus a generic numeric decomposition of the
        // same transition matrix.
        const qmpemba::linalg::SpectralDecomposition numeric =
            qmpemba::linalg::eigendecompose(m.cast<qmpemba::linalg::Complex>());
        double spectrumGap = 0.0;
        for (int i = 0; i < 4; ++i) {
            spectrumGap = std::max(
                spectrumGap, std::abs(numeric.eigenvalues(i) -
                                      qmpemba::linalg::Complex(
                                          data.eigenvalues[i], 0.0)));
        }
        report.record("dot analytic vs numeric spectrum", spectrumGap <= 1e-9,
                      spectrumGap, 1e-9);

        // Trace conservation and closed-form versus stepped integration.
        const qmpemba::dot::DotState rho0 =
            qmpemba::dot::prepareInitialState(dotParams, {2.0, 2.0, 1.0, 1.0});
        std::vector<double> times;
        for (int i = 0; i <= 200; ++i) {
            times.push_back(0.05 * i);
        }
        const std::vector<qmpemba::dot::DotState> traj =
            qmpemba::dot::evolveDot(dotParams, rho0, times);
        double traceDrift = 0.0;
        for (const auto& state : traj) {
            traceDrift = std::max(traceDrift, std::abs(state.sum() - 1.0));
        }
        report.record("dot trace conservation", traceDrift <= 1e-9, traceDrift,
                      1e-9);

        const qmpemba::linalg::CMatrix generator =
            (dotParams.gamma * m).cast<qmpemba::linalg::Complex>();
        const Eigen::VectorXcd stepped = qmpemba::linalg::rk4Integrate(
            [&generator](const qmpemba::linalg::CVector& v) {
                return qmpemba::linalg::CVector(generator * v);
            },
            rho0.cast<qmpemba::linalg::Complex>(), times.back(), 1e-3);
        const double stepGap =
            (stepped - traj.back().cast<qmpemba::linalg::Complex>())
                .cwiseAbs()
                .maxCoeff();
        report.record("dot closed-form vs stepped integration",
                      stepGap <= 1e-8, stepGap, 1e-8);
    } catch (const qmpemba::Error& e) {
        report.fail("dot checks", e.what());
    }

    // Two-site defaults match the symmetric weak-coupling benchmark; a config
    // can override them.
    try {
        qmpemba::twosite::TwoSiteParams tsParams;
        tsParams.omega1 = cfg.getDouble("twosite.omega1", 1.0);
        tsParams.omega2 = cfg.getDouble("twosite.omega2", 1.0);
        tsParams.delta = cfg.getDouble("twosite.delta", 0.05);
        tsParams.gamma1 = cfg.getDouble("twosite.gamma1", 0.05);
        tsParams.gamma2 = cfg.getDouble("twosite.gamma2", 0.05);
        tsParams.bath1.temperature = cfg.getDouble("twosite.t1", 1.0);
        tsParams.bath1.mu = cfg.getDouble("twosite.mu1", 0.1);
        tsParams.bath2.temperature = cfg.getDouble("twosite.t2", 1.0);
        tsParams.bath2.mu = cfg.getDouble("twosite.mu2", 3.0);
        if (!(tsParams.bath1.temperature > 0.0)) {
            throw qmpemba::NonPositiveTemperature(
                "field 'twosite.t1': must be positive, got " +
                std::to_string(tsParams.bath1.temperature));
        }
        if (!(tsParams.bath2.temperature > 0.0)) {
            throw qmpemba::NonPositiveTemperature(
                "field 'twosite.t2': must be positive, got " +
                std::to_string(tsParams.bath2.temperature));
        }
        if (tsParams.omega1 == tsParams.omega2 && tsParams.delta == 0.0) {
            throw qmpemba::DegenerateSpectrum(
                "fields 'twosite.omega1', 'twosite.omega2', 'twosite.delta': "
                "equal site energies with zero tunneling leave the eigenmodes "
                "undefined");
        }

        const bool symmetric =
            tsParams.omega1 == tsParams.omega2 &&
            tsParams.gamma1 == tsParams.gamma2;

        for (const auto mode : {qmpemba::twosite::GeneratorMode::Lindblad,
                                 qmpemba::twosite::GeneratorMode::Redfield}) {
            const char* name =
                mode == qmpemba::twosite::GeneratorMode::Lindblad
                    ? "lindblad"
                    : "redfield";
            const qmpemba::twosite::TwoSiteGenerator gen =
                qmpemba::twosite::buildGenerator(tsParams, mode);
            const qmpemba::linalg::SpectralDecomposition dec =
                qmpemba::linalg::eigendecompose(gen.matrix);
            report.record(std::string("two-site ") + name +
                              " spectral residual",
                          dec.residual <= 1e-9, dec.residual, 1e-9);

            if (symmetric) {
                // Population sector rates come in the fixed ladder
                // {0, -2g, -2g, -4g}; the coherence sector adds -2g +/- 2Di.
                const double g = tsParams.gamma1;
                std::vector<qmpemba::linalg::Complex> expected = {
                    {0.0, 0.0}, {-2.0 * g, 0.0}, {-2.0 * g, 0.0},
                    {-4.0 * g, 0.0}};
                if (mode == qmpemba::twosite::GeneratorMode::Redfield) {
                    expected.push_back({-2.0 * g, 2.0 * tsParams.delta});
                    expected.push_back({-2.0 * g, -2.0 * tsParams.delta});
                }
                // Degenerate real parts make a lexicographic sort pair the
                // lists unreliably; each computed rate greedily claims the
                // nearest unclaimed expected one instead. The expected
                // clusters sit 2g or 2*delta apart, far above tolerance.
                std::vector<bool> used(expected.size(), false);
                double gap = 0.0;
                for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
                    double best = 1e300;
                    std::size_t bestIdx = 0;
                    for (std::size_t j = 0; j < expected.size(); ++j) {
                        if (used[j]) continue;
                        const double dist =
                            std::abs(dec.eigenvalues(i) - expected[j]);
                        if (dist < best) {
                            best = dist;
                            bestIdx = j;
                        }
                    }
                    used[bestIdx] = true;
                    gap = std::max(gap, best);
                }
                report.record(std::string("two-site ") + name +
                                  " rate ladder",
                              gap <= 1e-9, gap, 1e-9);
            } else {
                report.note(std::string("two-site ") + name +
                            " rate ladder skipped (asymmetric parameters)");
            }

            // Trace conservation along a representative trajectory.
            qmpemba::twosite::TwoSiteState s0;
            s0.populations << 0.1, 0.25, 0.65, 0.0;
            if (mode == qmpemba::twosite::GeneratorMode::Redfield) {
                s0.coherence = {0.2, 0.0};
            }
            std::vector<double> times;
            const double horizon = 50.0 / tsParams.gamma1;
            for (int i = 0; i <= 200; ++i) {
                times.push_back(horizon * i / 200.0);
            }
            const qmpemba::twosite::EvolveResult result =
                qmpemba::twosite::evolveTwoSite(gen, s0, times);
            double traceDrift = 0.0;
            for (const auto& state : result.states) {
                traceDrift = std::max(
                    traceDrift, std::abs(state.populations.sum() - 1.0));
            }
            report.record(std::string("two-site ") + name +
                              " trace conservation",
                          traceDrift <= 1e-9, traceDrift, 1e-9);
        }

        if (symmetric) {
            // Mode-weight rows reproduce their rates on the population block.
            const qmpemba::twosite::TwoSiteGenerator gen =
                qmpemba::twosite::buildGenerator(
                    tsParams, qmpemba::twosite::GeneratorMode::Lindblad);
            const Eigen::Matrix4d delta =
                qmpemba::twosite::deltaMatrix(tsParams);
            const Eigen::Matrix4d block = gen.matrix.real().topLeftCorner(4, 4);
            const double g = tsParams.gamma1;
            const double rates[4] = {-4.0 * g, -2.0 * g, -2.0 * g, 0.0};
            double residual = 0.0;
            for (int r = 0; r < 4; ++r) {
                const Eigen::RowVector4d row = delta.row(r);
                residual = std::max(
                    residual,
                    (row * block - rates[r] * row).cwiseAbs().maxCoeff());
            }
            report.record("two-site mode-weight rows", residual <= 1e-9,
                          residual, 1e-9);

            // Basis change round-trip.
            qmpemba::twosite::TwoSiteState s0;
            s0.populations << 0.1, 0.25, 0.65, 0.0;
            s0.coherence = {0.2, -0.05};
            const Eigen::Matrix4cd local =
                qmpemba::twosite::globalToLocal(tsParams, s0);
            const qmpemba::twosite::TwoSiteState back =
                qmpemba::twosite::localToGlobal(local);
            const double roundTrip = std::max(
                (back.populations - s0.populations).cwiseAbs().maxCoeff(),
                std::abs(back.coherence - s0.coherence));
            report.record("two-site basis round-trip", roundTrip <= 1e-12,
                          roundTrip, 1e-12);
        } else {
            report.note(
                "two-site mode-weight and basis checks skipped (asymmetric "
                "parameters)");
        }
    } catch (const qmpemba::Error& e) {
        report.fail("two-site checks", e.what());
    }

    std::cout << report.lines.str();
    std::cout << (report.ok ? "validate: all checks passed\n"
                            : "validate: FAILURES detected\n");
    return report.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxation-crossing engine for open fermionic systems"};
    app.require_subcommand(1);

    std::string configPath;
    std::string outPath;
    std::string format;
    int precision = -1;
    int threads = -1;

    const auto addCommon = [&](CLI::App* sub) {
        sub->add_option("--config", configPath, "Path to the config file");
        sub->add_option("--out", outPath, "Output file (default: stdout)");
        sub->add_option("--format", format, "Output format: csv or json");
        sub->add_option("--precision", precision,
                        "Significant digits for output values (6..17)");
        sub->add_option("--threads", threads, "Worker threads for scans");
    };

    CLI::App* evolve = app.add_subcommand(
        "evolve", "Relax initial states and write trajectories");
    CLI::App* scanCmd = app.add_subcommand(
        "scan", "Trace boundaries, thresholds, region maps, or crossing "
                "curves");
    CLI::App* validate = app.add_subcommand(
        "validate", "Run the internal consistency suite");
    addCommon(evolve);
    addCommon(scanCmd);
    addCommon(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg;
        if (!configPath.empty()) {
            cfg = Config::parseFile(configPath);
        } else if (!validate->parsed()) {
            throw qmpemba::ConfigError(
                "--config is required for this subcommand");
        }
        if (!outPath.empty()) {
            cfg.set("output.path", outPath);
        }
        if (!format.empty()) {
            cfg.set("output.format", format);
        }
        if (precision >= 0) {
            cfg.set("output.precision", std::to_string(precision));
        }
        if (threads >= 0) {
            cfg.set("output.threads", std::to_string(threads));
        }
        const OutputOptions opts = outputOptionsFrom(cfg);

        if (evolve->parsed()) {
            return runEvolve(cfg, opts);
        }
        if (scanCmd->parsed()) {
            return runScan(cfg, opts);
        }
        return runValidate(cfg);
    } catch (const qmpemba::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
