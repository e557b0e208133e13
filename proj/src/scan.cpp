#include "qmpemba/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>

namespace qmpemba::scan {

namespace {

constexpr int kBisectIterations = 80;
constexpr double kRootDedup = 1e-9;
// Below this magnitude the ratio num/den is too noise-dominated to certify
// against the target; candidates there are rejected unless both parts sit
// at pure round-off scale (the closure floor), which only happens where the
// two preparations coincide exactly.
constexpr double kDenominatorFloor = 1e-9;
constexpr double kClosureFloor = 1e-12;
constexpr double kThresholdStep = 0.5;
constexpr double kThresholdMaxBias = 20.0;

int signOf(double x) { return (x > 0.0) - (x < 0.0); }

double gridValue(double lo, double hi, int samples, int index) {
    if (samples <= 1) {
        return lo;
    }
    return lo + (hi - lo) * static_cast<double>(index) /
                    static_cast<double>(samples - 1);
}

// Runs fn(index) over [0, count) on the requested number of threads with a
// static stripe partition, so results are identical for any thread count.
void parallelFor(int count, int threads, const std::function<void(int)>& fn) {
    const int usable = std::max(1, std::min(threads, count));
    if (usable == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(usable);
    for (int t = 0; t < usable; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < count; i += usable) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double dLo = 0.0;
    double dHi = 0.0;
};

double refineBracket(const Bracket& b,
                     const std::function<double(double)>& difference,
                     double tolerance) {
    if (!difference) {
        // Linear interpolation between the bracketing samples.
        return b.lo + b.dLo * (b.hi - b.lo) / (b.dLo - b.dHi);
    }
    double lo = b.lo;
    double hi = b.hi;
    double dLo = difference(lo);
    double dHi = difference(hi);
    if (signOf(dLo) == signOf(dHi) || signOf(dLo) == 0 || signOf(dHi) == 0) {
        // The continuous evaluator disagrees with the sampled bracket at
        // its ends (roundoff near a root); fall back to interpolation of
        // the sampled values.
        return b.lo + b.dLo * (b.hi - b.lo) / (b.dLo - b.dHi);
    }
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double dMid = difference(mid);
        if (std::abs(dMid) <= tolerance) {
            return mid;
        }
        if (signOf(dMid) == signOf(dLo)) {
            lo = mid;
            dLo = dMid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) {
            break;
        }
    }
    return mid;
}

}  // namespace

std::vector<Crossing> detectCrossings(
    const std::vector<obs::ObservableSample>& seriesA,
    const std::vector<obs::ObservableSample>& seriesB,
    const std::function<double(double)>& difference) {
    const std::size_t n = seriesA.size();
    if (n != seriesB.size()) {
        throw GridMismatch("the series have " + std::to_string(n) + " and " +
                           std::to_string(seriesB.size()) + " samples");
    }
    if (n < 2) {
        throw GridMismatch("crossing detection needs at least 2 samples");
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (seriesA[i].time != seriesB[i].time) {
            throw GridMismatch("time grids differ at sample " +
                               std::to_string(i));
        }
        if (i > 0 && !(seriesA[i].time > seriesA[i - 1].time)) {
            throw GridMismatch("time grid is not strictly increasing at "
                               "sample " +
                               std::to_string(i));
        }
        scale = std::max(scale, std::max(std::abs(seriesA[i].value),
                                         std::abs(seriesB[i].value)));
    }
    std::vector<Crossing> crossings;
    if (scale == 0.0) {
        return crossings;  // both series identically zero
    }
    const double tolerance = kCrossingTolerance * scale;
    const double noiseFloor = kCrossingNoiseFloor * scale;

    int lastSign = 0;
    std::size_t lastIdx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = seriesA[i].value - seriesB[i].value;
        if (std::abs(d) <= noiseFloor) {
            // Exact touches and sub-noise samples carry no certifiable
            // sign; they neither start nor end a crossing bracket.
            continue;
        }
        const int s = signOf(d);
        if (lastSign != 0 && s != lastSign) {
            Bracket b;
            b.lo = seriesA[lastIdx].time;
            b.hi = seriesA[i].time;
            b.dLo = seriesA[lastIdx].value - seriesB[lastIdx].value;
            b.dHi = d;
            Crossing c;
            c.time = refineBracket(b, difference, tolerance);
            c.direction = s;
            crossings.push_back(c);
        }
        lastSign = s;
        lastIdx = i;
    }
    return crossings;
}

std::optional<double> entanglementCrossingTime(
    const twosite::TwoSiteParams& params, const twosite::TwoSiteState& stateI,
    const twosite::TwoSiteState& stateII, double bias, double mean,
    double windowOverRate, int samples) {
    twosite::TwoSiteParams p = params;
    p.bath1.mu = mean + bias;
    p.bath2.mu = mean - bias;

    const twosite::TwoSiteGenerator gen =
        twosite::buildGenerator(p, twosite::GeneratorMode::Lindblad);
    const linalg::SpectralDecomposition decomp =
        linalg::eigendecompose(gen.matrix);

    const auto concurrenceAt = [&](const twosite::TwoSiteState& s0,
                                   double t) {
        linalg::CVector v0(4);
        v0 = s0.populations.cast<linalg::Complex>();
        const linalg::CVector v = linalg::propagate(decomp, v0, t);
        twosite::TwoSiteState s;
        for (int i = 0; i < 4; ++i) {
            s.populations(i) = v(i).real();
        }
        return obs::concurrenceLocal(twosite::globalToLocal(p, s));
    };

    const double horizon = windowOverRate / p.gamma1;
    std::vector<obs::ObservableSample> a;
    std::vector<obs::ObservableSample> b;
    a.reserve(samples + 1);
    b.reserve(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        const double t = horizon * static_cast<double>(i) / samples;
        a.push_back({t, concurrenceAt(stateI, t)});
        b.push_back({t, concurrenceAt(stateII, t)});
    }
    const auto difference = [&](double t) {
        return concurrenceAt(stateI, t) - concurrenceAt(stateII, t);
    };
    const std::vector<Crossing> crossings = detectCrossings(a, b, difference);
    if (crossings.empty()) {
        return std::nullopt;
    }
    return crossings.front().time;
}

namespace {

// Root solver for one mu2 sample of a boundary trace: all mu4 values in
// [mu4Lo, mu4Hi] at which the criterion equals the target, in ascending
// order.
class BoundarySolver {
  public:
    BoundarySolver(const BoundaryConfig& config, double target)
        : config_(config), target_(target) {
        relaxParams_ = config.params;
        relaxParams_.relaxBaths.muLeft = config.muBar + config.bias;
        relaxParams_.relaxBaths.muRight = config.muBar - config.bias;
    }

    std::vector<double> solve(double mu2) const {
        const dot::DotState rhoI = prepare(config_.tildeMu1, mu2);
        const auto h = [&](double mu4) {
            const dot::CriterionParts parts = partsAt(rhoI, mu4);
            return parts.num - target_ * parts.den;
        };

        std::vector<double> roots;
        const int nodes = std::max(2, config_.mu4Nodes);
        double prevMu4 = config_.mu4Lo;
        double prevH = h(prevMu4);
        maybeAcceptNode(rhoI, prevMu4, prevH, roots);
        for (int i = 1; i < nodes; ++i) {
            const double mu4 =
                gridValue(config_.mu4Lo, config_.mu4Hi, nodes, i);
            const double value = h(mu4);
            if (value == 0.0) {
                maybeAcceptNode(rhoI, mu4, value, roots);
            } else if (prevH != 0.0 && signOf(value) != signOf(prevH)) {
                double lo = prevMu4;
                double hi = mu4;
                double hLo = prevH;
                for (int iter = 0; iter < kBisectIterations; ++iter) {
                    const double mid = 0.5 * (lo + hi);
                    const double hMid = h(mid);
                    if (hMid == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if (signOf(hMid) == signOf(hLo)) {
                        lo = mid;
                        hLo = hMid;
                    } else {
                        hi = mid;
                    }
                }
                maybeAccept(rhoI, 0.5 * (lo + hi), roots);
            }
            prevMu4 = mu4;
            prevH = value;
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end(),
                                [](double x, double y) {
                                    return std::abs(x - y) < kRootDedup;
                                }),
                    roots.end());
        return roots;
    }

    dot::DotState prepare(double muA, double muB) const {
        dot::BathPair prep;
        prep.muLeft = muA;
        prep.muRight = muB;
        prep.tLeft = config_.prepTemperature;
        prep.tRight = config_.prepTemperature;
        return dot::prepareInitialState(relaxParams_, prep);
    }

    dot::CriterionParts partsAt(const dot::DotState& rhoI,
                                double mu4) const {
        const dot::DotState rhoII = prepare(config_.tildeMu3, mu4);
        return dot::criterionParts(relaxParams_, rhoI, rhoII, 2);
    }

  private:
    void maybeAcceptNode(const dot::DotState& rhoI, double mu4, double value,
                         std::vector<double>& roots) const {
        if (value == 0.0) {
            maybeAccept(rhoI, mu4, roots);
        }
    }

    // A candidate root is kept only if the criterion genuinely meets the
    // target there: either the ratio matches within 1e-6 with a resolvable
    // denominator, or both numerator and denominator vanish at round-off
    // scale (the degenerate point where the curve closes onto the locus of
    // identical preparations). Candidates whose denominator falls between
    // the closure floor and the resolvable floor are rejected: the ratio
    // there is dominated by cancellation noise and cannot be certified.
    void maybeAccept(const dot::DotState& rhoI, double mu4,
                     std::vector<double>& roots) const {
        const dot::CriterionParts parts = partsAt(rhoI, mu4);
        if (std::abs(parts.den) > kDenominatorFloor) {
            if (std::abs(parts.num / parts.den - target_) <=
                kBoundaryTolerance) {
                roots.push_back(mu4);
            }
            return;
        }
        if (std::abs(parts.den) <= kClosureFloor &&
            std::abs(parts.num) <= kClosureFloor) {
            roots.push_back(mu4);
        }
    }

    BoundaryConfig config_;
    double target_ = 0.0;
    dot::DotParams relaxParams_;
};

}  // namespace

BoundaryCurve traceBoundary(const BoundaryConfig& config, double target) {
    if (config.mu2Samples < 1) {
        throw InvalidStep("the mu2 range needs at least one sample");
    }
    if (!(config.mu2Hi >= config.mu2Lo) || !(config.mu4Hi > config.mu4Lo)) {
        throw InvalidStep("empty potential ranges in the boundary trace");
    }
    const BoundarySolver solver(config, target);

    std::vector<std::vector<double>> nodeRoots(config.mu2Samples);
    parallelFor(config.mu2Samples, config.threads, [&](int i) {
        const double mu2 =
            gridValue(config.mu2Lo, config.mu2Hi, config.mu2Samples, i);
        nodeRoots[i] = solver.solve(mu2);
    });

    BoundaryCurve curve;
    curve.target = target;
    std::optional<double> previous;
    for (int i = 0; i < config.mu2Samples; ++i) {
        const double mu2 =
            gridValue(config.mu2Lo, config.mu2Hi, config.mu2Samples, i);
        const std::vector<double>& roots = nodeRoots[i];
        if (roots.empty()) {
            curve.skipped.push_back(mu2);
            continue;
        }
        double pick = roots.front();
        if (previous) {
            for (double r : roots) {
                if (std::abs(r - *previous) < std::abs(pick - *previous)) {
                    pick = r;
                }
            }
        }
        curve.points.push_back({mu2, pick});
        previous = pick;
    }

    // The curve "diverges" past the last solvable sample when every later
    // sample has no solution.
    int firstOfTrailingRun = config.mu2Samples;
    for (int i = config.mu2Samples - 1; i >= 0; --i) {
        if (nodeRoots[i].empty()) {
            firstOfTrailingRun = i;
        } else {
            break;
        }
    }
    if (firstOfTrailingRun < config.mu2Samples) {
        curve.divergedBeyond = gridValue(config.mu2Lo, config.mu2Hi,
                                         config.mu2Samples,
                                         firstOfTrailingRun);
    }
    return curve;
}

double thresholdBias(const BoundaryConfig& config, double mu2Fixed) {
    const auto solvableAt = [&](double bias) {
        BoundaryConfig c = config;
        c.bias = bias;
        const BoundarySolver solver(c, -1.0);
        return !solver.solve(mu2Fixed).empty();
    };

    if (!solvableAt(0.0)) {
        throw NotFound(
            "the target curve is unsolvable already at zero bias for mu2=" +
            std::to_string(mu2Fixed));
    }
    double lastSolvable = 0.0;
    double firstUnsolvable = -1.0;
    for (double bias = kThresholdStep; bias <= kThresholdMaxBias + 1e-12;
         bias += kThresholdStep) {
        if (solvableAt(bias)) {
            lastSolvable = bias;
        } else {
            firstUnsolvable = bias;
            break;
        }
    }
    if (firstUnsolvable < 0.0) {
        throw NotFound("the target curve stays solvable for every bias up "
                       "to 20 at mu2=" +
                       std::to_string(mu2Fixed));
    }
    double lo = lastSolvable;
    double hi = firstUnsolvable;
    while (hi - lo > kThresholdTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (solvableAt(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

RegionMap coherenceRegionMap(const twosite::TwoSiteParams& base,
                             const RegionGrid& grid,
                             const twosite::TwoSiteState& stateI,
                             const twosite::TwoSiteState& stateII) {
    if (grid.biasSamples < 1 || grid.meanSamples < 1) {
        throw InvalidStep("the region grid needs at least one node per axis");
    }
    if (grid.samples < 2) {
        throw InvalidStep("the region grid needs at least two time samples");
    }

    RegionMap map;
    map.biasAxis.resize(grid.biasSamples);
    map.meanAxis.resize(grid.meanSamples);
    for (int i = 0; i < grid.biasSamples; ++i) {
        map.biasAxis[i] =
            gridValue(grid.biasLo, grid.biasHi, grid.biasSamples, i);
    }
    for (int j = 0; j < grid.meanSamples; ++j) {
        map.meanAxis[j] =
            gridValue(grid.meanLo, grid.meanHi, grid.meanSamples, j);
    }
    map.redfieldFlags.assign(grid.biasSamples,
                             std::vector<bool>(grid.meanSamples, false));
    map.lindbladFlags.assign(grid.biasSamples,
                             std::vector<bool>(grid.meanSamples, false));

    const int nodeCount = grid.biasSamples * grid.meanSamples;
    // Flags are gathered into byte arrays first: vector<bool> packs bits,
    // which parallel writers must not share.
    std::vector<std::uint8_t> redFlat(nodeCount, 0);
    std::vector<std::uint8_t> linFlat(nodeCount, 0);
    parallelFor(nodeCount, grid.threads, [&](int node) {
        const int i = node / grid.meanSamples;
        const int j = node % grid.meanSamples;
        twosite::TwoSiteParams p = base;
        p.bath1.mu = map.meanAxis[j] - map.biasAxis[i];
        p.bath2.mu = map.meanAxis[j] + map.biasAxis[i];
        const double horizon = grid.windowOverRate / p.gamma1;

        for (const twosite::GeneratorMode mode :
             {twosite::GeneratorMode::Redfield,
              twosite::GeneratorMode::Lindblad}) {
            const twosite::TwoSiteGenerator gen =
                twosite::buildGenerator(p, mode);
            const linalg::SpectralDecomposition decomp =
                linalg::eigendecompose(gen.matrix);
            const bool full = (mode == twosite::GeneratorMode::Redfield);
            const Eigen::Index dim = full ? 6 : 4;

            const auto pack = [&](const twosite::TwoSiteState& s) {
                linalg::CVector v(dim);
                v.head<4>() = s.populations.cast<linalg::Complex>();
                if (full) {
                    v(4) = s.coherence;
                    v(5) = std::conj(s.coherence);
                }
                return v;
            };
            const linalg::CVector vI = pack(stateI);
            const linalg::CVector vII = pack(stateII);

            const auto upperPopulation = [&](const linalg::CVector& v0,
                                             double t) {
                return linalg::propagate(decomp, v0, t)(2).real();
            };

            std::vector<obs::ObservableSample> a;
            std::vector<obs::ObservableSample> b;
            a.reserve(grid.samples + 1);
            b.reserve(grid.samples + 1);
            for (int k = 0; k <= grid.samples; ++k) {
                const double t =
                    horizon * static_cast<double>(k) / grid.samples;
                a.push_back({t, upperPopulation(vI, t)});
                b.push_back({t, upperPopulation(vII, t)});
            }
            const auto difference = [&](double t) {
                return upperPopulation(vI, t) - upperPopulation(vII, t);
            };
            const bool flag = !detectCrossings(a, b, difference).empty();
            if (full) {
                redFlat[node] = flag ? 1 : 0;
            } else {
                linFlat[node] = flag ? 1 : 0;
            }
        }
    });
    for (int node = 0; node < nodeCount; ++node) {
        const int i = node / grid.meanSamples;
        const int j = node % grid.meanSamples;
        map.redfieldFlags[i][j] = redFlat[node] != 0;
        map.lindbladFlags[i][j] = linFlat[node] != 0;
    }
    return map;
}

}  // namespace qmpemba::scan
