#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "qmpemba/dot.hpp"
#include "qmpemba/errors.hpp"
#include "qmpemba/observables.hpp"
#include "qmpemba/twosite.hpp"

namespace qmpemba::scan {

// Crossing search window: trajectories are sampled on (0, 50/gamma] with
// this many uniform samples before bisection refinement.
inline constexpr double kCrossingWindowOverRate = 50.0;
inline constexpr int kCrossingSamples = 2000;

// Refined crossings satisfy |A(t*) - B(t*)| <= 1e-9 * max |series value|.
inline constexpr double kCrossingTolerance = 1e-9;

// Samples whose difference lies within this fraction of the series scale
// are treated as sign-indeterminate: double precision cannot certify which
// side of zero they sit on, so sign changes between such samples are not
// counted as crossings. Trajectories assembled from an eigendecomposition
// carry relative errors around 1e-14; the floor leaves two orders of
// margin above that while staying far below any resolvable crossing.
inline constexpr double kCrossingNoiseFloor = 1e-12;

// Boundary points satisfy |criterion - target| <= 1e-6.
inline constexpr double kBoundaryTolerance = 1e-6;

// The divergence-onset bias is located to 1e-3.
inline constexpr double kThresholdTolerance = 1e-3;

// A sign change of the difference of two observable trajectories.
// direction is the sign of d(A-B)/dt at the crossing: +1 when A overtakes
// B from below, -1 when it falls through from above.
struct Crossing {
    double time = 0.0;
    int direction = 0;
};

// Locates every sign change of A - B on the shared time grid and refines
// each bracket by bisection. When a continuous-time difference evaluator is
// supplied, refinement drives |A(t*) - B(t*)| below 1e-9 times the largest
// sampled magnitude; without one, the zero is placed by linear
// interpolation between the bracketing samples. Crossings at t = 0 and
// tangential touches (the difference reaching zero without changing sign)
// are excluded. Throws GridMismatch when the grids differ, are shorter than
// two samples, or are not strictly increasing.
std::vector<Crossing> detectCrossings(
    const std::vector<obs::ObservableSample>& seriesA,
    const std::vector<obs::ObservableSample>& seriesB,
    const std::function<double(double)>& difference = {});

// First positive time at which the concurrence trajectories of two states
// cross, relaxing under the population-only generator with bath potentials
// (mean + bias, mean - bias). Returns nullopt when the trajectories do not
// cross within the search window.
std::optional<double> entanglementCrossingTime(
    const twosite::TwoSiteParams& params, const twosite::TwoSiteState& stateI,
    const twosite::TwoSiteState& stateII, double bias, double mean,
    double windowOverRate = kCrossingWindowOverRate,
    int samples = kCrossingSamples);

// Configuration for tracing level curves of the dot criterion ratio over
// the plane of preparing potentials. The first state is prepared at
// (tildeMu1, mu2) and the second at (tildeMu3, mu4); mu2 runs over its
// sampled range while mu4 is solved for. Relaxation happens against baths
// at muBar +/- bias with the temperatures stored in params.relaxBaths.
struct BoundaryConfig {
    dot::DotParams params;
    double muBar = 3.0;
    double bias = 0.0;
    double prepTemperature = 1.0;
    double tildeMu1 = 2.0;
    double tildeMu3 = 1.0;
    double mu2Lo = 0.0;
    double mu2Hi = 2.0;
    int mu2Samples = 41;
    double mu4Lo = -50.0;
    double mu4Hi = 50.0;
    int mu4Nodes = 4001;
    int threads = 1;
};

// A traced level curve. points are (mu2, mu4) pairs ordered by mu2; skipped
// lists the mu2 samples where no solution exists in [mu4Lo, mu4Hi];
// divergedBeyond is the smallest sampled mu2 from which the curve never
// returns (every larger sample is unsolvable).
struct BoundaryCurve {
    std::vector<std::array<double, 2>> points;
    double target = 0.0;
    std::optional<double> divergedBeyond;
    std::vector<double> skipped;
};

// Traces criterion = target over the preparing-potential plane by
// root-finding in mu4 at each sampled mu2. Every accepted point satisfies
// |criterion - target| <= 1e-6 on re-evaluation (or closes the curve at a
// point where numerator and denominator vanish together). When several
// roots exist, the branch nearest the previous point is followed.
BoundaryCurve traceBoundary(const BoundaryConfig& config, double target);

// Smallest bias at which the criterion = -1 curve stops being solvable at
// the fixed mu2, located by a coarse upward scan followed by bisection to
// 1e-3. Throws NotFound when the curve is unsolvable already at zero bias
// or stays solvable for every bias up to 20.
double thresholdBias(const BoundaryConfig& config, double mu2Fixed);

// Grid over (bias, mean) bath-potential offsets for the region map.
struct RegionGrid {
    double biasLo = 0.0;
    double biasHi = 2.0;
    int biasSamples = 21;
    double meanLo = 0.5;
    double meanHi = 3.0;
    int meanSamples = 21;
    double windowOverRate = kCrossingWindowOverRate;
    int samples = kCrossingSamples;
    int threads = 1;
};

// Crossing flags on the (bias, mean) grid, indexed [biasIdx][meanIdx],
// for the coherence-coupled generator and its population-only counterpart.
struct RegionMap {
    std::vector<double> biasAxis;
    std::vector<double> meanAxis;
    std::vector<std::vector<bool>> redfieldFlags;
    std::vector<std::vector<bool>> lindbladFlags;
};

// Evolves the two states at every grid node with bath potentials
// (mean - bias, mean + bias) and flags whether their upper-mode population
// trajectories cross, under both generator modes. Deterministic and
// independent of the number of threads.
RegionMap coherenceRegionMap(const twosite::TwoSiteParams& base,
                             const RegionGrid& grid,
                             const twosite::TwoSiteState& stateI,
                             const twosite::TwoSiteState& stateII);

}  // namespace qmpemba::scan
