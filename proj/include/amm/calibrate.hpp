#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "amm/core.hpp"
#include "amm/solver.hpp"

namespace amm {

/// N x m matrix of i.i.d. uniform +-1 entries. m = 0 gives the empty set.
std::optional<AttributeMatrix> gen_noise(std::size_t n_images, std::size_t m, std::uint64_t seed);

struct InterpolationCurve {
  DistanceKind distance_kind = DistanceKind::Cvx;
  std::vector<std::size_t> grid;      // noise counts, grid[0] == 0
  std::vector<double> mean_delta;     // mean distance per grid point
  std::vector<double> isotonic_delta; // nondecreasing fit of mean_delta
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t solves = 0;             // simplex solves performed (cvx)
  std::size_t nonconverged = 0;
};

struct CurveOptions {
  std::size_t trials = 5;
  SimplexOptions simplex;
  unsigned workers = 1;
};

/// Seed for the noise draw of one (grid point, trial) task. The draw depends
/// only on the noise count, so different curves built from the same seed
/// share their noise sets.
std::uint64_t noise_seed(std::uint64_t curve_seed, std::size_t m, std::size_t trial);

/// Distance from S2 plus m noise columns to S1, averaged over seeded trials,
/// for every m in `grid` (m = 0 is evaluated once).
InterpolationCurve interpolation_curve(const MeaningfulSplit& split, const std::vector<std::size_t>& grid,
                                       DistanceKind kind, std::uint64_t seed, const CurveOptions& options = {});

/// Pool-adjacent-violators fit with the first point held fixed: the m = 0
/// sample is exact, so later points are fit isotonically and clipped from
/// below at that anchor.
std::vector<double> anchored_isotonic(const std::vector<double>& values);

/// Plain unweighted isotonic (nondecreasing) regression.
std::vector<double> isotonic_regression(const std::vector<double>& values);

struct Inversion {
  double g_star = 0.0;
  bool saturated = false;
};

/// Smallest interpolated noise count whose isotonic curve value reaches
/// delta_d, clamped to the grid range.
Inversion fit_invert(const InterpolationCurve& curve, double delta_d);

/// (1 - g* / (|S2| + g*)) * 100.
double gamma_score(double g_star, std::size_t s2_size);

/// Equal-weight mean of the two calibrated scores. Throws OutOfRange.
double combined_score(double gamma_cvx, double gamma_jp);

/// Default noise grid {0,1,2,4,...,256} capped at max(256, 4 |S2|), with the
/// cap appended when it is not already a grid point.
std::vector<std::size_t> default_grid(std::size_t s2_size);

struct EvaluationConfig {
  double split_ratio = 0.5;
  std::uint64_t master_seed = 20170;
  std::vector<std::size_t> grid;  // empty: default_grid(|S2|)
  std::size_t trials = 5;
  SimplexOptions simplex;
  ZeroPolicy zero_policy = ZeroPolicy::MapToPlus;
  std::vector<DistanceKind> kinds{DistanceKind::Cvx, DistanceKind::Jp};
  bool distance_to_full_set = false;
  unsigned workers = 1;  // not part of the report; results do not depend on it
};

/// Seeds derived from the master seed by fixed offsets.
std::uint64_t split_seed(std::uint64_t master_seed);
std::uint64_t curve_seed(std::uint64_t master_seed);

/// Throws InvalidConfig when a field is out of its documented range.
void validate_config(const EvaluationConfig& config);

struct CalibrationResult {
  DistanceKind kind = DistanceKind::Cvx;
  double g_star = 0.0;
  double gamma = 100.0;
  bool saturated = false;
  double delta_d = 0.0;
  std::size_t nonconverged_d = 0;
  InterpolationCurve curve;
};

struct MeaningfulnessReport {
  double gamma_cvx = 0.0;
  double gamma_jp = 0.0;
  double gamma_tilde = 0.0;
  std::vector<CalibrationResult> results;  // one per configured kind
  EvaluationConfig config;                 // with grid resolved
  std::vector<std::size_t> s1_columns;
  std::vector<std::size_t> s2_columns;
  std::size_t n_images = 0;
  std::size_t n_meaningful = 0;
  std::size_t n_discovered = 0;
  bool degraded = false;
  std::map<DistanceKind, double> delta_full_set;  // filled when requested

  const CalibrationResult& result(DistanceKind kind) const;
};

/// Splits S and builds the interpolation curves once; evaluate() then scores
/// any number of discovered sets against them.
class MeaningfulnessCalibrator {
 public:
  MeaningfulnessCalibrator(AttributeMatrix s, EvaluationConfig config);

  MeaningfulnessReport evaluate(const AttributeMatrix& d) const;

  const MeaningfulSplit& split() const noexcept { return split_; }
  const EvaluationConfig& config() const noexcept { return config_; }
  const InterpolationCurve& curve(DistanceKind kind) const;

 private:
  AttributeMatrix s_;
  EvaluationConfig config_;
  MeaningfulSplit split_;
  MeaningfulSubspace reference_;
  std::vector<InterpolationCurve> curves_;  // parallel to config_.kinds
};

MeaningfulnessReport evaluate_meaningfulness(const AttributeMatrix& s, const AttributeMatrix& d,
                                             const EvaluationConfig& config = {});

}  // namespace amm
