#include "amm/calibrate.hpp"

#include <algorithm>
#include <cmath>

#include "amm/error.hpp"
#include "amm/parallel.hpp"
#include "amm/rng.hpp"

namespace amm {

std::optional<AttributeMatrix> gen_noise(std::size_t n_images, std::size_t m, std::uint64_t seed) {
  if (m == 0) return std::nullopt;
  if (n_images == 0) throw Error(ErrorKind::EmptyMatrix, "noise over zero images");
  SignMatrix entries(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(m));
  Rng rng(seed);
  std::int8_t* out = entries.data();
  const std::size_t total = n_images * m;
  for (std::size_t base = 0; base < total; base += 64) {
    std::uint64_t bits = rng.next();
    const std::size_t end = std::min(total, base + 64);
    for (std::size_t i = base; i < end; ++i, bits >>= 1) out[i] = (bits & 1U) ? std::int8_t{1} : std::int8_t{-1};
  }
  return AttributeMatrix(std::move(entries));
}

std::uint64_t noise_seed(std::uint64_t curve_seed, std::size_t m, std::size_t trial) {
  return derive_seed(curve_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
}

std::vector<double> isotonic_regression(const std::vector<double>& values) {
  // Blocks of (mean, weight), merged while they violate the ordering.
  std::vector<double> means;
  std::vector<std::size_t> weights;
  for (double v : values) {
    means.push_back(v);
    weights.push_back(1);
    while (means.size() > 1 && means[means.size() - 2] > means.back()) {
      const std::size_t w = weights.back() + weights[weights.size() - 2];
      const double merged = (means[means.size() - 2] * static_cast<double>(weights[weights.size() - 2]) +
                             means.back() * static_cast<double>(weights.back())) /
                            static_cast<double>(w);
      means.pop_back();
      weights.pop_back();
      means.back() = merged;
      weights.back() = w;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (std::size_t b = 0; b < means.size(); ++b) fitted.insert(fitted.end(), weights[b], means[b]);
  return fitted;
}

std::vector<double> anchored_isotonic(const std::vector<double>& values) {
  if (values.empty()) return {};
  std::vector<double> out{values.front()};
  const std::vector<double> tail =
      isotonic_regression(std::vector<double>(values.begin() + 1, values.end()));
  for (double v : tail) out.push_back(std::max(values.front(), v));
  return out;
}

InterpolationCurve interpolation_curve(const MeaningfulSplit& split, const std::vector<std::size_t>& grid,
                                       DistanceKind kind, std::uint64_t seed, const CurveOptions& options) {
  if (grid.empty() || grid.front() != 0) throw Error(ErrorKind::InvalidArgument, "noise grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw Error(ErrorKind::InvalidArgument, "noise grid must be strictly ascending");
  }
  if (options.trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be at least 1");
  if (split.s1.n_images() != split.s2.n_images()) {
    throw Error(ErrorKind::LengthMismatch, "split halves cover different image sets");
  }

  const MeaningfulSubspace reference(split.s1);
  const std::size_t n_images = split.s2.n_images();

  // Task 0 is the noise-free point; the rest are (grid point, trial) pairs.
  const std::size_t tasks = 1 + (grid.size() - 1) * options.trials;
  std::vector<DistanceValue> values(tasks);
  parallel_for(tasks, options.workers, [&](std::size_t task) {
    if (task == 0) {
      values[0] = reference.distance(kind, split.s2, options.simplex);
      return;
    }
    const std::size_t point = 1 + (task - 1) / options.trials;
    const std::size_t trial = (task - 1) % options.trials;
    const std::size_t m = grid[point];
    const AttributeMatrix interpolated = hconcat(split.s2, gen_noise(n_images, m, noise_seed(seed, m, trial)));
    values[task] = reference.distance(kind, interpolated, options.simplex);
  });

  InterpolationCurve curve;
  curve.distance_kind = kind;
  curve.grid = grid;
  curve.trials = options.trials;
  curve.seed = seed;
  curve.mean_delta.push_back(values[0].value);
  for (std::size_t point = 1; point < grid.size(); ++point) {
    double sum = 0.0;
    for (std::size_t trial = 0; trial < options.trials; ++trial) sum += values[1 + (point - 1) * options.trials + trial].value;
    curve.mean_delta.push_back(sum / static_cast<double>(options.trials));
  }
  if (kind == DistanceKind::Cvx) {
    for (const DistanceValue& v : values) {
      curve.solves += v.per_column.size();
      curve.nonconverged += v.nonconverged;
    }
  }
  curve.isotonic_delta = anchored_isotonic(curve.mean_delta);
  return curve;
}

Inversion fit_invert(const InterpolationCurve& curve, double delta_d) {
  const std::vector<double>& y = curve.isotonic_delta;
  const std::vector<std::size_t>& x = curve.grid;
  if (y.empty() || y.size() != x.size()) throw Error(ErrorKind::InvalidArgument, "curve has no isotonic fit");
  if (delta_d <= y.front()) return {0.0, false};
  if (delta_d > y.back()) return {static_cast<double>(x.back()), true};
  std::size_t i = 1;
  while (y[i] < delta_d) ++i;
  const double x0 = static_cast<double>(x[i - 1]);
  const double x1 = static_cast<double>(x[i]);
  const double g = x0 + (delta_d - y[i - 1]) / (y[i] - y[i - 1]) * (x1 - x0);
  return {g, false};
}

double gamma_score(double g_star, std::size_t s2_size) {
  if (s2_size == 0) throw Error(ErrorKind::InvalidArgument, "|S2| must be at least 1");
  if (!(g_star >= 0.0)) throw Error(ErrorKind::InvalidArgument, "g* must be nonnegative");
  const double size = static_cast<double>(s2_size);
  return (1.0 - g_star / (size + g_star)) * 100.0;
}

double combined_score(double gamma_cvx, double gamma_jp) {
  auto in_range = [](double g) { return g >= 0.0 && g <= 100.0; };
  if (!in_range(gamma_cvx) || !in_range(gamma_jp)) {
    throw Error(ErrorKind::OutOfRange, "calibrated scores must lie in [0,100]");
  }
  return 0.5 * gamma_cvx + 0.5 * gamma_jp;
}

std::vector<std::size_t> default_grid(std::size_t s2_size) {
  const std::size_t cap = std::max<std::size_t>(256, 4 * s2_size);
  std::vector<std::size_t> grid{0};
  for (std::size_t m = 1; m <= cap; m *= 2) grid.push_back(m);
  if (grid.back() != cap) grid.push_back(cap);
  return grid;
}

std::uint64_t split_seed(std::uint64_t master_seed) { return master_seed + 1; }
std::uint64_t curve_seed(std::uint64_t master_seed) { return master_seed + 2; }

void validate_config(const EvaluationConfig& config) {
  if (!(config.split_ratio > 0.0 && config.split_ratio < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "split_ratio must lie in (0,1)");
  }
  if (config.trials == 0) throw Error(ErrorKind::InvalidConfig, "trials must be at least 1");
  if (!(config.simplex.tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "tol must be positive");
  if (config.simplex.max_iter == 0) throw Error(ErrorKind::InvalidConfig, "max_iter must be positive");
  if (!config.grid.empty()) {
    if (config.grid.front() != 0) throw Error(ErrorKind::InvalidConfig, "grid must start at 0");
    for (std::size_t i = 1; i < config.grid.size(); ++i) {
      if (config.grid[i] <= config.grid[i - 1]) throw Error(ErrorKind::InvalidConfig, "grid must be strictly ascending");
    }
  }
  const auto has = [&](DistanceKind k) {
    return std::find(config.kinds.begin(), config.kinds.end(), k) != config.kinds.end();
  };
  if (!has(DistanceKind::Cvx) || !has(DistanceKind::Jp)) {
    throw Error(ErrorKind::InvalidConfig, "distance kinds must include cvx and jp");
  }
  for (std::size_t i = 0; i < config.kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < config.kinds.size(); ++j) {
      if (config.kinds[i] == config.kinds[j]) throw Error(ErrorKind::InvalidConfig, "duplicate distance kind");
    }
  }
}

const CalibrationResult& MeaningfulnessReport::result(DistanceKind kind) const {
  for (const CalibrationResult& r : results)
    if (r.kind == kind) return r;
  throw Error(ErrorKind::InvalidArgument, "report has no " + to_string(kind) + " result");
}

namespace {

EvaluationConfig resolved(EvaluationConfig config, std::size_t s_attrs) {
  validate_config(config);
  if (config.grid.empty()) {
    const auto s1 = static_cast<std::size_t>(std::llround(config.split_ratio * static_cast<double>(s_attrs)));
    config.grid = default_grid(s_attrs - std::min(s1, s_attrs));
  }
  return config;
}

}  // namespace

MeaningfulnessCalibrator::MeaningfulnessCalibrator(AttributeMatrix s, EvaluationConfig config)
    : s_(std::move(s)),
      config_(resolved(std::move(config), s_.n_attrs())),
      split_(split_meaningful(s_, config_.split_ratio, split_seed(config_.master_seed))),
      reference_(split_.s1) {
  const CurveOptions options{config_.trials, config_.simplex, config_.workers};
  for (DistanceKind kind : config_.kinds) {
    curves_.push_back(interpolation_curve(split_, config_.grid, kind, curve_seed(config_.master_seed), options));
  }
}

const InterpolationCurve& MeaningfulnessCalibrator::curve(DistanceKind kind) const {
  for (std::size_t i = 0; i < config_.kinds.size(); ++i)
    if (config_.kinds[i] == kind) return curves_[i];
  throw Error(ErrorKind::InvalidArgument, "no " + to_string(kind) + " curve configured");
}

MeaningfulnessReport MeaningfulnessCalibrator::evaluate(const AttributeMatrix& d) const {
  if (s_.n_images() != d.n_images()) {
    throw Error(ErrorKind::LengthMismatch, "meaningful set covers " + std::to_string(s_.n_images()) +
                                               " images, discovered set " + std::to_string(d.n_images()));
  }
  MeaningfulnessReport report;
  report.config = config_;
  report.s1_columns = split_.s1_columns;
  report.s2_columns = split_.s2_columns;
  report.n_images = s_.n_images();
  report.n_meaningful = s_.n_attrs();
  report.n_discovered = d.n_attrs();

  for (std::size_t i = 0; i < config_.kinds.size(); ++i) {
    CalibrationResult result;
    result.kind = config_.kinds[i];
    result.curve = curves_[i];
    const DistanceValue measured = reference_.distance(result.kind, d, config_.simplex);
    result.delta_d = measured.value;
    result.nonconverged_d = measured.nonconverged;
    const Inversion inv = fit_invert(result.curve, result.delta_d);
    result.g_star = inv.g_star;
    result.saturated = inv.saturated;
    result.gamma = gamma_score(inv.g_star, split_.s2.n_attrs());
    if (result.curve.solves > 0 &&
        static_cast<double>(result.curve.nonconverged) > 0.1 * static_cast<double>(result.curve.solves)) {
      report.degraded = true;
    }
    report.results.push_back(std::move(result));
  }

  report.gamma_cvx = report.result(DistanceKind::Cvx).gamma;
  report.gamma_jp = report.result(DistanceKind::Jp).gamma;
  report.gamma_tilde = combined_score(report.gamma_cvx, report.gamma_jp);

  if (config_.distance_to_full_set) {
    const MeaningfulSubspace full(s_);
    for (DistanceKind kind : config_.kinds) report.delta_full_set[kind] = full.distance(kind, d, config_.simplex).value;
  }
  return report;
}

MeaningfulnessReport evaluate_meaningfulness(const AttributeMatrix& s, const AttributeMatrix& d,
                                             const EvaluationConfig& config) {
  if (s.n_images() != d.n_images()) {
    throw Error(ErrorKind::LengthMismatch, "meaningful set covers " + std::to_string(s.n_images()) +
                                               " images, discovered set " + std::to_string(d.n_images()));
  }
  return MeaningfulnessCalibrator(s, config).evaluate(d);
}

}  // namespace amm
