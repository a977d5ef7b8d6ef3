#include "amm/synth.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "amm/calibrate.hpp"
#include "amm/error.hpp"
#include "amm/rng.hpp"

namespace amm {

AttributeMatrix decision_boundary_set(const DecisionBoundarySpec& spec) {
  if (spec.n_images == 0 || spec.n_attrs == 0 || spec.latent_dim == 0) {
    throw Error(ErrorKind::InvalidArgument, "decision boundary set needs positive sizes");
  }
  if (!std::isfinite(spec.offset) || !(spec.offset_scale >= 0.0 && std::isfinite(spec.offset_scale))) {
    throw Error(ErrorKind::InvalidArgument, "offset and offset_scale must be finite, offset_scale nonnegative");
  }
  if (!(spec.label_noise >= 0.0 && spec.label_noise < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "label_noise must lie in [0, 0.5)");
  }
  const auto n = static_cast<Eigen::Index>(spec.n_images);
  const auto j = static_cast<Eigen::Index>(spec.n_attrs);
  const auto d = static_cast<Eigen::Index>(spec.latent_dim);

  Rng features_rng(derive_seed(spec.seed, {0}));
  Eigen::MatrixXd features(n, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index i = 0; i < n; ++i) features(i, c) = features_rng.normal();

  Rng boundary_rng(derive_seed(spec.seed, {1}));
  Eigen::MatrixXd normals(d, j);
  Eigen::RowVectorXd offsets(j);
  for (Eigen::Index k = 0; k < j; ++k) {
    for (Eigen::Index c = 0; c < d; ++c) normals(c, k) = boundary_rng.normal();
    offsets(k) = spec.offset + spec.offset_scale * boundary_rng.normal();
  }
  for (Eigen::Index k = 0; k < j; ++k) {
    const double norm = normals.col(k).norm();
    if (norm > 0.0) normals.col(k) /= norm;
  }

  Eigen::MatrixXd scores = (features * normals).rowwise() + offsets;
  if (spec.label_noise > 0.0) {
    Rng label_rng(derive_seed(spec.seed, {2}));
    for (Eigen::Index k = 0; k < j; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        if (label_rng.bernoulli(spec.label_noise)) scores(i, k) = -scores(i, k);
  }
  return binarize_scores(ScoreMatrix{scores}, ZeroPolicy::MapToPlus);
}

AttributeMatrix planted_flip_set(const AttributeMatrix& s, std::size_t k, double flip_rate, std::uint64_t seed) {
  if (!(flip_rate >= 0.0 && flip_rate < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "flip_rate must lie in [0, 0.5)");
  }
  if (k == 0) throw Error(ErrorKind::EmptyMatrix, "planted set needs at least one column");
  // Sources walk through freshly shuffled passes over S, so no column repeats
  // before every column has been used once.
  std::vector<std::size_t> sources;
  std::vector<std::size_t> pass(s.n_attrs());
  Rng source_rng(derive_seed(seed, {0}));
  while (sources.size() < k) {
    std::iota(pass.begin(), pass.end(), std::size_t{0});
    source_rng.shuffle(std::span(pass));
    sources.insert(sources.end(), pass.begin(), pass.end());
  }

  SignMatrix out(static_cast<Eigen::Index>(s.n_images()), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(derive_seed(seed, {1, c}));
    const auto column = s.column(sources[c]);
    for (std::size_t i = 0; i < column.size(); ++i) {
      const std::int8_t v = column[i];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rng.bernoulli(flip_rate) ? static_cast<std::int8_t>(-v) : v;
    }
  }
  return AttributeMatrix(std::move(out));
}

AttributeMatrix hull_combination_set(const AttributeMatrix& s, std::size_t k, std::size_t support,
                                     std::uint64_t seed) {
  if (support < 1 || support > s.n_attrs()) {
    throw Error(ErrorKind::InvalidArgument, "support must lie in [1, " + std::to_string(s.n_attrs()) + "]");
  }
  if (k == 0) throw Error(ErrorKind::EmptyMatrix, "hull set needs at least one column");
  const Eigen::MatrixXd basis = s.to_real();
  Eigen::MatrixXd scores(basis.rows(), static_cast<Eigen::Index>(k));
  std::vector<std::size_t> order(s.n_attrs());
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng(derive_seed(seed, {c}));
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `support` slots become the support.
    for (std::size_t i = 0; i < support; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
      std::swap(order[i], order[j]);
    }
    // Normalized exponential spacings are uniform on the simplex.
    std::vector<double> weights(support);
    double total = 0.0;
    for (double& w : weights) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      w = -std::log(u);
      total += w;
    }
    Eigen::VectorXd combo = Eigen::VectorXd::Zero(basis.rows());
    for (std::size_t i = 0; i < support; ++i) combo += (weights[i] / total) * basis.col(static_cast<Eigen::Index>(order[i]));
    scores.col(static_cast<Eigen::Index>(c)) = combo;
  }
  return binarize_scores(ScoreMatrix{scores}, ZeroPolicy::MapToPlus);
}

std::size_t MixtureSpec::planted_count() const {
  return static_cast<std::size_t>(std::llround(meaningful_fraction * static_cast<double>(k)));
}

Mixture mixture_set(const AttributeMatrix& s, const MixtureSpec& spec) {
  if (!(spec.meaningful_fraction >= 0.0 && spec.meaningful_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "meaningful_fraction must lie in [0,1]");
  }
  if (spec.k == 0) throw Error(ErrorKind::EmptyMatrix, "mixture needs at least one column");
  if (!(spec.flip_rate >= 0.0 && spec.flip_rate < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "flip_rate must lie in [0, 0.5)");
  }
  const std::size_t planted = spec.planted_count();
  std::optional<AttributeMatrix> combined;
  if (planted > 0) combined = planted_flip_set(s, planted, spec.flip_rate, derive_seed(spec.seed, {1}));
  const auto noise = gen_noise(s.n_images(), spec.k - planted, derive_seed(spec.seed, {2}));
  combined = combined ? hconcat(*combined, noise) : *noise;

  std::vector<std::size_t> order(spec.k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, {3}));
  rng.shuffle(std::span(order));
  return {combined->select_columns(order), static_cast<double>(planted) / static_cast<double>(spec.k)};
}

}  // namespace amm
