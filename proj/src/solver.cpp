#include "amm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "amm/error.hpp"

namespace amm {

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::Lsq: return "lsq";
    case DistanceKind::Cvx: return "cvx";
    case DistanceKind::Jp: return "jp";
  }
  return "unknown";
}

DistanceKind parse_distance_kind(const std::string& text) {
  if (text == "lsq") return DistanceKind::Lsq;
  if (text == "cvx") return DistanceKind::Cvx;
  if (text == "jp") return DistanceKind::Jp;
  throw Error(ErrorKind::InvalidArgument, "unknown distance kind '" + text + "'");
}

namespace {

void require_same_images(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw Error(ErrorKind::LengthMismatch, "attribute sets cover " + std::to_string(expected) + " and " +
                                               std::to_string(actual) + " images");
  }
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

Eigen::Index best_vertex(const Eigen::MatrixXd& gram, const Eigen::VectorXd& atz) {
  Eigen::Index best = 0;
  double best_value = gram(0, 0) - 2.0 * atz(0);
  for (Eigen::Index i = 1; i < atz.size(); ++i) {
    const double v = gram(i, i) - 2.0 * atz(i);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

double correlation(std::span<const std::int8_t> z, std::span<const std::int8_t> h) {
  require_same_images(z.size(), h.size());
  if (z.empty()) throw Error(ErrorKind::EmptyMatrix, "correlation of empty attributes");
  std::size_t same = 0;
  for (std::size_t i = 0; i < z.size(); ++i) same += z[i] == h[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(z.size());
}

Eigen::MatrixXi agreement_counts(const AttributeMatrix& s, const AttributeMatrix& d) {
  require_same_images(s.n_images(), d.n_images());
  // For +-1 vectors <h, z> = agree - disagree = 2 * agree - N. The integer
  // products are exact in double.
  const Eigen::MatrixXd dots = s.to_real().transpose() * d.to_real();
  const auto n = static_cast<double>(s.n_images());
  return ((dots.array() + n) * 0.5).round().cast<int>().matrix();
}

PairSet greedy_pair(const AttributeMatrix& s, const AttributeMatrix& d) {
  const Eigen::MatrixXi agree = agreement_counts(s, d);
  const std::size_t j_count = s.n_attrs();
  const std::size_t k_count = d.n_attrs();
  const std::size_t target = std::min(j_count, k_count);

  struct Candidate {
    int agreements;
    std::size_t j;
    std::size_t k;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(j_count * k_count);
  for (std::size_t j = 0; j < j_count; ++j)
    for (std::size_t k = 0; k < k_count; ++k)
      candidates.push_back({agree(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)), j, k});
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.agreements, a.j, a.k) < std::tie(a.agreements, b.j, b.k);
  });

  PairSet result;
  result.r_star = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(j_count), static_cast<Eigen::Index>(k_count));
  std::vector<bool> used_j(j_count, false);
  std::vector<bool> used_k(k_count, false);
  const auto n = static_cast<double>(s.n_images());
  for (const Candidate& c : candidates) {
    if (result.pairs.size() == target) break;
    if (used_j[c.j] || used_k[c.k]) continue;
    used_j[c.j] = true;
    used_k[c.k] = true;
    result.pairs.push_back({c.j, c.k, static_cast<double>(c.agreements) / n,
                            static_cast<std::size_t>(c.agreements)});
    result.r_star(static_cast<Eigen::Index>(c.j), static_cast<Eigen::Index>(c.k)) = 1;
  }
  return result;
}

SimplexSolution frank_wolfe_simplex(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& atz, const Eigen::VectorXd& z,
                                    const SimplexOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "simplex tolerance must be positive");
  const Eigen::Index dim = gram.rows();

  // Objective f(r) = r'Gr - 2 c'r + |z|^2, gradient 2 (Gr - c).
  Eigen::VectorXd r = Eigen::VectorXd::Zero(dim);
  const Eigen::Index start = best_vertex(gram, atz);
  r(start) = 1.0;
  Eigen::VectorXd gr = gram.col(start);

  SimplexSolution out;
  for (std::size_t it = 0;; ++it) {
    const Eigen::VectorXd grad = 2.0 * (gr - atz);
    Eigen::Index s = 0;
    grad.minCoeff(&s);
    const double r_grad = r.dot(grad);
    const double fw_gap = r_grad - grad(s);
    if (fw_gap <= options.tol) {
      out.converged = true;
      break;
    }
    if (it >= options.max_iter) break;

    Eigen::Index v = -1;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (r(i) > 0.0 && (v < 0 || grad(i) > grad(v))) v = i;
    }
    const double away_gap = grad(v) - r_grad;
    const double r_gr = r.dot(gr);

    if (fw_gap >= away_gap) {
      // Toward vertex s: d = e_s - r.
      const double curvature = gram(s, s) - 2.0 * gr(s) + r_gr;
      double step = curvature > 0.0 ? std::min(1.0, fw_gap / (2.0 * curvature)) : 1.0;
      if (step >= 1.0) {
        r.setZero();
        r(s) = 1.0;
        gr = gram.col(s);
      } else {
        r *= 1.0 - step;
        r(s) += step;
        gr = (1.0 - step) * gr + step * gram.col(s);
      }
    } else {
      // Away from vertex v: d = r - e_v, capped where r_v reaches zero.
      const double rv = r(v);
      const double max_step = rv / (1.0 - rv);
      const double curvature = r_gr - 2.0 * gr(v) + gram(v, v);
      double step = curvature > 0.0 ? std::min(max_step, away_gap / (2.0 * curvature)) : max_step;
      r *= 1.0 + step;
      r(v) -= step;
      gr = (1.0 + step) * gr - step * gram.col(v);
      if (step >= max_step) r(v) = 0.0;
    }
    ++out.iterations;
    if (out.iterations % 64 == 0) gr = gram * r;
  }

  r = r.cwiseMax(0.0);
  r /= r.sum();
  out.residual_sq = (basis * r - z).squaredNorm();
  out.coefficients = std::move(r);
  return out;
}

MeaningfulSubspace::MeaningfulSubspace(AttributeMatrix basis)
    : attrs_(std::move(basis)), basis_(attrs_.to_real()), gram_(basis_.transpose() * basis_), cod_(basis_) {}

void MeaningfulSubspace::check_rows(const AttributeMatrix& d) const { require_same_images(n_images(), d.n_images()); }

DistanceValue MeaningfulSubspace::dist_lsq(const AttributeMatrix& d) const {
  check_rows(d);
  const Eigen::MatrixXd target = d.to_real();
  const Eigen::MatrixXd coeffs = cod_.solve(target);
  const Eigen::MatrixXd residual = basis_ * coeffs - target;

  DistanceValue out{DistanceKind::Lsq, 0.0, {}, 0};
  out.per_column.resize(d.n_attrs());
  for (std::size_t k = 0; k < d.n_attrs(); ++k)
    out.per_column[k] = residual.col(static_cast<Eigen::Index>(k)).squaredNorm();
  out.value = mean_of(out.per_column);
  return out;
}

SimplexSolution MeaningfulSubspace::simplex_lsq(std::span<const std::int8_t> z, const SimplexOptions& options) const {
  require_same_images(n_images(), z.size());
  Eigen::VectorXd target(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) target(static_cast<Eigen::Index>(i)) = z[i];
  const Eigen::VectorXd atz = basis_.transpose() * target;
  return frank_wolfe_simplex(basis_, gram_, atz, target, options);
}

DistanceValue MeaningfulSubspace::dist_cvx(const AttributeMatrix& d, const SimplexOptions& options) const {
  check_rows(d);
  const Eigen::MatrixXd target = d.to_real();
  const Eigen::MatrixXd atb = basis_.transpose() * target;

  DistanceValue out{DistanceKind::Cvx, 0.0, {}, 0};
  out.per_column.resize(d.n_attrs());
  for (std::size_t k = 0; k < d.n_attrs(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const SimplexSolution sol = frank_wolfe_simplex(basis_, gram_, atb.col(col), target.col(col), options);
    out.per_column[k] = sol.residual_sq;
    if (!sol.converged) ++out.nonconverged;
  }
  out.value = mean_of(out.per_column);
  return out;
}

DistanceValue MeaningfulSubspace::dist_jp(const AttributeMatrix& d) const {
  check_rows(d);
  const PairSet matching = greedy_pair(attrs_, d);
  const auto n = static_cast<double>(n_images());

  // Unmatched discovered columns have an all-zero reconstruction: |z|^2 = N.
  DistanceValue out{DistanceKind::Jp, 0.0, std::vector<double>(d.n_attrs(), n), 0};
  for (const MatchedPair& p : matching.pairs) {
    // |h - z|^2 = 4 * disagreements = 4N(1 - rho).
    out.per_column[p.discovered] = 4.0 * static_cast<double>(n_images() - p.agreements);
  }
  out.value = mean_of(out.per_column);
  return out;
}

DistanceValue MeaningfulSubspace::distance(DistanceKind kind, const AttributeMatrix& d,
                                           const SimplexOptions& options) const {
  switch (kind) {
    case DistanceKind::Lsq: return dist_lsq(d);
    case DistanceKind::Cvx: return dist_cvx(d, options);
    case DistanceKind::Jp: return dist_jp(d);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown distance kind");
}

SimplexSolution simplex_lsq(const AttributeMatrix& s, std::span<const std::int8_t> z, const SimplexOptions& options) {
  return MeaningfulSubspace(s).simplex_lsq(z, options);
}

DistanceValue dist_lsq(const AttributeMatrix& s, const AttributeMatrix& d) { return MeaningfulSubspace(s).dist_lsq(d); }

DistanceValue dist_cvx(const AttributeMatrix& s, const AttributeMatrix& d, const SimplexOptions& options) {
  return MeaningfulSubspace(s).dist_cvx(d, options);
}

DistanceValue dist_jp(const AttributeMatrix& s, const AttributeMatrix& d) { return MeaningfulSubspace(s).dist_jp(d); }

DistanceValue distance(DistanceKind kind, const AttributeMatrix& s, const AttributeMatrix& d,
                       const SimplexOptions& options) {
  return MeaningfulSubspace(s).distance(kind, d, options);
}

}  // namespace amm
