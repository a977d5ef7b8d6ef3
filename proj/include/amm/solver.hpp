#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "amm/core.hpp"

namespace amm {

enum class DistanceKind { Lsq, Cvx, Jp };

std::string to_string(DistanceKind kind);
DistanceKind parse_distance_kind(const std::string& text);

struct DistanceValue {
  DistanceKind kind;
  double value = 0.0;               // mean of per_column
  std::vector<double> per_column;   // one squared residual per discovered column
  std::size_t nonconverged = 0;     // simplex solves that hit max_iter (cvx only)
};

struct MatchedPair {
  std::size_t meaningful;  // column j of the meaningful set
  std::size_t discovered;  // column k of the discovered set
  double correlation;
  std::size_t agreements;  // count(z == h); correlation = agreements / N

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct PairSet {
  std::vector<MatchedPair> pairs;   // in selection order
  Eigen::MatrixXi r_star;           // J x K, 1 exactly at matched (j, k)
};

struct SimplexSolution {
  Eigen::VectorXd coefficients;
  double residual_sq = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SimplexOptions {
  double tol = 1e-6;
  std::size_t max_iter = 5000;
};

/// Fraction of images on which two attributes agree.
double correlation(std::span<const std::int8_t> z, std::span<const std::int8_t> h);

/// Agreement counts between every meaningful column j and discovered column k.
Eigen::MatrixXi agreement_counts(const AttributeMatrix& s, const AttributeMatrix& d);

/// Greedy one-to-one matching by descending correlation until min(J, K)
/// pairs are chosen. Ties go to the lowest (j, k).
PairSet greedy_pair(const AttributeMatrix& s, const AttributeMatrix& d);

/// Precomputed view of a meaningful set used as the reconstruction basis.
/// Holds the real-valued basis, its Gram matrix and a complete orthogonal
/// decomposition, so repeated distance queries against the same set share
/// that work.
class MeaningfulSubspace {
 public:
  explicit MeaningfulSubspace(AttributeMatrix basis);

  const AttributeMatrix& attributes() const noexcept { return attrs_; }
  std::size_t n_images() const noexcept { return attrs_.n_images(); }
  std::size_t n_attrs() const noexcept { return attrs_.n_attrs(); }

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

  DistanceValue dist_lsq(const AttributeMatrix& d) const;
  DistanceValue dist_cvx(const AttributeMatrix& d, const SimplexOptions& options = {}) const;
  DistanceValue dist_jp(const AttributeMatrix& d) const;
  DistanceValue distance(DistanceKind kind, const AttributeMatrix& d, const SimplexOptions& options = {}) const;

  SimplexSolution simplex_lsq(std::span<const std::int8_t> z, const SimplexOptions& options = {}) const;

 private:
  void check_rows(const AttributeMatrix& d) const;

  AttributeMatrix attrs_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd gram_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

/// Minimizes ||A r - z||^2 over the probability simplex with away-step
/// Frank-Wolfe and exact line search. `gram` = A^T A, `atz` = A^T z and
/// `z_norm_sq` = ||z||^2. converged is set once the Frank-Wolfe duality gap
/// drops to options.tol; the coefficients are feasible either way.
SimplexSolution frank_wolfe_simplex(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& atz, const Eigen::VectorXd& z,
                                    const SimplexOptions& options);

SimplexSolution simplex_lsq(const AttributeMatrix& s, std::span<const std::int8_t> z,
                            const SimplexOptions& options = {});

DistanceValue dist_lsq(const AttributeMatrix& s, const AttributeMatrix& d);
DistanceValue dist_cvx(const AttributeMatrix& s, const AttributeMatrix& d, const SimplexOptions& options = {});
DistanceValue dist_jp(const AttributeMatrix& s, const AttributeMatrix& d);
DistanceValue distance(DistanceKind kind, const AttributeMatrix& s, const AttributeMatrix& d,
                       const SimplexOptions& options = {});

}  // namespace amm
