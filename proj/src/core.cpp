#include "amm/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "amm/error.hpp"
#include "amm/rng.hpp"

namespace amm {

std::string to_string(ZeroPolicy policy) {
  return policy == ZeroPolicy::MapToPlus ? "map_to_plus" : "map_to_minus";
}

ZeroPolicy parse_zero_policy(const std::string& text) {
  if (text == "map_to_plus") return ZeroPolicy::MapToPlus;
  if (text == "map_to_minus") return ZeroPolicy::MapToMinus;
  throw Error(ErrorKind::InvalidArgument, "unknown zero policy '" + text + "'");
}

AttributeMatrix::AttributeMatrix(SignMatrix entries, std::vector<std::string> names)
    : entries_(std::move(entries)), names_(std::move(names)) {
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw Error(ErrorKind::EmptyMatrix, "attribute matrix needs at least one row and one column");
  }
  if (!names_.empty() && names_.size() != n_attrs()) {
    throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(n_attrs()) +
                                                " column names, got " + std::to_string(names_.size()));
  }
  for (Eigen::Index k = 0; k < entries_.cols(); ++k) {
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      const auto v = entries_(i, k);
      if (v != 1 && v != -1) {
        throw Error(ErrorKind::NonBinaryEntry, "entry (" + std::to_string(i) + "," + std::to_string(k) +
                                                   ") = " + std::to_string(v));
      }
    }
  }
}

AttributeMatrix AttributeMatrix::select_columns(std::span<const std::size_t> indices) const {
  SignMatrix out(entries_.rows(), static_cast<Eigen::Index>(indices.size()));
  std::vector<std::string> picked;
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (indices[c] >= n_attrs()) throw Error(ErrorKind::OutOfRange, "column index out of range");
    out.col(static_cast<Eigen::Index>(c)) = entries_.col(static_cast<Eigen::Index>(indices[c]));
    if (!names_.empty()) picked.push_back(names_[indices[c]]);
  }
  return AttributeMatrix(std::move(out), std::move(picked));
}

AttributeMatrix hconcat(const AttributeMatrix& left, const std::optional<AttributeMatrix>& right) {
  if (!right) return left;
  if (left.n_images() != right->n_images()) {
    throw Error(ErrorKind::LengthMismatch, "cannot concatenate sets over " + std::to_string(left.n_images()) +
                                               " and " + std::to_string(right->n_images()) + " images");
  }
  SignMatrix out(left.entries().rows(), left.entries().cols() + right->entries().cols());
  out << left.entries(), right->entries();
  std::vector<std::string> names;
  if (!left.names().empty() && !right->names().empty()) {
    names = left.names();
    names.insert(names.end(), right->names().begin(), right->names().end());
  }
  return AttributeMatrix(std::move(out), std::move(names));
}

AttributeMatrix validate_attribute_matrix(const std::vector<std::vector<long long>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorKind::EmptyMatrix, "attribute matrix needs at least one row and one column");
  }
  const std::size_t width = rows.front().size();
  SignMatrix entries(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw Error(ErrorKind::RaggedRows, "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                             " values, expected " + std::to_string(width));
    }
    for (std::size_t k = 0; k < width; ++k) {
      const long long v = rows[i][k];
      if (v != 1 && v != -1) {
        throw Error(ErrorKind::NonBinaryEntry,
                    "entry (" + std::to_string(i) + "," + std::to_string(k) + ") = " + std::to_string(v));
      }
      entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<std::int8_t>(v);
    }
  }
  return AttributeMatrix(std::move(entries));
}

AttributeMatrix binarize_scores(const ScoreMatrix& scores, ZeroPolicy policy) {
  const Eigen::MatrixXd& v = scores.values;
  if (v.size() == 0) throw Error(ErrorKind::EmptyMatrix, "score matrix is empty");
  const std::int8_t at_zero = policy == ZeroPolicy::MapToPlus ? 1 : -1;
  SignMatrix out(v.rows(), v.cols());
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double x = v(i, k);
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::NonFiniteScore, "score (" + std::to_string(i) + "," + std::to_string(k) + ")");
      }
      out(i, k) = x > 0.0 ? std::int8_t{1} : x < 0.0 ? std::int8_t{-1} : at_zero;
    }
  }
  return AttributeMatrix(std::move(out));
}

MeaningfulSplit split_meaningful(const AttributeMatrix& s, double ratio, std::uint64_t seed) {
  const std::size_t j = s.n_attrs();
  if (j < 2) throw Error(ErrorKind::TooFewAttributes, "splitting needs at least 2 attributes, got " + std::to_string(j));
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "split ratio must lie in (0,1)");
  }
  const auto n1 = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(j)));
  if (n1 == 0 || n1 == j) {
    throw Error(ErrorKind::DegenerateSplit, "ratio " + std::to_string(ratio) + " over " + std::to_string(j) +
                                                " attributes leaves one side empty");
  }

  std::vector<std::size_t> order(j);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));

  std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n1));
  std::vector<std::size_t> second(order.begin() + static_cast<std::ptrdiff_t>(n1), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());

  return MeaningfulSplit{s.select_columns(first), s.select_columns(second), seed, std::move(first),
                         std::move(second)};
}

}  // namespace amm
