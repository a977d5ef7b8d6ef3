#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace amm {

using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

enum class ZeroPolicy { MapToPlus, MapToMinus };

std::string to_string(ZeroPolicy policy);
ZeroPolicy parse_zero_policy(const std::string& text);

/// A set of binary attributes over a fixed image set: an N x K matrix whose
/// entries are exactly -1 or +1, one column per attribute. Storage is
/// column-major so each attribute is a contiguous span.
class AttributeMatrix {
 public:
  /// Validates and adopts `entries`; throws EmptyMatrix or NonBinaryEntry.
  explicit AttributeMatrix(SignMatrix entries, std::vector<std::string> names = {});

  std::size_t n_images() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t n_attrs() const noexcept { return static_cast<std::size_t>(entries_.cols()); }

  std::int8_t operator()(std::size_t i, std::size_t k) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  }

  std::span<const std::int8_t> column(std::size_t k) const {
    return {entries_.data() + k * n_images(), n_images()};
  }

  const SignMatrix& entries() const noexcept { return entries_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  Eigen::MatrixXd to_real() const { return entries_.cast<double>(); }

  /// Columns at `indices`, in that order (names carried along).
  AttributeMatrix select_columns(std::span<const std::size_t> indices) const;

  friend bool operator==(const AttributeMatrix& a, const AttributeMatrix& b) {
    return a.entries_ == b.entries_ && a.names_ == b.names_;
  }

 private:
  SignMatrix entries_;
  std::vector<std::string> names_;
};

/// Column-wise concatenation [left | right]. Either side may be absent
/// (an empty noise set), but not both.
AttributeMatrix hconcat(const AttributeMatrix& left, const std::optional<AttributeMatrix>& right);

/// Real-valued classifier outputs, N x K.
struct ScoreMatrix {
  Eigen::MatrixXd values;
};

/// Builds an AttributeMatrix from row-major integer rows.
/// Errors: EmptyMatrix, RaggedRows, NonBinaryEntry.
AttributeMatrix validate_attribute_matrix(const std::vector<std::vector<long long>>& rows);

/// Sign binarization; exact zeros resolve through `policy`.
AttributeMatrix binarize_scores(const ScoreMatrix& scores, ZeroPolicy policy = ZeroPolicy::MapToPlus);

struct MeaningfulSplit {
  AttributeMatrix s1;
  AttributeMatrix s2;
  std::uint64_t seed;
  std::vector<std::size_t> s1_columns;  // 0-based columns of the source set
  std::vector<std::size_t> s2_columns;
};

/// Seeded uniform split of a meaningful set into two disjoint parts with
/// round(ratio * J) columns in s1. Column lists are sorted ascending.
/// Errors: TooFewAttributes (J < 2), DegenerateSplit, InvalidArgument.
MeaningfulSplit split_meaningful(const AttributeMatrix& s, double ratio, std::uint64_t seed);

}  // namespace amm
