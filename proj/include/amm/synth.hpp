#pragma once

#include <cstdint>

#include "amm/core.hpp"

namespace amm {

/// Stand-in for a human-labelled attribute vocabulary: J attributes that are
/// sign patterns of random affine decision boundaries (unit normals) over N
/// standard-normal latent image features of dimension `latent_dim`. A negative
/// offset makes positives rare, as with most real attributes: offset -1.2
/// labels about 11.5% of images positive.
struct DecisionBoundarySpec {
  std::size_t n_images = 500;
  std::size_t n_attrs = 64;
  std::size_t latent_dim = 3;
  double offset = -1.2;
  double offset_scale = 0.0;  // std-dev of per-attribute offsets around `offset`
  std::uint64_t seed = 1;
  double label_noise = 0.10;  // per-entry flip probability, in [0, 0.5)
};

AttributeMatrix decision_boundary_set(const DecisionBoundarySpec& spec);

/// k columns, each a uniformly chosen column of `s` with every entry negated
/// independently with probability flip_rate in [0, 0.5).
AttributeMatrix planted_flip_set(const AttributeMatrix& s, std::size_t k, double flip_rate, std::uint64_t seed);

/// k columns, each sign(A w) for a random simplex weight w supported on
/// `support` distinct columns of `s`; zeros map to +1.
AttributeMatrix hull_combination_set(const AttributeMatrix& s, std::size_t k, std::size_t support,
                                     std::uint64_t seed);

struct MixtureSpec {
  double meaningful_fraction = 0.5;
  std::size_t k = 32;
  double flip_rate = 0.1;
  std::uint64_t seed = 1;

  std::size_t planted_count() const;
};

struct Mixture {
  AttributeMatrix attributes;
  double realized_fraction;
};

/// round(f k) planted columns plus k - round(f k) noise columns, shuffled.
Mixture mixture_set(const AttributeMatrix& s, const MixtureSpec& spec);

}  // namespace amm
