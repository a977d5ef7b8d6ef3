#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amm/core.hpp"
#include "amm/solver.hpp"

namespace amm::cli {

inline constexpr std::uint64_t kDefaultSeed = 20170;

/// Runs one CLI invocation (args exclude the program name).
/// Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count from AMM_THREADS (unset or 0: automatic). Throws
/// InvalidArgument on a malformed value.
unsigned workers_from_env();

struct SweepInput {
  std::string name;
  AttributeMatrix attributes;
};

struct SweepRequest {
  AttributeMatrix meaningful;
  std::vector<SweepInput> inputs;
  std::vector<std::size_t> madd{0, 1, 2, 4, 8, 16, 32, 64, 128, 256};
  std::size_t trials = 5;
  std::vector<DistanceKind> kinds{DistanceKind::Cvx, DistanceKind::Jp};
  double split_ratio = 0.5;
  std::uint64_t seed = kDefaultSeed;
  SimplexOptions simplex;
  unsigned workers = 1;
};

struct SweepRow {
  std::string set;
  DistanceKind kind;
  std::vector<double> mean_delta;  // one per madd entry
};

struct SweepResult {
  std::vector<std::size_t> madd;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<SweepRow> rows;
};

inline constexpr const char* kMeaningfulBaseline = "MeaningfulAttributeSet";
inline constexpr const char* kNoiseBaseline = "NonMeaningfulAttributeSet";

/// Splits the meaningful set, then for every set (the S2 baseline, a pure
/// noise baseline of |S2| columns, then each input in order) averages the
/// distance to S1 after appending m noise columns, for each m in madd.
/// Noise draws are shared across rows for a given (m, trial).
SweepResult run_sweep(const SweepRequest& request);

/// Tab-separated table: header "set kind m=<m>...", then one row per
/// (set, kind).
std::string format_sweep(const SweepResult& result);

}  // namespace amm::cli
