#include "amm/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "amm/calibrate.hpp"
#include "amm/error.hpp"
#include "amm/io.hpp"
#include "amm/parallel.hpp"
#include "amm/rng.hpp"
#include "amm/synth.hpp"

namespace amm::cli {

namespace {

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, sep)) {
    if (!current.empty()) parts.push_back(current);
  }
  return parts;
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  for (const std::string& part : split_list(text, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      grid.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad grid entry '" + part + "'");
    }
  }
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty grid");
  return grid;
}

std::vector<DistanceKind> parse_kinds(const std::string& text) {
  if (text == "all") return {DistanceKind::Lsq, DistanceKind::Cvx, DistanceKind::Jp};
  std::vector<DistanceKind> kinds;
  for (const std::string& part : split_list(text, ',')) kinds.push_back(parse_distance_kind(part));
  if (kinds.empty()) throw Error(ErrorKind::InvalidArgument, "no distance kind given");
  return kinds;
}

struct GenOptions {
  std::string kind = "noise";
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string s;
  double flip_rate = 0.1;
  std::size_t support = 3;
  double fraction = 0.5;
  std::size_t latent_dim = 3;
  double offset = -1.2;
  double offset_scale = 0.0;
  double label_noise = 0.10;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  auto need_s = [&]() {
    if (o.s.empty()) throw Error(ErrorKind::InvalidArgument, "--kind " + o.kind + " needs --s");
    return io::read_matrix(o.s);
  };
  auto need_k = [&]() {
    if (o.k == 0) throw Error(ErrorKind::InvalidArgument, "--k must be positive");
    return o.k;
  };

  std::optional<AttributeMatrix> result;
  std::string detail;
  if (o.kind == "noise") {
    if (o.n == 0) throw Error(ErrorKind::InvalidArgument, "--n must be positive");
    result = gen_noise(o.n, need_k(), o.seed);
  } else if (o.kind == "meaningful") {
    if (o.n == 0) throw Error(ErrorKind::InvalidArgument, "--n must be positive");
    result = decision_boundary_set({.n_images = o.n,
                                    .n_attrs = need_k(),
                                    .latent_dim = o.latent_dim,
                                    .offset = o.offset,
                                    .offset_scale = o.offset_scale,
                                    .seed = o.seed,
                                    .label_noise = o.label_noise});
    detail = fmt::format(" latent_dim={} offset={} offset_scale={} label_noise={}", o.latent_dim, o.offset,
                         o.offset_scale, o.label_noise);
  } else if (o.kind == "planted") {
    result = planted_flip_set(need_s(), need_k(), o.flip_rate, o.seed);
    detail = fmt::format(" flip_rate={}", o.flip_rate);
  } else if (o.kind == "hull") {
    result = hull_combination_set(need_s(), need_k(), o.support, o.seed);
    detail = fmt::format(" support={}", o.support);
  } else if (o.kind == "mixture") {
    const MixtureSpec spec{o.fraction, need_k(), o.flip_rate, o.seed};
    Mixture mix = mixture_set(need_s(), spec);
    detail = fmt::format(" planted={} noise={} fraction={}", spec.planted_count(), spec.k - spec.planted_count(),
                         mix.realized_fraction);
    result = std::move(mix.attributes);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown generator kind '" + o.kind + "'");
  }
  io::write_matrix(*result, o.out);
  out << fmt::format("wrote {}: {}x{} kind={} seed={}{}\n", o.out, result->n_images(), result->n_attrs(), o.kind,
                     o.seed, detail);
  return 0;
}

struct SplitOptions {
  std::string s;
  double ratio = 0.5;
  std::uint64_t seed = kDefaultSeed;
  std::string s1_out;
  std::string s2_out;
};

int cmd_split(const SplitOptions& o, std::ostream& out) {
  const MeaningfulSplit split = split_meaningful(io::read_matrix(o.s), o.ratio, split_seed(o.seed));
  if (!o.s1_out.empty()) io::write_matrix(split.s1, o.s1_out);
  if (!o.s2_out.empty()) io::write_matrix(split.s2, o.s2_out);
  out << fmt::format("split seed={} ratio={} s1={} s2={}\n", o.seed, o.ratio, split.s1.n_attrs(), split.s2.n_attrs());
  return 0;
}

struct DistOptions {
  std::string s;
  std::string d;
  std::string kind = "all";
  double tol = 1e-6;
  std::size_t max_iter = 5000;
  bool verbose = false;
  bool table = false;
};

int cmd_dist(const DistOptions& o, std::ostream& out) {
  const AttributeMatrix s = io::read_matrix(o.s);
  const AttributeMatrix d = io::read_matrix(o.d);
  const MeaningfulSubspace reference(s);
  const SimplexOptions simplex{o.tol, o.max_iter};
  if (o.table) out << "kind\tdelta\n";
  for (DistanceKind kind : parse_kinds(o.kind)) {
    const DistanceValue v = reference.distance(kind, d, simplex);
    if (o.table) {
      out << fmt::format("{}\t{:.6f}\n", to_string(kind), v.value);
    } else {
      out << fmt::format("delta_{}={:.6f}\n", to_string(kind), v.value);
    }
    if (o.verbose) {
      double lo = v.per_column.front();
      double hi = lo;
      for (double x : v.per_column) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      out << fmt::format("  columns={} min={:.6f} max={:.6f}", v.per_column.size(), lo, hi);
      if (kind == DistanceKind::Cvx) out << fmt::format(" nonconverged={}", v.nonconverged);
      out << '\n';
      for (std::size_t k = 0; k < v.per_column.size(); ++k) out << fmt::format("  [{}] {:.6f}\n", k, v.per_column[k]);
    }
  }
  return 0;
}

struct MetricOptions {
  std::string manifest;
  std::string s;
  std::string d;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string grid;
  std::optional<double> ratio;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::string kinds;
  std::string zero_policy;
  bool full_set = false;
  std::string out;
};

int cmd_metric(const MetricOptions& o, unsigned workers, std::ostream& out) {
  EvaluationConfig config;
  std::string s_path = o.s;
  std::string d_path = o.d;
  if (!o.manifest.empty()) {
    const io::RunManifest manifest = io::read_manifest(o.manifest);
    config = manifest.config;
    if (s_path.empty()) s_path = manifest.s_path.string();
    if (d_path.empty()) d_path = manifest.d_path.string();
  }
  if (s_path.empty() || d_path.empty()) throw Error(ErrorKind::InvalidArgument, "metric needs --s and --d or --manifest");
  if (o.seed) config.master_seed = *o.seed;
  if (o.trials) config.trials = *o.trials;
  if (!o.grid.empty()) config.grid = parse_grid(o.grid);
  if (o.ratio) config.split_ratio = *o.ratio;
  if (o.tol) config.simplex.tol = *o.tol;
  if (o.max_iter) config.simplex.max_iter = *o.max_iter;
  if (!o.kinds.empty()) config.kinds = parse_kinds(o.kinds);
  if (!o.zero_policy.empty()) config.zero_policy = parse_zero_policy(o.zero_policy);
  if (o.full_set) config.distance_to_full_set = true;
  config.workers = workers;
  try {
    validate_config(config);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }

  const AttributeMatrix s = io::read_matrix(s_path);
  const AttributeMatrix d = io::read_matrix(d_path);
  const MeaningfulnessReport report = evaluate_meaningfulness(s, d, config);
  if (!o.out.empty()) io::write_report(report, o.out);

  const bool sat_cvx = report.result(DistanceKind::Cvx).saturated;
  const bool sat_jp = report.result(DistanceKind::Jp).saturated;
  const std::string saturated = sat_cvx && sat_jp ? "cvx,jp" : sat_cvx ? "cvx" : sat_jp ? "jp" : "none";
  out << fmt::format("gamma_cvx={:.1f} gamma_jp={:.1f} gamma_tilde={:.1f} saturated={}", report.gamma_cvx,
                     report.gamma_jp, report.gamma_tilde, saturated);
  if (report.degraded) out << " degraded=true";
  out << '\n';
  const auto& grid = report.config.grid;
  out << fmt::format("# seed={} ratio={} trials={} grid={} tol={} max_iter={} zero_policy={}\n",
                     report.config.master_seed, report.config.split_ratio, report.config.trials,
                     fmt::join(grid, ","), report.config.simplex.tol, report.config.simplex.max_iter,
                     to_string(report.config.zero_policy));
  return 0;
}

struct SweepOptions {
  std::string s;
  std::vector<std::string> d;
  std::vector<std::string> gen;
  std::string madd = "0,1,2,4,8,16,32,64,128,256";
  std::size_t trials = 5;
  std::string kind = "cvx,jp";
  double ratio = 0.5;
  std::uint64_t seed = kDefaultSeed;
  double flip_rate = 0.1;
  double tol = 1e-6;
  std::size_t max_iter = 5000;
  std::string out;
};

// Built-in discovered sets: noise:K, planted:K, hull:K[:support], mixture:K:fraction.
SweepInput generate_input(const std::string& spec, const AttributeMatrix& s, double flip_rate, std::uint64_t seed) {
  const std::vector<std::string> parts = split_list(spec, ':');
  auto number = [&](std::size_t i) -> double {
    if (i >= parts.size()) throw Error(ErrorKind::InvalidArgument, "generator spec '" + spec + "' is incomplete");
    try {
      return std::stod(parts[i]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "generator spec '" + spec + "' has a bad number");
    }
  };
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "empty generator spec");
  const auto k = static_cast<std::size_t>(number(1));
  const std::string& kind = parts[0];
  if (kind == "noise") return {spec, *gen_noise(s.n_images(), k, seed)};
  if (kind == "planted") return {spec, planted_flip_set(s, k, flip_rate, seed)};
  if (kind == "hull") {
    const std::size_t support = parts.size() > 2 ? static_cast<std::size_t>(number(2)) : 3;
    return {spec, hull_combination_set(s, k, support, seed)};
  }
  if (kind == "mixture") return {spec, mixture_set(s, {number(2), k, flip_rate, seed}).attributes};
  throw Error(ErrorKind::InvalidArgument, "unknown generator '" + kind + "'");
}

int cmd_sweep(const SweepOptions& o, unsigned workers, std::ostream& out) {
  SweepRequest request{.meaningful = io::read_matrix(o.s)};
  for (const std::string& path : o.d) request.inputs.push_back({path, io::read_matrix(path)});
  for (std::size_t i = 0; i < o.gen.size(); ++i) {
    request.inputs.push_back(
        generate_input(o.gen[i], request.meaningful, o.flip_rate, derive_seed(o.seed + 4, {static_cast<std::uint64_t>(i)})));
  }
  request.madd = parse_grid(o.madd);
  request.trials = o.trials;
  request.kinds = parse_kinds(o.kind);
  request.split_ratio = o.ratio;
  request.seed = o.seed;
  request.simplex = {o.tol, o.max_iter};
  request.workers = workers;

  const std::string table = format_sweep(run_sweep(request));
  if (o.out.empty()) {
    out << table;
  } else {
    io::write_file_atomic(o.out, table);
    out << fmt::format("wrote {}: {} sets x {} kinds, seed={} trials={}\n", o.out, request.inputs.size() + 2,
                       request.kinds.size(), o.seed, o.trials);
  }
  return 0;
}

}  // namespace

unsigned workers_from_env() {
  const char* value = std::getenv("AMM_THREADS");
  if (value == nullptr || *value == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long parsed = std::stoul(value, &used);
    if (used != std::string(value).size()) throw std::invalid_argument(value);
    return static_cast<unsigned>(parsed);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, std::string("AMM_THREADS must be a nonnegative integer, got '") + value + "'");
  }
}

SweepResult run_sweep(const SweepRequest& request) {
  if (request.madd.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grid is empty");
  if (request.trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be at least 1");
  const MeaningfulSplit split =
      split_meaningful(request.meaningful, request.split_ratio, split_seed(request.seed));
  const MeaningfulSubspace reference(split.s1);
  const std::size_t n_images = request.meaningful.n_images();

  std::vector<SweepInput> sets;
  sets.push_back({kMeaningfulBaseline, split.s2});
  sets.push_back({kNoiseBaseline, *gen_noise(n_images, split.s2.n_attrs(), request.seed + 3)});
  for (const SweepInput& input : request.inputs) {
    if (input.attributes.n_images() != n_images) {
      throw Error(ErrorKind::LengthMismatch, "set '" + input.name + "' covers " +
                                                 std::to_string(input.attributes.n_images()) + " images, expected " +
                                                 std::to_string(n_images));
    }
    sets.push_back(input);
  }

  // One task per (set, kind, m, trial); m = 0 has a single trial.
  struct Task {
    std::size_t row;
    std::size_t point;
    std::size_t trial;
  };
  const std::uint64_t noise_base = curve_seed(request.seed);
  std::vector<Task> tasks;
  const std::size_t n_rows = sets.size() * request.kinds.size();
  for (std::size_t row = 0; row < n_rows; ++row) {
    for (std::size_t p = 0; p < request.madd.size(); ++p) {
      const std::size_t trials = request.madd[p] == 0 ? 1 : request.trials;
      for (std::size_t t = 0; t < trials; ++t) tasks.push_back({row, p, t});
    }
  }
  std::vector<double> values(tasks.size());
  parallel_for(tasks.size(), request.workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    const SweepInput& set = sets[task.row / request.kinds.size()];
    const DistanceKind kind = request.kinds[task.row % request.kinds.size()];
    const std::size_t m = request.madd[task.point];
    const AttributeMatrix augmented =
        hconcat(set.attributes, gen_noise(n_images, m, noise_seed(noise_base, m, task.trial)));
    values[i] = reference.distance(kind, augmented, request.simplex).value;
  });

  SweepResult result{request.madd, request.seed, request.trials, {}};
  for (std::size_t row = 0; row < n_rows; ++row) {
    result.rows.push_back({sets[row / request.kinds.size()].name, request.kinds[row % request.kinds.size()],
                           std::vector<double>(request.madd.size(), 0.0)});
  }
  std::vector<std::size_t> counts(n_rows * request.madd.size(), 0);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    result.rows[tasks[i].row].mean_delta[tasks[i].point] += values[i];
    ++counts[tasks[i].row * request.madd.size() + tasks[i].point];
  }
  for (std::size_t row = 0; row < n_rows; ++row) {
    for (std::size_t p = 0; p < request.madd.size(); ++p) {
      result.rows[row].mean_delta[p] /= static_cast<double>(counts[row * request.madd.size() + p]);
    }
  }
  return result;
}

std::string format_sweep(const SweepResult& result) {
  std::string out = "set\tkind";
  for (std::size_t m : result.madd) out += fmt::format("\tm={}", m);
  out += '\n';
  for (const SweepRow& row : result.rows) {
    out += row.set + '\t' + to_string(row.kind);
    for (double v : row.mean_delta) out += fmt::format("\t{:.6f}", v);
    out += '\n';
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attribute set meaningfulness: distances, calibrated metric and noise sweeps", "amm"};
  app.require_subcommand(1);
  std::optional<unsigned> threads;
  app.add_option("--threads", threads, "Worker threads (overrides AMM_THREADS; 0 = auto)");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic attribute matrix");
  gen_cmd->add_option("--kind", gen.kind, "noise | meaningful | planted | hull | mixture")
      ->check(CLI::IsMember({"noise", "meaningful", "planted", "hull", "mixture"}));
  gen_cmd->add_option("--n", gen.n, "Number of images (noise, meaningful)");
  gen_cmd->add_option("--k", gen.k, "Number of attributes")->required();
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output matrix file")->required();
  gen_cmd->add_option("--s", gen.s, "Meaningful set (planted, hull, mixture)");
  gen_cmd->add_option("--flip-rate", gen.flip_rate, "Entry flip probability")->capture_default_str();
  gen_cmd->add_option("--support", gen.support, "Hull combination support")->capture_default_str();
  gen_cmd->add_option("--fraction", gen.fraction, "Meaningful fraction (mixture)")->capture_default_str();
  gen_cmd->add_option("--latent-dim", gen.latent_dim, "Latent feature dimension (meaningful)")->capture_default_str();
  gen_cmd->add_option("--offset", gen.offset, "Mean boundary offset (meaningful)")->capture_default_str();
  gen_cmd->add_option("--offset-scale", gen.offset_scale, "Spread of boundary offsets (meaningful)")->capture_default_str();
  gen_cmd->add_option("--label-noise", gen.label_noise, "Per-entry flip probability (meaningful)")->capture_default_str();

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "Write the S1/S2 halves used by metric for a given seed");
  split_cmd->add_option("--s", split.s, "Meaningful set")->required();
  split_cmd->add_option("--ratio", split.ratio, "Fraction of columns in S1")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Master seed (as for metric)")->capture_default_str();
  split_cmd->add_option("--s1-out", split.s1_out, "Output file for S1");
  split_cmd->add_option("--s2-out", split.s2_out, "Output file for S2");

  DistOptions dist;
  auto* dist_cmd = app.add_subcommand("dist", "Distances from a discovered set to a meaningful set");
  dist_cmd->add_option("--s", dist.s, "Meaningful set")->required();
  dist_cmd->add_option("--d", dist.d, "Discovered set")->required();
  dist_cmd->add_option("--kind", dist.kind, "lsq | cvx | jp | all, or a comma list")->capture_default_str();
  dist_cmd->add_option("--tol", dist.tol, "Simplex duality-gap tolerance")->capture_default_str();
  dist_cmd->add_option("--max-iter", dist.max_iter, "Simplex iteration cap")->capture_default_str();
  dist_cmd->add_flag("--verbose", dist.verbose, "Per-column residuals");
  dist_cmd->add_flag("--table", dist.table, "Tab-separated output");

  MetricOptions metric;
  auto* metric_cmd = app.add_subcommand("metric", "Calibrated meaningfulness scores");
  metric_cmd->add_option("--manifest", metric.manifest, "Run manifest (JSON)");
  metric_cmd->add_option("--s", metric.s, "Meaningful set");
  metric_cmd->add_option("--d", metric.d, "Discovered set");
  metric_cmd->add_option("--seed", metric.seed, "Master seed");
  metric_cmd->add_option("--trials", metric.trials, "Noise draws per grid point");
  metric_cmd->add_option("--grid", metric.grid, "Comma-separated noise counts starting at 0");
  metric_cmd->add_option("--ratio", metric.ratio, "Fraction of S in S1");
  metric_cmd->add_option("--tol", metric.tol, "Simplex duality-gap tolerance");
  metric_cmd->add_option("--max-iter", metric.max_iter, "Simplex iteration cap");
  metric_cmd->add_option("--kinds", metric.kinds, "Distance kinds (must include cvx,jp)");
  metric_cmd->add_option("--zero-policy", metric.zero_policy, "map_to_plus | map_to_minus");
  metric_cmd->add_flag("--full-set", metric.full_set, "Also report distances to the whole meaningful set");
  metric_cmd->add_option("--out", metric.out, "Report file (JSON)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Distances while progressively adding noise attributes");
  sweep_cmd->add_option("--s", sweep.s, "Meaningful set")->required();
  sweep_cmd->add_option("--d", sweep.d, "Discovered set file (repeatable)");
  sweep_cmd->add_option("--gen", sweep.gen, "Built-in set: noise:K planted:K hull:K[:support] mixture:K:f (repeatable)");
  sweep_cmd->add_option("--madd", sweep.madd, "Comma-separated noise counts")->capture_default_str();
  sweep_cmd->add_option("--trials", sweep.trials, "Noise draws per point")->capture_default_str();
  sweep_cmd->add_option("--kind", sweep.kind, "Distance kinds")->capture_default_str();
  sweep_cmd->add_option("--ratio", sweep.ratio, "Fraction of S in S1")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed")->capture_default_str();
  sweep_cmd->add_option("--flip-rate", sweep.flip_rate, "Flip rate for built-in sets")->capture_default_str();
  sweep_cmd->add_option("--tol", sweep.tol, "Simplex duality-gap tolerance")->capture_default_str();
  sweep_cmd->add_option("--max-iter", sweep.max_iter, "Simplex iteration cap")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "Output table (TSV); stdout if omitted");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    const unsigned workers = threads ? *threads : workers_from_env();
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*split_cmd) return cmd_split(split, out);
    if (*dist_cmd) return cmd_dist(dist, out);
    if (*metric_cmd) return cmd_metric(metric, workers, out);
    if (*sweep_cmd) return cmd_sweep(sweep, workers, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace amm::cli
