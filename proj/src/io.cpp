#include "amm/io.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "amm/error.hpp"

namespace amm::io {

namespace {

using nlohmann::ordered_json;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

long long parse_integer(std::string_view token, std::size_t line_no) {
  std::string_view digits = token;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  long long value = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || end != digits.data() + digits.size() || digits.empty()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": token '" + std::string(token) +
                                           "' is not an integer");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed on '" + path.string() + "'");
  return buffer.str();
}

template <typename T>
T get_field(const ordered_json& json, const char* key) {
  if (!json.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  try {
    return json.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

ordered_json curve_to_json(const InterpolationCurve& c) {
  return ordered_json{{"distance_kind", to_string(c.distance_kind)},
                      {"grid", c.grid},
                      {"mean_delta", c.mean_delta},
                      {"isotonic_delta", c.isotonic_delta},
                      {"trials", c.trials},
                      {"seed", c.seed},
                      {"solves", c.solves},
                      {"nonconverged", c.nonconverged}};
}

InterpolationCurve curve_from_json(const ordered_json& j) {
  InterpolationCurve c;
  c.distance_kind = parse_distance_kind(get_field<std::string>(j, "distance_kind"));
  c.grid = get_field<std::vector<std::size_t>>(j, "grid");
  c.mean_delta = get_field<std::vector<double>>(j, "mean_delta");
  c.isotonic_delta = get_field<std::vector<double>>(j, "isotonic_delta");
  c.trials = get_field<std::size_t>(j, "trials");
  c.seed = get_field<std::uint64_t>(j, "seed");
  c.solves = get_field<std::size_t>(j, "solves");
  c.nonconverged = get_field<std::size_t>(j, "nonconverged");
  if (c.grid.size() != c.mean_delta.size() || c.grid.size() != c.isotonic_delta.size()) {
    throw Error(ErrorKind::ParseError, "curve arrays differ in length");
  }
  return c;
}

}  // namespace

AttributeMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;

  std::vector<std::string_view> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.front() == '#') {
      constexpr std::string_view tag = "# names:";
      if (std::string_view(line).starts_with(tag)) {
        names.clear();
        for (auto t : split_ws(std::string_view(line).substr(tag.size()))) names.emplace_back(t);
      }
      continue;
    }
    header = split_ws(line);
    break;
  }
  if (header.size() != 2) throw Error(ErrorKind::ParseError, "expected header 'N K' on line " + std::to_string(line_no));
  const long long n = parse_integer(header[0], line_no);
  const long long k = parse_integer(header[1], line_no);
  if (n < 0 || k < 0) throw Error(ErrorKind::ParseError, "negative dimensions in header");
  if (n == 0 || k == 0) throw Error(ErrorKind::EmptyMatrix, "header declares an empty matrix");

  std::vector<std::vector<long long>> rows;
  rows.reserve(static_cast<std::size_t>(n));
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (rows.size() == static_cast<std::size_t>(n)) {
      throw Error(ErrorKind::HeaderMismatch, "more than " + std::to_string(n) + " rows in body");
    }
    if (tokens.size() != static_cast<std::size_t>(k)) {
      throw Error(ErrorKind::HeaderMismatch, "line " + std::to_string(line_no) + " has " +
                                                 std::to_string(tokens.size()) + " values, header declares " +
                                                 std::to_string(k));
    }
    std::vector<long long> row;
    row.reserve(tokens.size());
    for (auto t : tokens) row.push_back(parse_integer(t, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::HeaderMismatch, "header declares " + std::to_string(n) + " rows, body has " +
                                               std::to_string(rows.size()));
  }
  AttributeMatrix m = validate_attribute_matrix(rows);
  if (!names.empty()) return AttributeMatrix(m.entries(), std::move(names));
  return m;
}

std::string format_matrix(const AttributeMatrix& m) {
  std::string out;
  out.reserve(m.n_images() * m.n_attrs() * 3 + 64);
  if (!m.names().empty()) {
    out += "# names:";
    for (const std::string& name : m.names()) {
      if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
        throw Error(ErrorKind::InvalidArgument, "column name '" + name + "' cannot be serialized");
      }
      out += ' ';
      out += name;
    }
    out += '\n';
  }
  out += std::to_string(m.n_images()) + ' ' + std::to_string(m.n_attrs()) + '\n';
  for (std::size_t i = 0; i < m.n_images(); ++i) {
    for (std::size_t k = 0; k < m.n_attrs(); ++k) {
      if (k > 0) out += ' ';
      out += m(i, k) > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

AttributeMatrix read_matrix(const std::filesystem::path& path) { return parse_matrix(read_file(path)); }

void write_matrix(const AttributeMatrix& m, const std::filesystem::path& path) {
  write_file_atomic(path, format_matrix(m));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned long> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorKind::IoFailure, "write failed on '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorKind::IoFailure, "cannot move into '" + path.string() + "': " + ec.message());
  }
}

ordered_json config_to_json(const EvaluationConfig& config) {
  std::vector<std::string> kinds;
  for (DistanceKind k : config.kinds) kinds.push_back(to_string(k));
  return ordered_json{{"split_ratio", config.split_ratio},
                      {"master_seed", config.master_seed},
                      {"split_seed", split_seed(config.master_seed)},
                      {"curve_seed", curve_seed(config.master_seed)},
                      {"grid", config.grid},
                      {"trials", config.trials},
                      {"tol", config.simplex.tol},
                      {"max_iter", config.simplex.max_iter},
                      {"zero_policy", to_string(config.zero_policy)},
                      {"distance_kinds", kinds},
                      {"distance_to_full_set", config.distance_to_full_set}};
}

EvaluationConfig config_from_json(const ordered_json& json) {
  EvaluationConfig config;
  if (!json.is_object()) throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");
  try {
    if (json.contains("split_ratio")) config.split_ratio = json.at("split_ratio").get<double>();
    if (json.contains("master_seed")) config.master_seed = json.at("master_seed").get<std::uint64_t>();
    if (json.contains("grid")) config.grid = json.at("grid").get<std::vector<std::size_t>>();
    if (json.contains("trials")) config.trials = json.at("trials").get<std::size_t>();
    if (json.contains("tol")) config.simplex.tol = json.at("tol").get<double>();
    if (json.contains("max_iter")) config.simplex.max_iter = json.at("max_iter").get<std::size_t>();
    if (json.contains("zero_policy")) config.zero_policy = parse_zero_policy(json.at("zero_policy").get<std::string>());
    if (json.contains("distance_kinds")) {
      config.kinds.clear();
      for (const auto& k : json.at("distance_kinds")) config.kinds.push_back(parse_distance_kind(k.get<std::string>()));
    }
    if (json.contains("distance_to_full_set")) config.distance_to_full_set = json.at("distance_to_full_set").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  validate_config(config);
  return config;
}

ordered_json report_to_json(const MeaningfulnessReport& report) {
  const CalibrationResult& cvx = report.result(DistanceKind::Cvx);
  const CalibrationResult& jp = report.result(DistanceKind::Jp);

  ordered_json results = ordered_json::object();
  ordered_json curves = ordered_json::object();
  for (const CalibrationResult& r : report.results) {
    results[to_string(r.kind)] = ordered_json{{"g_star", r.g_star},       {"gamma", r.gamma},
                                              {"saturated", r.saturated}, {"delta_d", r.delta_d},
                                              {"nonconverged_d", r.nonconverged_d}};
    curves[to_string(r.kind)] = curve_to_json(r.curve);
  }

  ordered_json out{{"format_version", kReportFormatVersion},
                   {"gamma_cvx", report.gamma_cvx},
                   {"gamma_jp", report.gamma_jp},
                   {"gamma_tilde", report.gamma_tilde},
                   {"g_star_cvx", cvx.g_star},
                   {"g_star_jp", jp.g_star},
                   {"saturated_cvx", cvx.saturated},
                   {"saturated_jp", jp.saturated},
                   {"delta_d_cvx", cvx.delta_d},
                   {"delta_d_jp", jp.delta_d},
                   {"degraded", report.degraded},
                   {"g_star_mode", "interpolated"},
                   {"zero_policy", to_string(report.config.zero_policy)},
                   {"n_images", report.n_images},
                   {"n_meaningful", report.n_meaningful},
                   {"n_discovered", report.n_discovered},
                   {"split", {{"s1_columns", report.s1_columns}, {"s2_columns", report.s2_columns}}},
                   {"config", config_to_json(report.config)},
                   {"results", results},
                   {"curves", curves}};
  if (!report.delta_full_set.empty()) {
    ordered_json full = ordered_json::object();
    for (const auto& [kind, value] : report.delta_full_set) full[to_string(kind)] = value;
    out["delta_full_set"] = full;
  }
  return out;
}

MeaningfulnessReport report_from_json(const ordered_json& json) {
  if (get_field<int>(json, "format_version") != kReportFormatVersion) {
    throw Error(ErrorKind::ParseError, "unsupported report format_version");
  }
  MeaningfulnessReport r;
  r.gamma_cvx = get_field<double>(json, "gamma_cvx");
  r.gamma_jp = get_field<double>(json, "gamma_jp");
  r.gamma_tilde = get_field<double>(json, "gamma_tilde");
  r.degraded = get_field<bool>(json, "degraded");
  r.n_images = get_field<std::size_t>(json, "n_images");
  r.n_meaningful = get_field<std::size_t>(json, "n_meaningful");
  r.n_discovered = get_field<std::size_t>(json, "n_discovered");
  const ordered_json& split = json.at("split");
  r.s1_columns = get_field<std::vector<std::size_t>>(split, "s1_columns");
  r.s2_columns = get_field<std::vector<std::size_t>>(split, "s2_columns");
  r.config = config_from_json(json.at("config"));

  const ordered_json& results = json.at("results");
  const ordered_json& curves = json.at("curves");
  for (DistanceKind kind : r.config.kinds) {
    const std::string key = to_string(kind);
    if (!results.contains(key) || !curves.contains(key)) {
      throw Error(ErrorKind::ParseError, "report lacks the '" + key + "' result");
    }
    const ordered_json& entry = results.at(key);
    CalibrationResult c;
    c.kind = kind;
    c.g_star = get_field<double>(entry, "g_star");
    c.gamma = get_field<double>(entry, "gamma");
    c.saturated = get_field<bool>(entry, "saturated");
    c.delta_d = get_field<double>(entry, "delta_d");
    c.nonconverged_d = get_field<std::size_t>(entry, "nonconverged_d");
    c.curve = curve_from_json(curves.at(key));
    r.results.push_back(std::move(c));
  }
  if (json.contains("delta_full_set")) {
    for (const auto& [key, value] : json.at("delta_full_set").items()) {
      r.delta_full_set[parse_distance_kind(key)] = value.get<double>();
    }
  }
  return r;
}

void write_report(const MeaningfulnessReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

MeaningfulnessReport read_report(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ordered_json json;
  try {
    json = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return report_from_json(json);
}

RunManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ordered_json json;
  try {
    json = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const char* key) {
    std::filesystem::path p = get_field<std::string>(json, key);
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw Error(ErrorKind::IoFailure, "manifest file '" + p.string() + "' not found");
    return p;
  };
  RunManifest manifest;
  manifest.s_path = resolve("s");
  manifest.d_path = resolve("d");
  if (json.contains("config")) manifest.config = config_from_json(json.at("config"));
  return manifest;
}

}  // namespace amm::io
