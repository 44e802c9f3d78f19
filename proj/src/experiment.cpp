#include "ssd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "ssd/analytics.hpp"
#include "ssd/profile.hpp"

namespace ssd::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- json helpers

const json& require_field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

double get_number(const json& doc, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!doc.contains(key)) {
    if (fallback) return *fallback;
    throw InputError(std::string("missing field '") + key + "'");
  }
  const json& v = doc.at(key);
  if (!v.is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& doc, const char* key, std::optional<std::uint64_t> fallback = std::nullopt) {
  if (!doc.contains(key)) {
    if (fallback) return *fallback;
    throw InputError(std::string("missing field '") + key + "'");
  }
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw InputError(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& doc, const char* key, std::optional<std::string> fallback = std::nullopt) {
  if (!doc.contains(key)) {
    if (fallback) return *fallback;
    throw InputError(std::string("missing field '") + key + "'");
  }
  const json& v = doc.at(key);
  if (!v.is_string()) throw InputError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

template <class T, class Parse>
std::vector<T> scalar_or_array(const json& doc, const char* key, Parse parse) {
  const json& v = require_field(doc, key);
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(parse(e));
  } else {
    out.push_back(parse(v));
  }
  return out;
}

json step_to_json(const StepPolicy& step) {
  if (const auto* f = std::get_if<FixedStep>(&step)) return {{"policy", "fixed"}, {"alpha", f->alpha}};
  const auto& a = std::get<ArmijoStep>(step);
  return {{"policy", "armijo"},
          {"alpha0", a.alpha0},
          {"shrink", a.shrink},
          {"slope", a.slope},
          {"max_backtracks", a.max_backtracks}};
}

StepPolicy parse_step(const json& doc, Method method, std::size_t d, std::size_t ell, double lambda) {
  const json step_doc = doc.contains("step") ? doc.at("step") : json{{"policy", "armijo"}};
  if (!step_doc.is_object()) throw InputError("'step' must be an object");
  const std::string policy = get_string(step_doc, "policy");
  if (policy == "fixed") {
    FixedStep fixed;
    const json alpha = step_doc.contains("alpha") ? step_doc.at("alpha") : json("theory");
    if (alpha.is_string() && alpha.get<std::string>() == "theory") {
      fixed.alpha = method == Method::gd ? 1.0 / lambda : theory_step(d, ell, lambda);
    } else if (alpha.is_number()) {
      fixed.alpha = alpha.get<double>();
    } else {
      throw InputError("'alpha' must be a number or \"theory\"");
    }
    if (!(fixed.alpha > 0.0)) throw InputError("'alpha' must be positive");
    return fixed;
  }
  if (policy == "armijo") {
    ArmijoStep a;
    a.alpha0 = get_number(step_doc, "alpha0", a.alpha0);
    a.shrink = get_number(step_doc, "shrink", a.shrink);
    a.slope = get_number(step_doc, "slope", a.slope);
    a.max_backtracks = static_cast<int>(get_count(step_doc, "max_backtracks", 50));
    if (!(a.alpha0 > 0.0) || !(a.shrink > 0.0 && a.shrink < 1.0) || !(a.slope > 0.0 && a.slope < 1.0))
      throw InputError("armijo parameters out of range");
    return a;
  }
  throw InputError("unknown step policy '" + policy + "'");
}

std::string default_label(const SolverSpec& s) {
  const std::string policy = std::holds_alternative<FixedStep>(s.step) ? "fixed" : "armijo";
  if (s.method == Method::gd) return "gd-" + policy;
  return "ssd-" + std::string(to_string(s.scheme)) + "-l" + std::to_string(s.ell) + "-" + policy;
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

// ---------------------------------------------------------------- csv

bool needs_quotes(const std::string& s) { return s.find_first_of(",\"\r\n") != std::string::npos; }

std::string quote(const std::string& s) {
  if (!needs_quotes(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC-4180 record reader; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (int ch = in.get(); ch != std::char_traits<char>::eof(); ch = in.get()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      field += c;
    }
  }
  if (quoted) throw InputError("trace csv: unterminated quoted field");
  fields.push_back(std::move(field));
  return any;
}

template <class T>
T parse_integer(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("trace csv: bad integer '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("trace csv: bad number '" + s + "'");
  return v;
}

// ---------------------------------------------------------------- aggregation

// Last-observation-carried-forward value at x (rows sorted by key).
template <class Key>
double locf(const std::vector<TraceRow>& rows, Key key, std::uint64_t x) {
  auto it = std::upper_bound(rows.begin(), rows.end(), x,
                             [&](std::uint64_t v, const TraceRow& r) { return v < key(r); });
  if (it == rows.begin()) return rows.front().rel_error;
  return std::prev(it)->rel_error;
}

std::vector<std::uint64_t> make_grid(std::uint64_t max_value, std::size_t points) {
  std::vector<std::uint64_t> grid;
  points = std::max<std::size_t>(points, 2);
  for (std::size_t j = 0; j < points; ++j) {
    const long double t = static_cast<long double>(j) / static_cast<long double>(points - 1);
    grid.push_back(static_cast<std::uint64_t>(std::llround(t * static_cast<long double>(max_value))));
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

template <class Key>
json band(const std::vector<const ReplicateTrace*>& runs, const std::vector<std::uint64_t>& grid, Key key) {
  std::vector<double> p10, p50, p90, mean;
  for (std::uint64_t g : grid) {
    std::vector<double> vals;
    vals.reserve(runs.size());
    for (const auto* r : runs) vals.push_back(locf(r->rows, key, g));
    double s = 0.0;
    for (double v : vals) s += v;
    mean.push_back(s / static_cast<double>(vals.size()));
    p10.push_back(nearest_rank_percentile(vals, 10));
    p50.push_back(nearest_rank_percentile(vals, 50));
    p90.push_back(nearest_rank_percentile(vals, 90));
  }
  return {{"p10", p10}, {"p50", p50}, {"p90", p90}, {"mean", mean}};
}

json optional_costs(const std::vector<std::optional<std::uint64_t>>& costs) {
  json arr = json::array();
  for (const auto& c : costs) arr.push_back(c ? json(*c) : json(nullptr));
  return arr;
}

json median_cost(const std::vector<std::optional<std::uint64_t>>& costs) {
  std::vector<double> vals;
  for (const auto& c : costs)
    vals.push_back(c ? static_cast<double>(*c) : std::numeric_limits<double>::infinity());
  if (vals.empty()) return nullptr;
  const double m = nearest_rank_percentile(vals, 50);
  return std::isfinite(m) ? json(m) : json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------- benchmarks / config

Benchmark make_benchmark(const BenchmarkSpec& spec) {
  try {
    if (spec.name == "nesterov_worst") return nesterov_worst(spec.d, spec.r, spec.lambda);
    if (spec.name == "quadratic") return quadratic(spec.d, spec.gamma, spec.lambda, spec.spectrum);
    if (spec.name == "rankdef_least_squares")
      return rankdef_least_squares(spec.n, spec.d, spec.rank, spec.seed, std::sqrt(spec.gamma / 2.0),
                                   std::sqrt(spec.lambda / 2.0));
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("benchmark: ") + e.what());
  }
  throw InputError("unknown benchmark '" + spec.name + "'");
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    const json& b = require_field(doc, "benchmark");
    cfg.benchmark.name = get_string(b, "name");
    cfg.benchmark.d = get_count(b, "d");
    if (cfg.benchmark.name == "nesterov_worst") {
      cfg.benchmark.r = get_count(b, "r");
      cfg.benchmark.lambda = get_number(b, "lambda");
    } else if (cfg.benchmark.name == "quadratic") {
      cfg.benchmark.gamma = get_number(b, "gamma");
      cfg.benchmark.lambda = get_number(b, "lambda");
      const std::string spectrum = get_string(b, "spectrum", "log-uniform");
      if (spectrum == "log-uniform") {
        cfg.benchmark.spectrum = Spectrum::log_uniform;
      } else if (spectrum == "linear") {
        cfg.benchmark.spectrum = Spectrum::linear;
      } else {
        throw InputError("unknown spectrum '" + spectrum + "'");
      }
    } else if (cfg.benchmark.name == "rankdef_least_squares") {
      cfg.benchmark.n = get_count(b, "n");
      cfg.benchmark.rank = get_count(b, "rank");
      cfg.benchmark.seed = get_count(b, "seed", 0);
      // defaults correspond to singular values in [1, 2]
      cfg.benchmark.gamma = get_number(b, "gamma", 2.0);
      cfg.benchmark.lambda = get_number(b, "lambda", 8.0);
    } else {
      throw InputError("unknown benchmark '" + cfg.benchmark.name + "'");
    }

    const std::string backend = get_string(doc, "backend", "dual-ad");
    const auto parsed_backend = parse_backend(backend);
    if (!parsed_backend) throw InputError("unknown backend '" + backend + "'");
    cfg.backend = *parsed_backend;
    if (doc.contains("fd_step")) {
      cfg.fd_step = get_number(doc, "fd_step");
      if (!(*cfg.fd_step > 0.0)) throw InputError("'fd_step' must be positive");
    }

    if (doc.contains("x0")) {
      const json& x0 = doc.at("x0");
      if (x0.is_string()) {
        cfg.x0_kind = x0.get<std::string>();
        if (cfg.x0_kind != "zero" && cfg.x0_kind != "ones") throw InputError("'x0' must be \"zero\", \"ones\" or an array");
      } else if (x0.is_array()) {
        cfg.x0_kind = "explicit";
        for (const auto& v : x0) {
          if (!v.is_number()) throw InputError("'x0' entries must be numbers");
          cfg.x0_values.push_back(v.get<double>());
        }
      } else {
        throw InputError("'x0' must be \"zero\", \"ones\" or an array");
      }
    }

    cfg.replicates = get_count(doc, "replicates", 1);
    if (cfg.replicates < 1) throw InputError("'replicates' must be >= 1");
    cfg.seed = get_count(doc, "seed", 0);
    cfg.max_iterations = get_count(doc, "max_iterations", cfg.max_iterations);
    cfg.max_fevals = get_count(doc, "max_fevals", cfg.max_fevals);
    if (doc.contains("target_rel_error")) cfg.target_rel_error = get_number(doc, "target_rel_error");
    cfg.output_dir = base_dir / fs::path(get_string(doc, "output_dir", "out"));
    cfg.profile_threshold = get_number(doc, "profile_threshold", cfg.profile_threshold);
    if (!(cfg.profile_threshold > 0.0 && cfg.profile_threshold < 1.0))
      throw InputError("'profile_threshold' must lie in (0, 1)");
    cfg.grid_points = get_count(doc, "grid_points", cfg.grid_points);
    if (cfg.grid_points < 2) throw InputError("'grid_points' must be >= 2");
    if (doc.contains("allow_baseline_sampler")) {
      if (!doc.at("allow_baseline_sampler").is_boolean()) throw InputError("'allow_baseline_sampler' must be a boolean");
      cfg.allow_baseline_sampler = doc.at("allow_baseline_sampler").get<bool>();
    }

    const Benchmark bench = make_benchmark(cfg.benchmark);
    const std::size_t d = bench.dim();
    const double lambda = bench.lambda.value_or(1.0);
    if (cfg.x0_kind == "explicit" && cfg.x0_values.size() != d)
      throw MismatchError("'x0' has " + std::to_string(cfg.x0_values.size()) + " entries, benchmark has d = " +
                          std::to_string(d));

    const json& solvers = require_field(doc, "solvers");
    if (!solvers.is_array()) throw InputError("'solvers' must be an array");
    for (const auto& s : solvers) {
      if (!s.is_object()) throw InputError("solver entries must be objects");
      const std::string method = get_string(s, "method", "ssd");
      if (method == "gd") {
        SolverSpec spec;
        spec.method = Method::gd;
        spec.ell = d;
        spec.step = parse_step(s, Method::gd, d, d, lambda);
        spec.label = get_string(s, "label", default_label(spec));
        cfg.solvers.push_back(spec);
        continue;
      }
      if (method != "ssd") throw InputError("unknown method '" + method + "'");
      const auto schemes = scalar_or_array<Scheme>(s, "scheme", [](const json& v) {
        if (!v.is_string()) throw InputError("'scheme' must be a string");
        const auto sc = parse_scheme(v.get<std::string>());
        if (!sc) throw InputError("unknown scheme '" + v.get<std::string>() + "'");
        return *sc;
      });
      const auto ells = scalar_or_array<std::size_t>(s, "ell", [](const json& v) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw InputError("'ell' must be a positive integer");
        return v.get<std::size_t>();
      });
      const bool single = schemes.size() == 1 && ells.size() == 1;
      if (s.contains("label") && !single) throw InputError("'label' is only allowed on a single-cell solver entry");
      for (Scheme scheme : schemes) {
        for (std::size_t ell : ells) {
          if (ell > d)
            throw MismatchError("solver ell = " + std::to_string(ell) + " exceeds benchmark dimension " +
                                std::to_string(d));
          if (scheme == Scheme::gaussian_iid && !cfg.allow_baseline_sampler)
            throw MismatchError("gaussian-iid is a baseline sampler; set \"allow_baseline_sampler\": true");
          SolverSpec spec;
          spec.method = Method::ssd;
          spec.scheme = scheme;
          spec.ell = ell;
          spec.step = parse_step(s, Method::ssd, d, ell, lambda);
          spec.label = single ? get_string(s, "label", default_label(spec)) : default_label(spec);
          cfg.solvers.push_back(spec);
        }
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  if (cfg.solvers.empty()) throw MismatchError("empty solver grid");
  std::vector<std::string> labels;
  for (const auto& s : cfg.solvers) labels.push_back(s.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw MismatchError("duplicate solver labels in grid");
  return cfg;
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open config '" + file.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc, file.parent_path());
}

DenseVector initial_point(const ExperimentConfig& config, const Benchmark& benchmark) {
  const std::size_t d = benchmark.dim();
  if (config.x0_kind == "explicit") return DenseVector(config.x0_values);
  if (config.x0_kind == "zero") return DenseVector(d);
  if (config.x0_kind == "ones") return DenseVector(d, 1.0);
  // nesterov_worst starts at the origin; the others have their optimum there
  return benchmark.name == "nesterov_worst" ? DenseVector(d) : DenseVector(d, 1.0);
}

// ---------------------------------------------------------------- traces

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return {buf, ptr};
}

std::vector<TraceRow> to_rows(const OptimizerTrace& trace, const std::string& run_id) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    TraceRow row;
    row.run_id = run_id;
    row.iteration = r.iteration;
    row.fevals = r.fevals;
    row.f_value = r.f_value;
    row.rel_error = r.rel_error;
    row.step_size = r.step_size;
    row.scheme = trace.solver;
    row.ell = trace.ell;
    row.seed = trace.seed;
    row.stream_id = trace.stream_id;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << quote(r.run_id) << ',' << r.iteration << ',' << r.fevals << ',' << format_double(r.f_value) << ','
        << format_double(r.rel_error) << ',' << format_double(r.step_size) << ',' << quote(r.scheme) << ',' << r.ell
        << ',' << r.seed << ',' << r.stream_id << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<std::string> fields;
  if (!read_record(in, fields)) throw InputError("trace csv: empty file");
  std::string header;
  for (std::size_t i = 0; i < fields.size(); ++i) header += (i ? "," : "") + fields[i];
  if (header != kTraceHeader) throw InputError("trace csv: unexpected header '" + header + "'");

  std::vector<TraceRow> rows;
  while (read_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 10) throw InputError("trace csv: expected 10 fields, got " + std::to_string(fields.size()));
    TraceRow r;
    r.run_id = fields[0];
    r.iteration = parse_integer<std::size_t>(fields[1]);
    r.fevals = parse_integer<std::uint64_t>(fields[2]);
    r.f_value = parse_double(fields[3]);
    r.rel_error = parse_double(fields[4]);
    r.step_size = parse_double(fields[5]);
    r.scheme = fields[6];
    r.ell = parse_integer<std::size_t>(fields[7]);
    r.seed = parse_integer<std::uint64_t>(fields[8]);
    r.stream_id = parse_integer<std::uint64_t>(fields[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::pair<std::string, std::size_t> split_run_id(const std::string& run_id) {
  const auto pos = run_id.rfind(':');
  if (pos == std::string::npos) throw InputError("run_id '" + run_id + "' lacks a ':<replicate>' suffix");
  return {run_id.substr(0, pos), parse_integer<std::size_t>(run_id.substr(pos + 1))};
}

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

// ---------------------------------------------------------------- summary

json summarize(const ExperimentConfig& config, std::vector<ReplicateTrace> traces) {
  std::sort(traces.begin(), traces.end(), [](const ReplicateTrace& a, const ReplicateTrace& b) {
    return std::tie(a.solver, a.replicate) < std::tie(b.solver, b.replicate);
  });
  const Benchmark bench = make_benchmark(config.benchmark);
  const DenseVector x0 = initial_point(config, bench);

  json doc;
  doc["benchmark"] = {{"name", config.benchmark.name}, {"d", bench.dim()}};
  if (bench.f_star) doc["benchmark"]["f_star"] = *bench.f_star;
  if (bench.lambda) doc["benchmark"]["lambda"] = *bench.lambda;
  if (bench.gamma) doc["benchmark"]["gamma"] = *bench.gamma;
  doc["backend"] = std::string(to_string(config.backend));
  doc["base_seed"] = config.seed;
  doc["replicates"] = config.replicates;
  doc["percentile_estimator"] = "nearest-rank";
  doc["profile_threshold"] = config.profile_threshold;
  if (config.target_rel_error) doc["target_rel_error"] = *config.target_rel_error;
  doc["solvers"] = json::array();

  for (const auto& spec : config.solvers) {
    std::vector<const ReplicateTrace*> runs;
    for (const auto& t : traces)
      if (t.solver == spec.label && !t.rows.empty()) runs.push_back(&t);
    if (runs.empty()) continue;

    json s;
    s["label"] = spec.label;
    s["method"] = spec.method == Method::gd ? "gd" : "ssd";
    s["scheme"] = spec.method == Method::gd ? "gd" : std::string(to_string(spec.scheme));
    s["ell"] = spec.ell;
    s["step"] = step_to_json(spec.step);
    s["replicates"] = runs.size();

    std::uint64_t max_fevals = 0;
    std::uint64_t max_iter = 0;
    for (const auto* r : runs) {
      max_fevals = std::max(max_fevals, r->rows.back().fevals);
      max_iter = std::max<std::uint64_t>(max_iter, r->rows.back().iteration);
    }
    const auto feval_grid = make_grid(max_fevals, config.grid_points);
    const auto iter_grid = make_grid(max_iter, config.grid_points);
    s["fevals_grid"] = feval_grid;
    s["rel_error_by_fevals"] = band(runs, feval_grid, [](const TraceRow& r) { return r.fevals; });
    s["iteration_grid"] = iter_grid;
    s["rel_error_by_iteration"] =
        band(runs, iter_grid, [](const TraceRow& r) { return static_cast<std::uint64_t>(r.iteration); });

    std::vector<std::optional<std::uint64_t>> to_profile;
    for (const auto* r : runs) to_profile.push_back(fevals_to_decrease(r->rows, config.profile_threshold));
    s["fevals_to_profile_threshold"] = optional_costs(to_profile);

    if (config.target_rel_error) {
      std::vector<std::optional<std::uint64_t>> to_target;
      for (const auto* r : runs) {
        std::optional<std::uint64_t> hit;
        for (const auto& row : r->rows)
          if (row.rel_error <= *config.target_rel_error) {
            hit = row.fevals;
            break;
          }
        to_target.push_back(hit);
      }
      s["fevals_to_target"] = optional_costs(to_target);
      s["median_fevals_to_target"] = median_cost(to_target);
    }

    // theory overlays for fixed-step SSD with an (A0) sampler
    const auto* fixed = std::get_if<FixedStep>(&spec.step);
    if (spec.method == Method::ssd && spec.scheme != Scheme::gaussian_iid && fixed && bench.lambda) {
      const double rel0 = runs.front()->rows.front().rel_error;
      const double d = static_cast<double>(bench.dim());
      const double ell = static_cast<double>(spec.ell);
      json overlay;
      overlay["iteration_grid"] = iter_grid;
      overlay["alpha_within_theory"] = fixed->alpha < 2.0 * ell / (d * *bench.lambda);
      if (bench.gamma) {
        const double omega = ssd_rate_factor(bench.dim(), spec.ell, *bench.gamma, *bench.lambda);
        json bound = json::array();
        for (auto k : iter_grid) bound.push_back(std::pow(omega, static_cast<double>(k)) * rel0);
        overlay["kind"] = "linear";
        overlay["omega"] = omega;
        overlay["bound"] = bound;
      } else if (bench.f_star && bench.distance_to_solution) {
        const double radius = bench.distance_to_solution(x0.span());
        const double scale = *bench.f_star == 0.0 ? 1.0 : std::abs(*bench.f_star);
        json bound = json::array();
        for (auto k : iter_grid)
          bound.push_back(k == 0 ? json(nullptr)
                                 : json(2.0 * d * *bench.lambda * radius * radius /
                                        (static_cast<double>(k) * ell * scale)));
        overlay["kind"] = "convex";
        overlay["radius_at_x0"] = radius;
        overlay["bound"] = bound;
      }
      if (overlay.contains("kind")) s["theory_overlay"] = overlay;
    }
    doc["solvers"].push_back(std::move(s));
  }
  return doc;
}

ExperimentResult execute(const ExperimentConfig& config, std::size_t workers) {
  const Benchmark bench = make_benchmark(config.benchmark);
  const DenseVector x0 = initial_point(config, bench);

  struct Task {
    std::size_t solver;
    std::size_t replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < config.solvers.size(); ++s) {
    // gradient descent is deterministic: one replicate
    const std::size_t reps = config.solvers[s].method == Method::gd ? 1 : config.replicates;
    for (std::size_t i = 0; i < reps; ++i) tasks.push_back({s, i});
  }

  std::vector<ReplicateTrace> traces(tasks.size());
  parallel_for(
      tasks.size(),
      [&](std::size_t t) {
        const SolverSpec& spec = config.solvers[tasks[t].solver];
        ObjectiveOracle oracle(bench.objective, config.backend, config.fd_step);
        OptimizerConfig oc;
        oc.ell = spec.ell;
        oc.scheme = spec.scheme;
        oc.step = spec.step;
        oc.max_iterations = config.max_iterations;
        oc.max_fevals = config.max_fevals;
        oc.target_rel_error = config.target_rel_error;
        oc.seed = config.seed;
        oc.stream_id = tasks[t].replicate;
        oc.f_star = bench.f_star;
        oc.lambda = bench.lambda;
        oc.allow_baseline_sampler = config.allow_baseline_sampler;
        const OptimizerTrace trace = spec.method == Method::gd ? gradient_descent_baseline(oc, oracle, x0.span())
                                                               : run(oc, oracle, x0.span());
        ReplicateTrace& out = traces[t];
        out.solver = spec.label;
        out.replicate = tasks[t].replicate;
        out.rows = to_rows(trace, spec.label + ":" + std::to_string(tasks[t].replicate));
      },
      workers);

  ExperimentResult result;
  result.summary = summarize(config, traces);
  result.traces = std::move(traces);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers) {
  ExperimentResult result = execute(config, workers);

  const fs::path trace_dir = config.output_dir / "traces";
  fs::create_directories(trace_dir);
  // stale replicates from an earlier, larger run would leak into profiles
  for (const auto& entry : fs::directory_iterator(trace_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") fs::remove(entry.path());

  for (const auto& t : result.traces) {
    char rep[16];
    std::snprintf(rep, sizeof rep, "%04zu", t.replicate);
    std::ofstream out(trace_dir / (sanitize(t.solver) + "__rep" + rep + ".csv"), std::ios::binary);
    write_trace_csv(out, t.rows);
    if (!out) throw InputError("cannot write trace file in '" + trace_dir.string() + "'");
  }
  std::ofstream summary(config.output_dir / "summary.json", std::ios::binary);
  summary << result.summary.dump(2) << '\n';
  if (!summary) throw InputError("cannot write summary.json");
  return result;
}

std::vector<ReplicateTrace> load_traces(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("missing trace directory '" + dir.string() + "'");
  const fs::path trace_dir = fs::is_directory(dir / "traces") ? dir / "traces" : dir;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(trace_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no trace CSV files in '" + trace_dir.string() + "'");

  std::vector<ReplicateTrace> traces;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    auto rows = read_trace_csv(in);
    if (rows.empty()) throw InputError("trace file '" + f.string() + "' has no rows");
    auto [solver, rep] = split_run_id(rows.front().run_id);
    traces.push_back({std::move(solver), rep, std::move(rows)});
  }
  std::sort(traces.begin(), traces.end(), [](const ReplicateTrace& a, const ReplicateTrace& b) {
    return std::tie(a.solver, a.replicate) < std::tie(b.solver, b.replicate);
  });
  return traces;
}

// ---------------------------------------------------------------- profiles

std::optional<std::uint64_t> fevals_to_decrease(const std::vector<TraceRow>& rows, double fraction) {
  if (rows.empty()) return std::nullopt;
  // rel_error is an affine image of f with zero at the optimum
  const double start = rows.front().rel_error;
  const double needed = fraction * start;
  for (const auto& r : rows)
    if (start - r.rel_error >= needed) return r.fevals;
  return std::nullopt;
}

std::vector<ProfileRow> profile_rows(const std::vector<ReplicateTrace>& traces, double threshold,
                                     const std::map<std::string, double>& baselines) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("profile threshold must lie in (0, 1)");
  std::vector<SolverTrials> trials;
  for (const auto& t : traces) {
    if (trials.empty() || trials.back().solver != t.solver) trials.push_back({t.solver, {}});
    const auto cost = fevals_to_decrease(t.rows, threshold);
    trials.back().costs.push_back(cost ? std::optional<double>(std::max<double>(1.0, static_cast<double>(*cost)))
                                       : std::nullopt);
  }
  for (const auto& [name, cost] : baselines) {
    if (!(cost > 0.0)) throw InputError("baseline cost for '" + name + "' must be positive");
    trials.push_back({name, {cost}});
  }
  if (trials.empty()) throw InputError("no traces to profile");

  const PerformanceProfile profile(std::move(trials));
  const auto taus = profile.breakpoints();
  std::vector<ProfileRow> rows;
  for (std::size_t s = 0; s < profile.solver_count(); ++s)
    for (const auto& pt : profile.curve(s, taus)) rows.push_back({profile.solver(s), pt.tau, pt.fraction});
  return rows;
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& rows) {
  out << "solver,tau,fraction\n";
  for (const auto& r : rows) out << quote(r.solver) << ',' << format_double(r.tau) << ',' << format_double(r.fraction) << '\n';
}

// ---------------------------------------------------------------- theory

json theory_report(const json& params, const fs::path& base_dir) {
  if (!params.is_object()) throw InputError("theory params must be a JSON object");
  TheoryParams tp;
  double f0_err = 1.0;
  double radius = 1.0;
  try {
    tp.d = get_count(params, "d");
    tp.ell = get_count(params, "ell");
    tp.eps = get_number(params, "eps");
    tp.gamma = get_number(params, "gamma", 1.0);
    tp.lambda = get_number(params, "lambda", 1.0);
    tp.k = get_count(params, "k", 50);
    if (params.contains("t")) tp.t = get_number(params, "t");
    f0_err = get_number(params, "f0_err", 1.0);
    radius = get_number(params, "radius", 1.0);
  } catch (const json::exception& e) {
    throw InputError(std::string("theory params: ") + e.what());
  }

  json out;
  try {
    const RateBounds rates = expected_rate_bounds(tp, f0_err, radius);
    const HighProbabilityBound hp = high_prob_bound(tp);
    out["params"] = params;
    out["delta"] = hp.delta;
    out["t"] = hp.t;
    out["rho"] = hp.rho;
    out["omega"] = rates.omega;
    out["gaussian_smoothing_factor"] = gaussian_smoothing_rate_factor(tp.d, tp.gamma, tp.lambda);
    out["sigma_sq"] = hp.sigma_sq.back();

    json k = json::array();
    json convex = json::array();
    for (std::size_t i = 0; i <= tp.k; ++i) {
      k.push_back(i);
      convex.push_back(std::isfinite(rates.convex[i]) ? json(rates.convex[i]) : json(nullptr));
    }
    out["curves"] = {{"k", k},
                     {"strongly_convex", rates.strongly_convex},
                     {"convex", convex},
                     {"nonconvex", rates.nonconvex},
                     {"sigma_sq", hp.sigma_sq},
                     {"tail", hp.tail}};

    if (params.contains("grid")) {
      const json& g = params.at("grid");
      const double eps = get_number(g, "eps");
      std::vector<std::size_t> ds;
      std::vector<std::size_t> ls;
      for (const auto& v : require_field(g, "d_values")) ds.push_back(v.get<std::size_t>());
      for (const auto& v : require_field(g, "ell_values")) ls.push_back(v.get<std::size_t>());
      const auto cells = embedding_grid(eps, ds, ls);
      json grid = json::array();
      for (const auto& c : cells) grid.push_back({{"d", c.d}, {"ell", c.ell}, {"delta", c.delta}});
      out["grid"] = {{"eps", eps}, {"cells", grid}};
      if (params.contains("grid_csv")) {
        const fs::path csv = base_dir / fs::path(get_string(params, "grid_csv"));
        if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
        std::ofstream f(csv, std::ios::binary);
        f << "eps,d,ell,delta\n";
        for (const auto& c : cells) f << format_double(eps) << ',' << c.d << ',' << c.ell << ',' << format_double(c.delta) << '\n';
        if (!f) throw InputError("cannot write grid csv '" + csv.string() + "'");
      }
    }
  } catch (const DomainError& e) {
    throw InputError(std::string("theory params: ") + e.what());
  } catch (const json::exception& e) {
    throw InputError(std::string("theory params: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------- sampler validation

EmbeddingEstimate estimate_embedding(Scheme scheme, std::size_t d, std::size_t ell, double eps, std::size_t draws,
                                     std::uint64_t seed, std::size_t workers) {
  if (ell < 1 || ell > d) throw MismatchError("need 1 <= ell <= d");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
  if (draws == 0) throw InputError("draws must be positive");

  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  const DenseVector v = DenseVector::basis(d, 0);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        RngStream rng(seed, c);
        const std::size_t n = std::min(kChunk, draws - c * kChunk);
        std::size_t h = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (embedding_success(sample_directions(scheme, rng, d, ell), v.span(), eps)) ++h;
        hits[c] = h;
      },
      workers);

  EmbeddingEstimate est;
  est.draws = draws;
  est.successes = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  est.frequency = static_cast<double>(est.successes) / static_cast<double>(draws);
  if (scheme == Scheme::haar) est.theory = embedding_probability(d, ell, eps);
  // e_1 survives a coordinate draw iff column 1 is selected; then ||P^T e_1||^2 = d/l >= 1
  if (scheme == Scheme::coordinate) est.theory = static_cast<double>(ell) / static_cast<double>(d);
  const double p = est.theory.value_or(est.frequency);
  est.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
  return est;
}

}  // namespace ssd::experiment
