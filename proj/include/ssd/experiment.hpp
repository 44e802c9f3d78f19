#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssd/benchmarks.hpp"
#include "ssd/optimizer.hpp"
#include "ssd/parallel.hpp"
#include "ssd/samplers.hpp"

namespace ssd::experiment {

/// Malformed or invalid input (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that does not fit together, e.g. l > d or an empty
/// solver grid (CLI exit code 3).
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchmarkSpec {
  std::string name;
  std::size_t d = 0;
  std::size_t r = 0;     // nesterov_worst
  std::size_t n = 0;     // rankdef_least_squares rows
  std::size_t rank = 0;  // rankdef_least_squares
  double lambda = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  Spectrum spectrum = Spectrum::log_uniform;
};

Benchmark make_benchmark(const BenchmarkSpec& spec);

enum class Method { ssd, gd };

struct SolverSpec {
  std::string label;
  Method method = Method::ssd;
  Scheme scheme = Scheme::haar;
  std::size_t ell = 1;
  StepPolicy step = ArmijoStep{};
};

struct ExperimentConfig {
  BenchmarkSpec benchmark;
  Backend backend = Backend::dual_ad;
  std::optional<double> fd_step;
  std::string x0_kind = "default";  // default | zero | ones | explicit
  std::vector<double> x0_values;
  std::vector<SolverSpec> solvers;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 1000;
  std::uint64_t max_fevals = 100000;
  std::optional<double> target_rel_error;
  std::filesystem::path output_dir = "out";
  double profile_threshold = 0.95;
  std::size_t grid_points = 101;
  bool allow_baseline_sampler = false;
};

/// Parses the flat JSON run document. Relative paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& file);

DenseVector initial_point(const ExperimentConfig& config, const Benchmark& benchmark);

/// One row of the trace CSV.
struct TraceRow {
  std::string run_id;
  std::size_t iteration = 0;
  std::uint64_t fevals = 0;
  double f_value = 0.0;
  double rel_error = 0.0;
  double step_size = 0.0;
  std::string scheme;
  std::size_t ell = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

inline constexpr const char* kTraceHeader = "run_id,iteration,fevals,f_value,rel_error,step_size,scheme,ell,seed,stream_id";

/// A replicate's trace. run_id is "<solver label>:<replicate>".
struct ReplicateTrace {
  std::string solver;
  std::size_t replicate = 0;
  std::vector<TraceRow> rows;
};

std::vector<TraceRow> to_rows(const OptimizerTrace& trace, const std::string& run_id);
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
/// Throws InputError on a malformed file.
std::vector<TraceRow> read_trace_csv(std::istream& in);
/// Splits "<label>:<replicate>".
std::pair<std::string, std::size_t> split_run_id(const std::string& run_id);

/// Nearest-rank percentile (p in (0, 100]) of unsorted values.
double nearest_rank_percentile(std::vector<double> values, double p);

/// Aggregates traces into the summary document. Traces are sorted by
/// (solver, replicate) first, so the result does not depend on input order.
nlohmann::json summarize(const ExperimentConfig& config, std::vector<ReplicateTrace> traces);

struct ExperimentResult {
  std::vector<ReplicateTrace> traces;
  nlohmann::json summary;
};

/// Runs every (solver, replicate) pair without writing files.
ExperimentResult execute(const ExperimentConfig& config, std::size_t workers = worker_count());
/// execute() plus output_dir/traces/*.csv and output_dir/summary.json.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t workers = worker_count());

/// Reads every trace CSV in dir/traces (or dir itself). Throws InputError if none.
std::vector<ReplicateTrace> load_traces(const std::filesystem::path& dir);

/// First charged feval count at which the objective closed `fraction` of the
/// gap between its starting value and the optimum.
std::optional<std::uint64_t> fevals_to_decrease(const std::vector<TraceRow>& rows, double fraction);

struct ProfileRow {
  std::string solver;
  double tau = 0.0;
  double fraction = 0.0;
};

/// Profile curves at every breakpoint. `baselines` adds deterministic
/// solvers with a single fixed cost (drawn as vertical lines).
std::vector<ProfileRow> profile_rows(const std::vector<ReplicateTrace>& traces, double threshold,
                                     const std::map<std::string, double>& baselines = {});
void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& rows);

/// Theory report from a params document. Writes the embedding grid CSV if
/// the document asks for one.
nlohmann::json theory_report(const nlohmann::json& params, const std::filesystem::path& base_dir);

struct EmbeddingEstimate {
  std::size_t draws = 0;
  std::size_t successes = 0;
  double frequency = 0.0;
  double standard_error = 0.0;
  std::optional<double> theory;  // exact success probability where known
};

/// Monte-Carlo embedding frequency for v = e_1. Draws are split into fixed
/// chunks, chunk c on stream c, so results do not depend on worker count.
EmbeddingEstimate estimate_embedding(Scheme scheme, std::size_t d, std::size_t ell, double eps, std::size_t draws,
                                     std::uint64_t seed, std::size_t workers = worker_count());

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace ssd::experiment
