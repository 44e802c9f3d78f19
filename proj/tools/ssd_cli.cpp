// ssd: experiment runner for stochastic subspace descent.
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssd/experiment.hpp"

namespace ex = ssd::experiment;
namespace fs = std::filesystem;

namespace {

constexpr int kInputError = 2;
constexpr int kMismatch = 3;

int cmd_run(const std::string& config_path) {
  const ex::ExperimentConfig config = ex::load_config(config_path);
  const ex::ExperimentResult result = ex::run_experiment(config);
  std::cout << "wrote " << result.traces.size() << " traces to " << (config.output_dir / "traces").string() << '\n'
            << "wrote " << (config.output_dir / "summary.json").string() << '\n';
  return 0;
}

int cmd_theory(const std::string& params_path, const std::string& out_path) {
  std::ifstream in(params_path);
  if (!in) throw ex::InputError("cannot open params '" + params_path + "'");
  nlohmann::json params;
  try {
    params = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ex::InputError(std::string("params parse error: ") + e.what());
  }
  const nlohmann::json report = ex::theory_report(params, fs::path(params_path).parent_path());
  if (out_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << report.dump(2) << '\n';
    if (!out) throw ex::InputError("cannot write '" + out_path + "'");
  }
  return 0;
}

int cmd_profile(const std::string& dir, double threshold, const std::vector<std::string>& baselines,
                const std::string& out_path) {
  std::map<std::string, double> extra;
  for (const auto& b : baselines) {
    const auto eq = b.rfind('=');
    if (eq == std::string::npos || eq == 0) throw ex::InputError("baseline must look like name=fevals, got '" + b + "'");
    try {
      std::size_t used = 0;
      const std::string num = b.substr(eq + 1);
      const double cost = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
      extra[b.substr(0, eq)] = cost;
    } catch (const std::exception&) {
      throw ex::InputError("bad baseline feval count in '" + b + "'");
    }
  }
  const auto rows = ex::profile_rows(ex::load_traces(dir), threshold, extra);
  if (out_path.empty()) {
    ex::write_profile_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    ex::write_profile_csv(out, rows);
    if (!out) throw ex::InputError("cannot write '" + out_path + "'");
  }
  return 0;
}

int cmd_validate(const std::string& scheme_name, std::size_t d, std::size_t ell, double eps, std::size_t draws,
                 std::uint64_t seed) {
  const auto scheme = ssd::parse_scheme(scheme_name);
  if (!scheme) throw ex::InputError("unknown scheme '" + scheme_name + "'");
  const auto est = ex::estimate_embedding(*scheme, d, ell, eps, draws, seed);
  nlohmann::json out = {{"scheme", scheme_name},  {"d", d},
                        {"ell", ell},             {"eps", eps},
                        {"draws", est.draws},     {"successes", est.successes},
                        {"frequency", est.frequency}, {"standard_error", est.standard_error}};
  if (est.theory) {
    out["theory"] = *est.theory;
    out["z_score"] = est.standard_error > 0.0 ? (est.frequency - *est.theory) / est.standard_error : 0.0;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic subspace descent experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config; writes traces and summary.json");
  run->add_option("config", config_path, "Experiment JSON")->required();

  std::string params_path;
  std::string theory_out;
  auto* theory = app.add_subcommand("theory", "Embedding probabilities and convergence bounds");
  theory->add_option("params", params_path, "Theory parameter JSON")->required();
  theory->add_option("--out", theory_out, "Write the report here instead of stdout");

  std::string trace_dir;
  double threshold = 0.0;
  std::vector<std::string> baselines;
  std::string profile_out;
  auto* profile = app.add_subcommand("profile", "Performance profile from experiment traces");
  profile->add_option("dir", trace_dir, "Experiment output directory")->required();
  profile->add_option("--threshold", threshold, "Fraction of the initial gap to close")->required();
  profile->add_option("--baseline", baselines, "Deterministic solver as name=fevals (repeatable)");
  profile->add_option("--out", profile_out, "Write the CSV here instead of stdout");

  std::string scheme;
  std::size_t d = 0;
  std::size_t ell = 0;
  double eps = 0.0;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  auto* validate = app.add_subcommand("validate-sampler", "Monte-Carlo embedding frequency for v = e_1");
  validate->add_option("--scheme", scheme, "haar | coordinate | gaussian-iid")->required();
  validate->add_option("--d", d, "Ambient dimension")->required();
  validate->add_option("--ell", ell, "Subspace dimension")->required();
  validate->add_option("--eps", eps, "Embedding tolerance")->required();
  validate->add_option("--draws", draws, "Number of draws")->required();
  validate->add_option("--seed", seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*theory) return cmd_theory(params_path, theory_out);
    if (*profile) return cmd_profile(trace_dir, threshold, baselines, profile_out);
    if (*validate) return cmd_validate(scheme, d, ell, eps, draws, seed);
  } catch (const ex::MismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMismatch;
  } catch (const ex::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
