// pnslab: batch experiment harness for the perturbed Navier-Stokes laboratory.
//
// Subcommands: simulate, stability, counterexample, verify, fixedpoint-demo,
// norms, landau-gen, dss-gen. Each takes --config PATH (flat key = value
// file), --out DIR, --seed N, --threads N; command-line flags override the
// config file. Exit codes: 0 pass, 1 assertion failure, 2 configuration
// refusal.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "pns/config.hpp"
#include "pns/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "seed fixing all randomness");
  cmd->add_option("--threads", args.threads, "worker thread count (runs are "
                                             "reproducible at fixed count)");
}

int run(const std::string& scenario, const CommonArgs& args) {
  pns::config::Config raw;
  if (!args.config_path.empty())
    raw = pns::config::Config::parse_file(args.config_path);
  auto cfg = pns::experiment::ExperimentConfig::from(raw);
  cfg.scenario = scenario;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.threads > 0) cfg.threads = args.threads;

  const auto result = pns::experiment::run_scenario(cfg);
  std::fputs(result.summary_json.c_str(), stdout);
  std::fputc('\n', stdout);
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pnslab: spectral laboratory for perturbed Navier-Stokes around "
               "small weak-L3 backgrounds"};
  app.require_subcommand(1);

  const struct {
    const char* cli;
    const char* scenario;
    const char* help;
  } kCommands[] = {
      {"simulate", "simulate", "evolve configured data and write norm series + snapshots"},
      {"stability", "stability", "small-data decay experiment around a mollified jet"},
      {"counterexample", "counterexample",
       "discretely self-similar non-decay experiment with a smooth control"},
      {"verify", "verify", "run every module invariant suite; exit 0 iff all pass"},
      {"fixedpoint-demo", "fixedpoint_demo", "scalar and R^8 Picard demonstrations"},
      {"norms", "norms", "Lorentz quasinorm reports for a field"},
      {"landau-gen", "landau_gen", "write a mollified jet background snapshot"},
      {"dss-gen", "dss_gen", "write a DSS datum snapshot and its shell inequalities"},
  };

  CommonArgs args[sizeof(kCommands) / sizeof(kCommands[0])];
  int i = 0;
  for (const auto& c : kCommands) {
    CLI::App* cmd = app.add_subcommand(c.cli, c.help);
    add_common(cmd, args[i]);
    ++i;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    i = 0;
    for (const auto& c : kCommands) {
      if (app.get_subcommand(c.cli)->parsed()) return run(c.scenario, args[i]);
      ++i;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "refusal: %s\n", e.what());
    return pns::experiment::kExitRefusal;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pns::experiment::kExitFail;
  }
  return pns::experiment::kExitRefusal;
}
