// rwre-lab: config-driven experiments plus analytic/oracle one-shots.
//
//   rwre-lab run    --config experiment.json   (exit 0 pass / 1 fail / 2 bad config)
//   rwre-lab bounds --spec   model.json        (analytic report on stdout)
//   rwre-lab oracle --query  query.json        (exact solver dispatch on stdout)
//
// RWRE_THREADS caps the OpenMP worker count; results are identical for any
// value, so the variable only trades wall time.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "rwre/errors.hpp"
#include "rwre/experiment.hpp"

namespace {

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* v = std::getenv("RWRE_THREADS")) {
    int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rwre::ConfigError("cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw rwre::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

int report_error(const char* what) {
  std::cerr << nlohmann::json{{"error", what}}.dump(2) << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"random walks in i.i.d. two-class random environments"};
  app.require_subcommand(1);
  std::string config_path, spec_path, query_path;
  CLI::App* run = app.add_subcommand("run", "run a JSON-configured experiment");
  run->add_option("--config", config_path, "experiment config file")->required();
  CLI::App* bnd = app.add_subcommand("bounds", "analytic velocity bounds report");
  bnd->add_option("--spec", spec_path, "model or {p, blue, red} JSON file")->required();
  CLI::App* orc = app.add_subcommand("oracle", "exact finite-window solvers");
  orc->add_option("--query", query_path, "oracle query JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad invocation is a config failure
  }

  try {
    if (run->parsed()) {
      rwre::experiment::ExperimentConfig cfg =
          rwre::experiment::parse_config_file(config_path);
      rwre::experiment::ExperimentResult res = rwre::experiment::run_experiment(cfg);
      std::cout << res.summary.dump(2) << "\n";
      return res.exit_code;
    }
    if (bnd->parsed()) {
      std::cout << rwre::experiment::run_bounds_query(read_json_file(spec_path)).dump(2)
                << "\n";
      return 0;
    }
    std::cout << rwre::experiment::run_oracle_query(read_json_file(query_path)).dump(2)
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report_error(e.what());
  }
}
