#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frbm/experiments.hpp"

namespace {

void print_summary(const frbm::RunConfig& cfg,
                   const frbm::ExperimentReport& report) {
  std::printf("command=%s example=%s preset=%s config_hash=%s\n",
              cfg.command.c_str(), cfg.example.c_str(), cfg.preset.c_str(),
              cfg.config_hash().c_str());
  for (const auto& [name, table] : report.tables)
    std::printf("wrote %s/%s.csv (%zu rows)\n", cfg.out_dir.c_str(),
                name.c_str(), table.rows.size());
  std::printf("wrote %s/summary.json\n", cfg.out_dir.c_str());
  if (cfg.command == "verify") {
    const auto& table = report.tables.at("verify");
    for (const auto& row : table.rows)
      std::printf("  %-28s measured=%-12s threshold=%-12s %s\n",
                  row[0].c_str(), row[1].c_str(), row[2].c_str(),
                  row[3] == "1" ? "pass" : "FAIL");
    std::printf("verify: %s\n", report.ok ? "all checks passed"
                                          : "checks FAILED");
  }
}

}  // namespace

int main(int argc, char** argv) {
  frbm::RunConfig cfg;
  CLI::App app{
      "Fractional-order FEM and certified reduced-basis experiment driver"};
  app.set_config("--config", "", "Plain-text key=value config file");
  app.add_option("--command", cfg.command,
                 "convergence|constants|conditioning|greedy|speedup|verify")
      ->capture_default_str();
  app.add_option("--example", cfg.example,
                 "ex1|ex2|ex3|ex4|constant-diffusion|greedy-case-1")
      ->capture_default_str();
  app.add_option("--s", cfg.s_values, "Fractional orders in (1,2)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--levels", cfg.levels, "Mesh element counts, increasing")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--reference-level", cfg.reference_level,
                 "Reference mesh elements for ex3/ex4 errors")
      ->capture_default_str();
  app.add_option("--preset", cfg.preset, "ci|full")->capture_default_str();
  app.add_option("--mode", cfg.mode, "weak|strong greedy selection")
      ->capture_default_str();
  app.add_option("--tol", cfg.tol, "Greedy stopping tolerance")
      ->capture_default_str();
  app.add_option("--n-max", cfg.n_max, "Greedy basis-size cap")
      ->capture_default_str();
  app.add_option("--variant", cfg.variant,
                 "Coercivity bound: alpha|alpha-tilde|gamma")
      ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--repetitions", cfg.repetitions,
                 "Timing repetitions for speedup")
      ->capture_default_str();
  app.add_option("--certify", cfg.n_certify,
                 "Random certification draws")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for sampled parameters")
      ->capture_default_str();
  app.add_flag("--export-operators", cfg.export_operators,
               "Also write operator.mtx and gram.mtx");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    frbm::validate_config(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 3;
  }

  try {
    frbm::ExperimentReport report = frbm::run_experiment(cfg);
    print_summary(cfg, report);
    if (!report.ok) return 2;
  } catch (const frbm::ValidationError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
  return 0;
}
