// Runs one simulated aggregation from a key-value config file and prints
// the report as JSON.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fssa/sim.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run one simulated secure aggregation"};
  std::string config;
  bool transcript = false;
  app.add_option("config", config, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
  app.add_flag("--transcript", transcript, "Include the hex message transcript");
  CLI11_PARSE(app, argc, argv);

  try {
    const fssa::SimReport report = fssa::run_simulation(fssa::load_sim_config(config));
    std::cout << fssa::report_to_json(report, transcript).dump(2) << '\n';
    return report.status == fssa::SimStatus::kSuccess ? 0 : 3;
  } catch (const fssa::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
