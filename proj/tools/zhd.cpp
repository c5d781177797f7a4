#include "zhd/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Nonmonotone-descent solvers with a conformance harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string trace_path;
  std::int64_t k1 = -1;
  std::string report_path;
  CLI::App* check = app.add_subcommand("check", "Check an existing trace");
  check->add_option("--trace", trace_path, "Trace CSV file")->required();
  check->add_option("--k1", k1, "Window half-width for the subgradient bound");
  check->add_option("--report", report_path, "Where to write report.json");

  std::string rate_trace;
  double theta = 0.5;
  double burn_in = 0.2;
  CLI::App* rate = app.add_subcommand("rate", "Fit a convergence rate");
  rate->add_option("--trace", rate_trace, "Trace CSV file")->required();
  rate->add_option("--theta", theta, "KL exponent in (0,1)")->required();
  rate->add_option("--burn-in", burn_in, "Burn-in fraction in [0,1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (run->parsed()) {
    return zhd::run_command(config_path, out_dir);
  }
  if (check->parsed()) {
    return zhd::check_command(
        trace_path, k1 >= 0 ? std::optional<std::int64_t>(k1) : std::nullopt,
        report_path.empty() ? std::nullopt
                            : std::optional<std::string>(report_path));
  }
  return zhd::rate_command(rate_trace, theta, burn_in);
}
