#include "sawsle/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Pivot-algorithm SAW simulation and SLE(8/3) comparison"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::string output_dir;
  auto* simulate = app.add_subcommand("simulate", "Run chains and write comparison CSVs and a report");
  simulate->add_option("-c,--config", config_file, "key = value configuration file");
  simulate->add_option("-s,--set", overrides, "override, key=value (repeatable)");
  simulate->add_option("-o,--output", output_dir, "output directory (same as --set output=DIR)");

  std::string kind;
  double d = 0.0;
  std::string grid;
  auto* exact = app.add_subcommand("exact", "Tabulate an exact or reference CDF");
  exact->add_option("-k,--kind", kind, "xe, xf, ye, yf, theta_e, theta_f, pass_right")->required();
  exact->add_option("-d,--d", d, "semicircle offset for theta kinds");
  exact->add_option("-g,--grid", grid, "comma-separated points; pass_right angles in radians, 'pi/2' allowed");

  std::string input, against;
  double lo = 0.0, hi = 1.0;
  auto* compare = app.add_subcommand("compare", "Re-diff an output CSV, or compare two of them");
  compare->add_option("-i,--input", input, "CSV written by simulate")->required();
  compare->add_option("-a,--against", against, "second CSV; compares the two empirical curves");
  compare->add_option("--from", lo, "first grid fraction used with --against")->check(CLI::Range(0.0, 1.0));
  compare->add_option("--to", hi, "last grid fraction used with --against")->check(CLI::Range(0.0, 1.0));

  std::int64_t max_length = 10;
  std::string domain = "half-plane";
  auto* unfold = app.add_subcommand("unfold-check", "Unfold every short walk and validate each move");
  unfold->add_option("-n,--max-length", max_length, "longest walk length to enumerate");
  unfold->add_option("-D,--domain", domain, "half-plane or cut-plane");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sawsle::cli::kConfigError;
  }

  if (*simulate) {
    if (!output_dir.empty()) overrides.push_back("output=" + output_dir);
    return sawsle::cli::cmd_simulate(config_file, overrides, std::cout, std::cerr);
  }
  if (*exact) return sawsle::cli::cmd_exact(kind, d, grid, std::cout, std::cerr);
  if (*compare) return sawsle::cli::cmd_compare(input, against, lo, hi, std::cout, std::cerr);
  if (*unfold) return sawsle::cli::cmd_unfold_check(max_length, domain, std::cout, std::cerr);
  return sawsle::cli::kConfigError;
}
