/// @file main.cpp
/// Command-line driver. Usage:
///   immersed-fsi <subcommand> [--config FILE] [--section.key VALUE]...
/// Subcommands: run, sweep, converge, stokes-mms, check.
#include <iostream>
#include <string>
#include <vector>

#include "fsi/config.hpp"
#include "fsi/errors.hpp"

namespace {

void print_usage(std::ostream& os) {
  os << "usage: immersed-fsi <subcommand> [--config FILE] [--section.key VALUE]...\n"
     << "\n"
     << "subcommands:\n"
     << "  run         integrate one scenario, write the energy trace\n"
     << "  sweep       classify stability across a ladder of time steps\n"
     << "  converge    refinement study against a fine reference run\n"
     << "  stokes-mms  manufactured-solution check of the fluid discretization\n"
     << "  check       report the structure spectrum and step-size bounds\n"
     << "\n"
     << "configuration keys (every key has a default):\n";
  for (const auto& k : fsi::config_keys()) os << "  " << k << "\n";
  os << "\nexit codes: 0 success, 1 aborted or failed experiment, 2 usage error\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "-h" || args[0] == "--help" || args[0] == "help") {
    print_usage(args.empty() ? std::cerr : std::cout);
    return args.empty() ? 2 : 0;
  }
  const std::string subcommand = args[0];
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  for (size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "-h" || a == "--help") {
      print_usage(std::cout);
      return 0;
    }
    if (a.rfind("--", 0) != 0) {
      std::cerr << "error: expected --option, got '" << a << "'\n";
      return 2;
    }
    if (i + 1 >= args.size()) {
      std::cerr << "error: missing value for '" << a << "'\n";
      return 2;
    }
    const std::string value = args[++i];
    if (a == "--config")
      config_path = value;
    else
      overrides.emplace_back(a.substr(2), value);
  }
  try {
    fsi::RunConfig cfg = fsi::parse_config(config_path, overrides);
    return fsi::dispatch(subcommand, cfg, std::cout, std::cerr);
  } catch (const fsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
