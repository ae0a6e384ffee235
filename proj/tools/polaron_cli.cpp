#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "polaron/app/commands.hpp"

namespace app = polaron::app;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<std::size_t> threads;
  std::optional<std::string> regime;
};

app::RunConfig load(const Overrides& o) {
  auto c = app::load_config(o.config);
  if (o.out) c.out_dir = *o.out;
  if (o.tol) c.rel_tol = *o.tol;
  if (o.threads) c.threads = *o.threads;
  if (o.regime) c.regime = *o.regime;
  app::validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Donor-acceptor energy transfer in the polaron frame with correlated bath fluctuations"};
  cli.set_version_flag("--version", POLARON_VERSION);
  cli.require_subcommand(1);

  Overrides o;
  std::function<int(const app::RunConfig&)> command;
  auto add = [&](const char* name, const char* help, int (*fn)(const app::RunConfig&)) {
    auto* sub = cli.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides output.directory)");
    sub->add_option("--tol", o.tol, "relative tolerance of the rate integrals")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "worker threads for grid points")->check(CLI::PositiveNumber);
    sub->add_option("--regime", o.regime, "auto | resonant | full | weak | high_temperature")
        ->check(CLI::IsMember(app::regime_names()));
    sub->callback([&command, fn] { command = fn; });
  };
  add("dynamics", "Bloch-vector trajectories on the configured time grid", app::cmd_dynamics);
  add("crossover", "coherent/incoherent crossover temperature along a sweep axis", app::cmd_crossover);
  add("bath", "tabulate spectral density, propagators and rates", app::cmd_bath);
  add("sweep", "steady state, eigenvalues and coherence diagnostics over a parameter grid", app::cmd_sweep);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::kConfigError;
  }

  try {
    const int code = command(load(o));
    if (code == app::kPartialFailure) std::cerr << "warning: some grid points failed; see manifest\n";
    if (code == app::kNumericalFailure) std::cerr << "error: every grid point failed; see manifest\n";
    return code;
  } catch (const polaron::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::kConfigError;
  } catch (const polaron::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return app::kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return app::kNumericalFailure;
  }
}
