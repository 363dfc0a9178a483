#include <iostream>

#include <CLI11.hpp>

#include "alf/cli.hpp"
#include "alf/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for glued ALF hyperKaehler metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ALF_VERSION);

  alf::Command cmd;
  std::uint64_t seed = 0;
  for (const char* name : {"verify", "scaling", "asymptotics", "curvature", "volume", "calibrate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", cmd.config_path, "config JSON")->required();
    sub->add_option("--out", cmd.out_dir, "output directory");
    sub->add_option("--set", cmd.overrides, "dot.path=value override")->take_all();
    sub->add_option("--seed", seed, "seed for every sampler");
    sub->add_option("--threads", cmd.threads, "worker threads");
    sub->callback([&cmd, &seed, sub, name] {
      cmd.verb = alf::parse_verb(name);
      if (sub->count("--seed")) cmd.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : alf::exit_code::config_error;
  }
  return alf::run(cmd);
}
