#include <CLI11.hpp>

#include "graphnls/cli.hpp"
#include "graphnls/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"graphnls: coupled NLS on star graphs with delta vertex coupling"};
  app.set_version_flag("--version", GRAPHNLS_VERSION);
  app.require_subcommand(1);

  std::string config_path, out_dir, operator_name, input_csv;
  long long seed = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed, "RNG seed (overrides config)");
  };
  add_common(app.add_subcommand("profile", "closed-form standing-wave profile"));
  add_common(app.add_subcommand("ground-state", "constrained energy minimization"));
  auto* spectrum = app.add_subcommand("spectrum", "spectrum of a linearized operator");
  add_common(spectrum);
  spectrum->add_option("--operator", operator_name,
                       "delta_laplacian|L1R|L1I|L2|L2tildeR|L2tildeI|Lplus|Lminus|Leps|L2D")
      ->required();
  add_common(app.add_subcommand("instability", "unstable spectrum and Grillakis bound"));
  add_common(app.add_subcommand("evolve", "time evolution / stability experiment"));
  auto* rearrange = app.add_subcommand("rearrange", "symmetric rearrangement of a field CSV");
  add_common(rearrange);
  rearrange->add_option("--input", input_csv, "field CSV to rearrange")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    graphnls::RunConfig cfg = graphnls::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    return graphnls::run_command(app.get_subcommands().front()->get_name(), cfg, operator_name,
                                 input_csv);
  } catch (const graphnls::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
