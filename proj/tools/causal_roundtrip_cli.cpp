// Command line front end. Talks to the library through the C API only.

#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "causal_roundtrip.h"

int main(int argc, char** argv) {
  CLI::App app{"causal round trip: invertible diffusion SCMs and counterfactual benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", crt_version());

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  CLI::App* run = app.add_subcommand("run", "run an experiment config and write its report");
  run->add_option("config", config_path, "path to a config JSON file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--seeds", seeds, "comma separated seed list, e.g. 1,2,3");

  std::string preset_name;
  CLI::App* preset = app.add_subcommand("preset", "print a named preset config as JSON");
  preset->add_option("name", preset_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  int rc = CRT_OK;
  if (run->parsed()) {
    rc = crt_run_config_file(config_path.c_str(), out_dir.c_str(), seeds.c_str());
  } else if (preset->parsed()) {
    char* json = nullptr;
    rc = crt_preset_json(preset_name.c_str(), &json);
    if (rc == CRT_OK) {
      std::fputs(json, stdout);
      crt_free(json);
    }
  }

  if (rc != CRT_OK) std::fprintf(stderr, "error: %s\n", crt_last_error());
  return rc;
}
