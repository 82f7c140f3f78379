// Command-line driver for the gibbslab experiment runner. Talks to the
// library exclusively through its C interface.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gibbslab/gibbslab.h"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir,
                bool seed_given, std::uint64_t seed, int workers) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string config = buffer.str();

  const std::uint64_t seed_value = seed;
  char* manifest = nullptr;
  const int code = glab_run_experiment(
      config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
      seed_given ? &seed_value : nullptr, workers, &manifest);

  if (manifest != nullptr) {
    std::fputs(manifest, stdout);
    glab_string_free(manifest);
  }
  if (code == 2 || code == 3) {
    std::cerr << "error: " << glab_error_name(glab_last_error_code()) << ": "
              << glab_last_error_message() << "\n";
  }
  return code;
}

int list_command(bool as_json) {
  char* text = glab_list_experiments(as_json ? 1 : 0);
  if (text == nullptr) {
    std::cerr << "error: " << glab_last_error_message() << "\n";
    return 3;
  }
  std::fputs(text, stdout);
  glab_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("gibbslab ") + glab_version() +
               " - numerical experiments on conditioned ensembles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  bool as_json = false;

  CLI::App* run = app.add_subcommand(
      "run", "run one experiment from a JSON config file");
  run->add_option("config", config_path, "path to the JSON config")->required();
  run->add_option("--out", out_dir,
                  "output directory (default: config 'out', then $GIBBSLAB_OUT, "
                  "then ./gibbslab_out)");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the config's RNG seed");
  run->add_option("--workers", workers, "parallel workers (default 1)")
      ->check(CLI::PositiveNumber);

  CLI::App* list = app.add_subcommand(
      "list", "list the runnable experiments and their parameters");
  list->add_flag("--json", as_json, "machine-readable listing");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return run_command(config_path, out_dir, seed_opt->count() > 0, seed,
                       workers);
  return list_command(as_json);
}
