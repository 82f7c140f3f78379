#ifndef GIBBSLAB_RUNNER_HPP
#define GIBBSLAB_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace gibbslab {

// Exit codes shared by the library runner and the command-line driver.
inline constexpr int kRunPass = 0;
inline constexpr int kRunAssertionFailure = 1;
inline constexpr int kRunConfigError = 2;
inline constexpr int kRunRuntimeError = 3;

struct RunOutcome {
  int exit_code = kRunPass;
  std::string manifest_json;  // populated even when the run fails
  std::string manifest_path;  // empty when no manifest file could be written
};

// Runs one experiment described by a flat JSON config object carrying an
// "experiment" name plus per-experiment keys (unknown keys are rejected).
// Every key has a default, so {"experiment": "..."} alone is a valid config.
//
// Output files (CSV/JSON data plus run_manifest.json) go to the first of:
// out_dir_override, the config's "out" key, $GIBBSLAB_OUT, ./gibbslab_out.
// The directory is created if needed and the manifest is written even when
// the run fails. seed_override replaces the config's "seed". workers > 1
// parallelizes the independent units of work inside an experiment; results
// with one worker are bit-for-bit reproducible for a fixed seed.
RunOutcome run_experiment_config(
    const std::string& config_json, const std::string& out_dir_override = "",
    std::optional<std::uint64_t> seed_override = std::nullopt, int workers = 1);

// Catalogue of the experiments the runner understands: name, parameter
// schema with defaults, and the statement each experiment exercises.
std::string list_experiments_text();
std::string list_experiments_json();

}  // namespace gibbslab

#endif
