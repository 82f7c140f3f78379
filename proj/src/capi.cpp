#include "gibbslab/gibbslab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "gibbslab/density.hpp"
#include "gibbslab/error.hpp"
#include "gibbslab/runner.hpp"

struct glab_density {
  gibbslab::Density1D impl;
};

namespace {

thread_local int t_code = 0;
thread_local std::string t_message;

void set_ok() {
  t_code = 0;
  t_message.clear();
}

void set_error(int code, const char* message) {
  t_code = code;
  t_message = message != nullptr ? message : "";
}

// Runs fn inside the library's error protocol; returns the error code.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    set_ok();
    return 0;
  } catch (const gibbslab::Error& e) {
    set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    set_error(static_cast<int>(gibbslab::ErrorCode::internal),
              "out of memory");
  } catch (const std::exception& e) {
    set_error(static_cast<int>(gibbslab::ErrorCode::internal), e.what());
  }
  return t_code;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* glab_version(void) { return "0.1.0"; }

int glab_last_error_code(void) { return t_code; }

const char* glab_last_error_message(void) { return t_message.c_str(); }

const char* glab_error_name(int code) {
  return gibbslab::error_code_name(static_cast<gibbslab::ErrorCode>(code));
}

void glab_string_free(char* s) { std::free(s); }

glab_density* glab_density_exponential(double rate) {
  glab_density* handle = nullptr;
  guarded([&] {
    handle = new glab_density{gibbslab::Density1D::exponential(rate)};
  });
  return handle;
}

glab_density* glab_density_gamma(double shape, double scale) {
  glab_density* handle = nullptr;
  guarded([&] {
    handle = new glab_density{gibbslab::Density1D::gamma(shape, scale)};
  });
  return handle;
}

glab_density* glab_density_uniform(double lo, double hi) {
  glab_density* handle = nullptr;
  guarded([&] {
    handle = new glab_density{gibbslab::Density1D::uniform(lo, hi)};
  });
  return handle;
}

void glab_density_free(glab_density* d) { delete d; }

int glab_density_pdf(const glab_density* d, double x, double* out) {
  return guarded([&] {
    gibbslab::require(d != nullptr && out != nullptr,
                      gibbslab::ErrorCode::invalid_argument,
                      "null density or output pointer");
    *out = d->impl.pdf(x);
  });
}

int glab_density_mean(const glab_density* d, double* out) {
  return guarded([&] {
    gibbslab::require(d != nullptr && out != nullptr,
                      gibbslab::ErrorCode::invalid_argument,
                      "null density or output pointer");
    *out = d->impl.moment(1);
  });
}

int glab_density_kl(const glab_density* f, const glab_density* g, double* out) {
  return guarded([&] {
    gibbslab::require(f != nullptr && g != nullptr && out != nullptr,
                      gibbslab::ErrorCode::invalid_argument,
                      "null density or output pointer");
    *out = gibbslab::Density1D::kl_divergence(f->impl, g->impl);
  });
}

int glab_run_experiment(const char* config_json, const char* out_dir,
                        const uint64_t* seed, int workers,
                        char** manifest_json_out) {
  if (manifest_json_out != nullptr) *manifest_json_out = nullptr;
  if (config_json == nullptr) {
    set_error(static_cast<int>(gibbslab::ErrorCode::config_error),
              "null config");
    return gibbslab::kRunConfigError;
  }

  gibbslab::RunOutcome outcome;
  const int guard = guarded([&] {
    std::optional<std::uint64_t> seed_opt;
    if (seed != nullptr) seed_opt = *seed;
    outcome = gibbslab::run_experiment_config(
        config_json, out_dir != nullptr ? out_dir : "", seed_opt,
        workers < 1 ? 1 : workers);
  });
  if (guard != 0) return gibbslab::kRunRuntimeError;

  if (manifest_json_out != nullptr) {
    *manifest_json_out = copy_string(outcome.manifest_json);
    if (*manifest_json_out == nullptr) {
      set_error(static_cast<int>(gibbslab::ErrorCode::internal),
                "out of memory");
      return gibbslab::kRunRuntimeError;
    }
  }
  // A failed assertion is a run result, not an API error; only config and
  // runtime breakdowns surface through the error channel (details are in
  // the manifest).
  if (outcome.exit_code == gibbslab::kRunConfigError) {
    set_error(static_cast<int>(gibbslab::ErrorCode::config_error),
              "the run config was rejected; see the manifest's error field");
  } else if (outcome.exit_code == gibbslab::kRunRuntimeError) {
    set_error(static_cast<int>(gibbslab::ErrorCode::internal),
              "the run did not complete; see the manifest's error field");
  }
  return outcome.exit_code;
}

char* glab_list_experiments(int as_json) {
  char* out = nullptr;
  guarded([&] {
    const std::string text = as_json != 0 ? gibbslab::list_experiments_json()
                                          : gibbslab::list_experiments_text();
    out = copy_string(text);
    gibbslab::require(out != nullptr, gibbslab::ErrorCode::internal,
                      "out of memory");
  });
  return out;
}

}  // extern "C"
