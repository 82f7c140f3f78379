/* C interface to the gibbslab library.
 *
 * Conventions:
 *   - Every fallible call records a thread-local status readable through
 *     glab_last_error_code() / glab_last_error_message(); successful calls
 *     reset it to 0 ("ok").
 *   - Functions returning int use 0 for success and a nonzero error code
 *     otherwise (glab_run_experiment is the exception: it returns the run's
 *     exit code, see below).
 *   - Functions returning char* hand ownership to the caller; release with
 *     glab_string_free(). NULL signals an error.
 *   - Handles (glab_density*) are opaque; release with their _free call.
 */
#ifndef GIBBSLAB_H
#define GIBBSLAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Library version, e.g. "0.1.0". Static storage; do not free. */
const char* glab_version(void);

/* Thread-local status of the most recent call. */
int glab_last_error_code(void);
/* Message for the most recent error on this thread. Valid until the next
 * library call on the same thread; do not free. */
const char* glab_last_error_message(void);
/* Static name for an error code ("ok", "invalid_argument", ...). */
const char* glab_error_name(int code);

/* Releases any char* the library returned with ownership. */
void glab_string_free(char* s);

/* --------------------------------------------------------------------- */
/* One-dimensional densities on a bounded support.                        */
/* --------------------------------------------------------------------- */

typedef struct glab_density glab_density;

/* Constructors return NULL on error (bad parameters). */
glab_density* glab_density_exponential(double rate);
glab_density* glab_density_gamma(double shape, double scale);
glab_density* glab_density_uniform(double lo, double hi);
void glab_density_free(glab_density* d);

/* Each returns 0 on success and stores the result through out. */
int glab_density_pdf(const glab_density* d, double x, double* out);
int glab_density_mean(const glab_density* d, double* out);
/* KL divergence of f from g over f's support. */
int glab_density_kl(const glab_density* f, const glab_density* g, double* out);

/* --------------------------------------------------------------------- */
/* Experiment runner.                                                     */
/* --------------------------------------------------------------------- */

/* Runs the experiment described by the flat JSON config. Output files plus
 * run_manifest.json go to out_dir (NULL: the config's "out" key, then
 * $GIBBSLAB_OUT, then ./gibbslab_out). seed, when non-NULL, overrides the
 * config's "seed". workers < 1 is treated as 1.
 *
 * Returns the run's exit code: 0 pass, 1 assertion failure, 2 config error,
 * 3 runtime error. When manifest_json_out is non-NULL it receives the run
 * manifest (written even for failed runs); free with glab_string_free. */
int glab_run_experiment(const char* config_json, const char* out_dir,
                        const uint64_t* seed, int workers,
                        char** manifest_json_out);

/* Catalogue of runnable experiments: human-readable table, or JSON when
 * as_json is nonzero. NULL on error; free with glab_string_free. */
char* glab_list_experiments(int as_json);

#ifdef __cplusplus
}
#endif

#endif /* GIBBSLAB_H */
