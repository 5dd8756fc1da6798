/* paragate — pulse-level simulation of parametrically driven transmon rings
 * SPDX-License-Identifier: MIT
 *
 * C interface of the paragate shared library.  A context owns one scenario
 * configuration plus run options; running a command writes the scenario's
 * output files and keeps the scalar summary available as JSON and text.
 * Contexts are independent: use one per thread for concurrent scenarios.
 *
 * Every function that can fail returns an error code; pg_last_error holds a
 * human-readable message for the most recent failure on the context.
 * Returned strings are owned by the context and remain valid until the next
 * call on that context (or pg_destroy).
 */
#ifndef PARAGATE_H
#define PARAGATE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pg_context pg_context;

enum {
  PG_OK = 0,          /* success */
  PG_ERR_INVALID = 1, /* API misuse: null handle or argument */
  PG_ERR_CONFIG = 2,  /* configuration or input validation failure */
  PG_ERR_NUMERIC = 3  /* numerical failure (solver, convergence, overflow) */
};

/* Create / destroy a context.  pg_create returns NULL only on allocation
 * failure.  pg_destroy(NULL) is a no-op. */
pg_context* pg_create(void);
void pg_destroy(pg_context* ctx);

/* Load a scenario configuration from a JSON file or a JSON string.  The
 * schema is validated eagerly; on failure the context keeps its previous
 * configuration. */
int pg_load_config_file(pg_context* ctx, const char* path);
int pg_load_config_json(pg_context* ctx, const char* json_text);

/* Run options (defaults: seed 1, threads 1, output directory "."). */
int pg_set_seed(pg_context* ctx, unsigned long long seed);
int pg_set_threads(pg_context* ctx, int threads);
int pg_set_output_dir(pg_context* ctx, const char* dir);

/* Execute the loaded scenario.  `command` may be NULL to run the config's
 * own command; when non-NULL it must match the config (a config is written
 * for exactly one command).  Outputs are a pure function of (config, seed).
 */
int pg_run_command(pg_context* ctx, const char* command);

/* Message for the most recent failure on this context ("" if none). */
const char* pg_last_error(const pg_context* ctx);

/* Scalar summary of the most recent successful run: a JSON object and an
 * aligned "key: value" text record ("" before the first run).  The JSON
 * carries a "files" array listing every output file written. */
const char* pg_result_json(const pg_context* ctx);
const char* pg_result_text(const pg_context* ctx);

/* Library version, "major.minor.patch". */
const char* pg_version(void);

#ifdef __cplusplus
}
#endif

#endif /* PARAGATE_H */
