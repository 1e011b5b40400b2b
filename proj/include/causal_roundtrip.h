#ifndef CAUSAL_ROUNDTRIP_H
#define CAUSAL_ROUNDTRIP_H

/* C boundary of the causal round-trip library. All functions return CRT_OK
 * or an error code; the message for the most recent failure on the calling
 * thread is available via crt_last_error(). Returned strings and handles are
 * owned by the caller and released with the matching free function. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  CRT_OK = 0,
  CRT_ERROR_INVALID_ARGUMENT = 1, /* bad input: config, schema, arguments */
  CRT_ERROR_RUNTIME = 2           /* valid input, failed execution */
};

const char* crt_version(void);

/* Empty string when the last call on this thread succeeded. */
const char* crt_last_error(void);

void crt_free(char* p);

/* ---------------------------------------------------------------- datasets */

typedef struct crt_dataset crt_dataset;

/* schema: comma-separated "column:kind" with kind continuous|categorical,
 * covering the CSV header exactly (order-insensitive). */
int crt_dataset_read_csv(const char* path, const char* schema, crt_dataset** out);
int crt_dataset_write_csv(const crt_dataset* d, const char* path);
int crt_dataset_num_rows(const crt_dataset* d, int64_t* out);
int crt_dataset_num_cols(const crt_dataset* d, int64_t* out);
/* Copies one column (label codes for categorical columns) into buf. */
int crt_dataset_column(const crt_dataset* d, const char* name, double* buf, int64_t cap);
void crt_dataset_free(crt_dataset* d);

/* -------------------------------------------------------------------- scm */

typedef struct crt_scm crt_scm;

/* model_json:
 *   {
 *     "nodes": [
 *       {"name": "W", "parents": [], "mechanism": "empirical"},
 *       {"name": "Y", "parents": ["W"], "mechanism": "diffusion"}
 *     ],
 *     "diffusion": { ... optional hyperparameters ... },
 *     "anm": { ... optional hyperparameters ... }
 *   }
 * mechanism defaults to empirical for roots and diffusion otherwise. */
int crt_scm_fit(const crt_dataset* data, const char* model_json, uint64_t seed, crt_scm** out);
int crt_scm_sample(const crt_scm* s, int64_t n, uint64_t seed, crt_dataset** out);
/* intervention_json: {"T": 1.0, ...}; each value is broadcast to every row. */
int crt_counterfactual(const crt_scm* s, const crt_dataset* factual, const char* intervention_json,
                       crt_dataset** out);
int crt_estimate_ate(const crt_scm* s, const crt_dataset* data, const char* treatment,
                     const char* outcome, double* ate);
void crt_scm_free(crt_scm* s);

/* ------------------------------------------------------------ experiments */

/* Runs a config (JSON text); out_dir overrides the config's when non-empty. */
int crt_run_config_json(const char* config_json, const char* out_dir);

/* Reads and runs a config file. out_dir and seeds_csv ("1,2,3") are optional
 * overrides; pass NULL or "" to keep the config's values. */
int crt_run_config_file(const char* path, const char* out_dir, const char* seeds_csv);

/* Canonical JSON of a named preset; *out_json freed with crt_free. */
int crt_preset_json(const char* name, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* CAUSAL_ROUNDTRIP_H */
