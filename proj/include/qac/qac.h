/* Quantum-acoustics transport simulator: public C interface.
 *
 * Every function returns a qac_status; QAC_OK is zero. On failure,
 * qac_last_error() returns a thread-local message describing what went
 * wrong (valid until the next library call on the same thread). Strings
 * returned through char** out-parameters are heap copies owned by the
 * caller; release them with qac_string_free(). Handles are opaque and
 * must be released with their matching *_free() function. Handles are
 * not thread-safe; a handle may only be used by one thread at a time.
 */
#ifndef QAC_H
#define QAC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qac_status {
  QAC_OK = 0,
  QAC_ERR_INVALID_ARGUMENT = 1, /* bad parameter value or null pointer */
  QAC_ERR_CONFIG = 2,           /* configuration rejected by validation */
  QAC_ERR_IO = 3,               /* file or directory access failed */
  QAC_ERR_SCHEMA = 4,           /* persisted data malformed or wrong version */
  QAC_ERR_NUMERIC = 5,          /* numerical failure (blow-up, empty fit, ...) */
  QAC_ERR_INTERNAL = 6          /* invariant violation inside the library */
} qac_status;

/* Library version ("major.minor.patch") and on-disk schema version. */
const char* qac_version(void);
const char* qac_schema_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* qac_last_error(void);

/* Release a string returned through a char** out-parameter. */
void qac_string_free(char* s);

/* --------------------------------------------------------------------- */
/* Simulation configuration.                                             */

typedef struct qac_config qac_config;

/* A config populated with the documented defaults. */
qac_status qac_config_create(qac_config** out);
/* Parse from a JSON file / a JSON string (flat keys, units in the key). */
qac_status qac_config_load(const char* path, qac_config** out);
qac_status qac_config_from_json(const char* json_text, qac_config** out);
qac_status qac_config_to_json(const qac_config* cfg, char** json_out);
qac_status qac_config_save(const qac_config* cfg, const char* path);
/* 16-hex-digit digest of the canonical JSON form. */
qac_status qac_config_hash(const qac_config* cfg, char** hash_out);
void qac_config_free(qac_config* cfg);

/* --------------------------------------------------------------------- */
/* Single trajectory.                                                    */

typedef struct qac_trajectory qac_trajectory;

/* Propagate one wave packet through one thermally drawn landscape.
 * Deterministic for fixed (cfg, seed). A run that fails numerically
 * still returns QAC_OK with completed = 0 in the summary; hard errors
 * (invalid config) return a failure status. */
qac_status qac_trajectory_run(const qac_config* cfg, uint64_t seed, qac_trajectory** out);

/* Dense per-step series. `name` is "x_cm_nm" or "variance_nm2"; the
 * returned pointer stays valid while the handle lives. */
qac_status qac_trajectory_series(const qac_trajectory* traj, const char* name,
                                 const double** data, size_t* len);

/* Strided coherence samples (times, lengths, ratios share one length). */
qac_status qac_trajectory_coherence(const qac_trajectory* traj, const double** t_ps,
                                    const double** l_phi_nm, const double** ratio, size_t* len);

/* Diagnostics JSON: completion and health flags, regime label, accepted
 * peaks, onset time, mean-squared acceleration, coherence plateau ratio,
 * and the single-seed diffusivity fit. */
qac_status qac_trajectory_summary_json(const qac_trajectory* traj, char** json_out);

/* Persist the full record (config, series, health) as schema-versioned
 * JSON, atomically. */
qac_status qac_trajectory_write(const qac_trajectory* traj, const char* path);

void qac_trajectory_free(qac_trajectory* traj);

/* --------------------------------------------------------------------- */
/* Sweeps and post-processing.                                           */

/* Execute a sweep plan file into its output directory (or `output_dir`
 * when non-NULL). `workers` >= 1; results are bit-identical regardless
 * of worker count. Resumes over matching existing records. Numerical
 * per-run failures are recorded in the dataset, not raised; *failed_out
 * (optional) reports how many runs failed. */
qac_status qac_sweep_run(const char* plan_path, const char* output_dir, int workers,
                         int* failed_out);

/* Aggregate a dataset directory into the CSV map tables (regime, MSA,
 * coherence, diffusivity, staircase, diagonal) under its maps directory.
 * `detector_json` (optional) overrides the stored detector thresholds
 * for re-labelling. */
qac_status qac_maps_aggregate(const char* dataset_dir, const char* detector_json);

/* Write the rate-vs-temperature tables (one per (v, g) scan line) plus
 * the through-origin / free-intercept fit summary into maps/. */
qac_status qac_rates_export(const char* dataset_dir);

/* Run the synthetic-corpus detector calibration and write
 * calibration/detector.json under `output_dir`. `detector_json` NULL
 * means the default thresholds. *passed_out (optional) reports whether
 * every calibration check passed. */
qac_status qac_detector_calibrate(const char* detector_json, int noise_trials,
                                  uint64_t base_seed, const char* output_dir, int* passed_out);

/* Run the built-in invariant suite. *passed_out reports overall success;
 * the JSON report (optional) lists every check with its measured value. */
qac_status qac_validate(char** report_json_out, int* passed_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QAC_H */
