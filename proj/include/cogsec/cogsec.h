/*
 * cogsec C API.
 *
 * Every call returns a cogsec_status. On failure a description is available
 * from cogsec_last_error() on the same thread until the next API call.
 * Strings returned through `char** out` parameters are JSON (or plain text
 * where noted), owned by the caller and released with cogsec_string_free().
 * Configuration arguments are JSON documents; NULL selects the defaults.
 */
#ifndef COGSEC_COGSEC_H
#define COGSEC_COGSEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COGSEC_API __declspec(dllexport)
#else
#define COGSEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cogsec_status {
  COGSEC_OK = 0,
  COGSEC_ERR_STRUCTURAL = 1,
  COGSEC_ERR_VALIDATION = 2,
  COGSEC_ERR_CONFIG = 3,
  COGSEC_ERR_CONFLICT = 4,
  COGSEC_ERR_NOT_FOUND = 5,
  COGSEC_ERR_PERSISTENCE = 6,
  COGSEC_ERR_TRAINING = 7,
  COGSEC_ERR_ARGUMENT = 8, /* NULL or malformed argument */
  COGSEC_ERR_INTERNAL = 9
} cogsec_status;

typedef struct cogsec_csm cogsec_csm;

COGSEC_API const char* cogsec_version(void);
/* Stable machine-readable name, e.g. "not_found". */
COGSEC_API const char* cogsec_status_name(cogsec_status status);
COGSEC_API const char* cogsec_last_error(void);
COGSEC_API void cogsec_string_free(char* s);

/* Configuration ------------------------------------------------------- */

COGSEC_API cogsec_status cogsec_default_config(char** out_json);
/* Parses and validates; returns the fully expanded configuration. */
COGSEC_API cogsec_status cogsec_config_normalize(const char* config_json, char** out_json);

/* Experiments ---------------------------------------------------------- */

/* Runs the simulated WLAN through a CSM and writes trace.jsonl, audit.jsonl
 * and snapshot.json into output_dir (each atomically). `seed` overrides the
 * simulation seed when non-NULL. Returns a run summary. */
COGSEC_API cogsec_status cogsec_simulate(const char* config_json, const uint64_t* seed, const char* output_dir,
                                         char** out_summary);

/* Detection experiment for every configured seed (or just `seed`) and every
 * training-set size in `sizes` (or the configured detection size when
 * sizes is NULL). Returns {"runs": [...], "by_training_set_size": [...]}. */
COGSEC_API cogsec_status cogsec_detect(const char* config_json, const uint64_t* seed, const size_t* sizes,
                                       size_t size_count, char** out_json);

/* Input-width sweep; `seed` overrides the initialization seed list. */
COGSEC_API cogsec_status cogsec_sweep_neurons(const char* config_json, const uint64_t* seed, char** out_json);

/* Learning-rate x iteration sweep; `seed` as above. */
COGSEC_API cogsec_status cogsec_sweep_train(const char* config_json, const uint64_t* seed, char** out_json);

/* Rebuilds the repository from an audit log and returns the canonical
 * snapshot text. */
COGSEC_API cogsec_status cogsec_replay(const char* config_json, const char* audit_path, char** out_snapshot);

/* Live CSM ------------------------------------------------------------- */

/* With a non-NULL state_dir the audit log in state_dir/audit.jsonl is
 * replayed on open and every new record is appended to it. */
COGSEC_API cogsec_status cogsec_csm_create(const char* config_json, const char* state_dir, cogsec_csm** out);
COGSEC_API void cogsec_csm_destroy(cogsec_csm* csm);

COGSEC_API cogsec_status cogsec_csm_handle_event(cogsec_csm* csm, const char* event_json, char** out_outcome);
COGSEC_API cogsec_status cogsec_csm_admin(cogsec_csm* csm, const char* action_json, char** out_record);
COGSEC_API cogsec_status cogsec_csm_theta(cogsec_csm* csm, double* out_theta);
COGSEC_API cogsec_status cogsec_csm_pending(cogsec_csm* csm, char** out_json);
COGSEC_API cogsec_status cogsec_csm_nodes(cogsec_csm* csm, char** out_json);
COGSEC_API cogsec_status cogsec_csm_node(cogsec_csm* csm, const char* node_id, char** out_json);
/* Records with seq > since_seq, oldest first. */
COGSEC_API cogsec_status cogsec_csm_audit(cogsec_csm* csm, uint64_t since_seq, char** out_json);
/* Canonical repository snapshot text. */
COGSEC_API cogsec_status cogsec_csm_snapshot(cogsec_csm* csm, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* COGSEC_COGSEC_H */
