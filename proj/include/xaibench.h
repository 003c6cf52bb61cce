/* C interface to the attribution-evaluation pipeline. All functionality is
 * reachable through an opaque pipeline handle plus status codes; strings
 * returned through char** outputs are freed with xb_string_free. */
#ifndef XAIBENCH_H
#define XAIBENCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xb_status {
    XB_OK = 0,
    XB_ERR_INVALID_ARGUMENT = 1,
    XB_ERR_CONFIG = 2,
    XB_ERR_IO = 3,
    XB_ERR_FORMAT = 4,
    XB_ERR_STAGE_ORDER = 5,
    XB_ERR_SHAPE = 6,
    XB_ERR_UNSUPPORTED = 7,
    XB_ERR_TRAINING = 8,
    XB_ERR_SAMPLE_SHORTFALL = 9,
    XB_ERR_NUMERIC = 10,
    XB_ERR_INTERNAL = 11
} xb_status;

typedef struct xb_pipeline xb_pipeline;

/* Semantic version of the library. */
const char* xb_version(void);

/* Fresh pipeline with default configuration writing below "out". Returns
 * NULL only on allocation failure. */
xb_pipeline* xb_pipeline_new(void);
void xb_pipeline_destroy(xb_pipeline* p);

/* Message of the most recent failed call on this handle; never NULL. */
const char* xb_last_error(const xb_pipeline* p);

/* Replaces the configuration from JSON text or a JSON file. Unknown keys
 * and type mismatches are rejected. */
xb_status xb_load_config(xb_pipeline* p, const char* json_text);
xb_status xb_load_config_file(xb_pipeline* p, const char* path);

/* Targeted overrides, applied on top of the loaded configuration. Lists are
 * comma separated ids, e.g. "gradient,lrp_z". */
xb_status xb_set_out_dir(xb_pipeline* p, const char* path);
xb_status xb_set_seed(xb_pipeline* p, uint64_t seed);
xb_status xb_set_workers(xb_pipeline* p, size_t workers);
xb_status xb_set_arch(xb_pipeline* p, const char* arch); /* "mlp" or "cnn" */
xb_status xb_set_methods(xb_pipeline* p, const char* comma_list);
xb_status xb_set_metrics(xb_pipeline* p, const char* comma_list);

/* Pipeline stages; each one persists its artifacts under the output
 * directory and requires its upstream artifacts there. */
xb_status xb_run_generate(xb_pipeline* p);
xb_status xb_run_train(xb_pipeline* p);
xb_status xb_run_explain(xb_pipeline* p);
xb_status xb_run_evaluate(xb_pipeline* p);
xb_status xb_run_rank(xb_pipeline* p);
xb_status xb_run_report(xb_pipeline* p);
xb_status xb_run_all(xb_pipeline* p);

/* Effective configuration as canonical JSON, and its fingerprint. */
xb_status xb_config_json(const xb_pipeline* p, char** out);
xb_status xb_config_hash(const xb_pipeline* p, char** out);
void xb_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* XAIBENCH_H */
