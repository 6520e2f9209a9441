#ifndef TPSFILTER_H
#define TPSFILTER_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TPS_API __declspec(dllexport)
#else
#define TPS_API __attribute__((visibility("default")))
#endif

/* Status codes. VALIDATION and IO mirror CLI exit codes 1 and 2. */
typedef enum tps_status {
  TPS_OK = 0,
  TPS_VALIDATION = 1,
  TPS_IO = 2,
  TPS_USAGE = 64,
  TPS_INTERNAL = 70
} tps_status;

typedef struct tps_config tps_config;
typedef struct tps_seqset tps_seqset;
typedef struct tps_result tps_result;

/* Message of the last failing call on this thread, "" if none. */
TPS_API const char* tps_last_error(void);
/* Error kind name of the last failure, e.g. "IllegalResidue". */
TPS_API const char* tps_last_error_kind(void);
TPS_API const char* tps_version(void);

/* config */
TPS_API tps_status tps_config_load(const char* path, tps_config** out);
TPS_API tps_status tps_config_parse(const char* json_text, const char* base_dir, tps_config** out);
TPS_API void tps_config_free(tps_config* cfg);
TPS_API void tps_config_set_threads(tps_config* cfg, unsigned threads);
TPS_API void tps_config_set_strict(tps_config* cfg, int strict);
/* Relative paths resolve against the current directory. */
TPS_API void tps_config_set_output_dir(tps_config* cfg, const char* dir);
/* Hex SHA-256 of the canonical config; owned by cfg. */
TPS_API const char* tps_config_digest(tps_config* cfg);

/* sequences; lenient != 0 admits X */
TPS_API tps_status tps_seqset_parse(const char* text, size_t len, int lenient, tps_seqset** out);
TPS_API tps_status tps_seqset_read(const char* path, int lenient, tps_seqset** out);
TPS_API void tps_seqset_free(tps_seqset* set);
TPS_API size_t tps_seqset_size(const tps_seqset* set);
TPS_API const char* tps_seqset_id(const tps_seqset* set, size_t i);
TPS_API const char* tps_seqset_residues(const tps_seqset* set, size_t i);
TPS_API tps_status tps_seqset_length_filter(const tps_seqset* set, size_t min_len, size_t max_len,
                                            tps_seqset** out);
TPS_API tps_status tps_seqset_write(const tps_seqset* set, const char* path);

/* Global-alignment identity in [0, 1] with default scoring. */
TPS_API tps_status tps_identity(const char* a, const char* b, double* out);
TPS_API tps_status tps_perplexity(const double* logprobs, size_t n, double* out);

/* pipeline commands */
TPS_API tps_status tps_run_curate(const tps_config* cfg, tps_result** out);
TPS_API tps_status tps_run_split(const tps_config* cfg, tps_result** out);
TPS_API tps_status tps_run_maxid(const tps_config* cfg, tps_result** out);
TPS_API tps_status tps_run_ingest(const tps_config* cfg, tps_result** out);
TPS_API tps_status tps_run_filter(const tps_config* cfg, tps_result** out);
TPS_API tps_status tps_run_report(const tps_config* cfg, tps_result** out);

TPS_API void tps_result_free(tps_result* r);
TPS_API size_t tps_result_stage_count(const tps_result* r);
TPS_API const char* tps_result_stage_name(const tps_result* r, size_t i);
TPS_API size_t tps_result_stage_input(const tps_result* r, size_t i);
TPS_API size_t tps_result_stage_output(const tps_result* r, size_t i);
TPS_API size_t tps_result_final_count(const tps_result* r);
TPS_API const char* tps_result_final_id(const tps_result* r, size_t i);
TPS_API size_t tps_result_warning_count(const tps_result* r);
TPS_API const char* tps_result_warning(const tps_result* r, size_t i);
TPS_API size_t tps_result_metric_count(const tps_result* r);
TPS_API const char* tps_result_metric_name(const tps_result* r, size_t i);
TPS_API double tps_result_metric_value(const tps_result* r, size_t i);
TPS_API size_t tps_result_output_count(const tps_result* r);
TPS_API const char* tps_result_output(const tps_result* r, size_t i);

#ifdef __cplusplus
}
#endif

#endif
