/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "tpsfilter/tpsfilter.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void scalars(void) {
  double v = 0.0;
  double lp[4];
  int i;
  for (i = 0; i < 4; ++i) lp[i] = log(1.0 / 20.0);
  EXPECT(tps_perplexity(lp, 4, &v) == TPS_OK);
  EXPECT(fabs(v - 20.0) / 20.0 <= 1e-9);
  EXPECT(tps_perplexity(lp, 0, &v) == TPS_VALIDATION);
  EXPECT(strcmp(tps_last_error_kind(), "EmptyInput") == 0);
  EXPECT(tps_perplexity(NULL, 1, &v) == TPS_USAGE);

  EXPECT(tps_identity("MKTAYIAK", "MKTAYIAK", &v) == TPS_OK);
  EXPECT(v == 1.0);
  EXPECT(tps_identity("MKTAW", "MKTAY", &v) == TPS_OK);
  EXPECT(fabs(v - 0.8) < 1e-12);
  EXPECT(tps_identity("", "MK", &v) == TPS_VALIDATION);
  EXPECT(strlen(tps_version()) > 0);
}

static void seqsets(void) {
  const char* text = ">a first\nMKTAYIAKQR\n>b\nMK\n>c\nMKTAYIAKQRQISFVKSHFSRQ\n";
  tps_seqset* set = NULL;
  tps_seqset* kept = NULL;
  EXPECT(tps_seqset_parse(text, strlen(text), 0, &set) == TPS_OK);
  EXPECT(tps_seqset_size(set) == 3);
  EXPECT(strcmp(tps_seqset_id(set, 0), "a") == 0);
  EXPECT(strcmp(tps_seqset_residues(set, 1), "MK") == 0);
  EXPECT(tps_seqset_id(set, 99) == NULL);
  EXPECT(tps_seqset_length_filter(set, 3, 20, &kept) == TPS_OK);
  EXPECT(tps_seqset_size(kept) == 1);
  EXPECT(strcmp(tps_seqset_id(kept, 0), "a") == 0);
  EXPECT(tps_seqset_length_filter(set, 20, 3, &kept) == TPS_VALIDATION);
  tps_seqset_free(kept);
  tps_seqset_free(set);

  set = NULL;
  EXPECT(tps_seqset_parse(">q7\nMKTB\n", 9, 0, &set) == TPS_VALIDATION);
  EXPECT(set == NULL);
  EXPECT(strcmp(tps_last_error_kind(), "IllegalResidue") == 0);
  EXPECT(tps_seqset_read("/nonexistent/x.fasta", 0, &set) == TPS_IO);
}

static void configs(void) {
  tps_config* cfg = NULL;
  tps_config* other = NULL;
  EXPECT(tps_config_parse("{\"bogus\": 1}", ".", &cfg) == TPS_VALIDATION);
  EXPECT(strcmp(tps_last_error_kind(), "ConfigInvalid") == 0);
  EXPECT(tps_config_parse("{}", ".", &cfg) == TPS_OK);
  EXPECT(tps_config_parse("{\"filters\": {\"detector_min\": 0.7}}", ".", &other) == TPS_OK);
  EXPECT(strlen(tps_config_digest(cfg)) == 64);
  EXPECT(strcmp(tps_config_digest(cfg), tps_config_digest(other)) == 0);
  tps_config_free(other);
  tps_config_free(cfg);
  EXPECT(tps_config_load("/nonexistent/config.json", &cfg) == TPS_IO);
}

static void reference_run(const char* fixture, const char* out_dir) {
  char path[4096];
  tps_config* cfg = NULL;
  tps_result* res = NULL;
  size_t i;
  snprintf(path, sizeof path, "%s/reference/config.json", fixture);
  EXPECT(tps_config_load(path, &cfg) == TPS_OK);
  if (!cfg) return;
  tps_config_set_output_dir(cfg, out_dir);
  EXPECT(tps_run_ingest(cfg, &res) == TPS_OK);
  tps_result_free(res);
  res = NULL;
  EXPECT(tps_run_filter(cfg, &res) == TPS_OK);
  EXPECT(tps_result_final_count(res) == 7);
  for (i = 0; i < tps_result_final_count(res); ++i) {
    char want[16];
    snprintf(want, sizeof want, "TpsGPT%zu", i + 1);
    EXPECT(strcmp(tps_result_final_id(res, i), want) == 0);
  }
  EXPECT(tps_result_stage_count(res) == 6);
  EXPECT(strcmp(tps_result_stage_name(res, 0), "maxid") == 0);
  EXPECT(tps_result_stage_input(res, 0) == 77);
  EXPECT(tps_result_stage_output(res, 0) == 7);
  EXPECT(tps_result_output_count(res) == 3);
  EXPECT(tps_result_metric_count(res) >= 1);
  tps_result_free(res);
  EXPECT(tps_run_filter(NULL, &res) == TPS_USAGE);
  tps_config_free(cfg);
}

int main(int argc, char** argv) {
  if (argc != 3) {
    fprintf(stderr, "usage: %s FIXTURE_DIR OUT_DIR\n", argv[0]);
    return 64;
  }
  scalars();
  seqsets();
  configs();
  reference_run(argv[1], argv[2]);
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
