#include "tpsfilter/tpsfilter.h"

#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "tpsfilter/align.hpp"
#include "tpsfilter/config.hpp"
#include "tpsfilter/error.hpp"
#include "tpsfilter/pipeline.hpp"
#include "tpsfilter/seqio.hpp"
#include "tpsfilter/toolio.hpp"

struct tps_config {
  tpsf::PipelineConfig cfg;
  std::string digest;
};

struct tps_seqset {
  tpsf::SequenceSet set;
};

struct tps_result {
  tpsf::RunResult run;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_kind;

void clear_error() {
  g_last_error.clear();
  g_last_kind.clear();
}

template <typename F>
tps_status guarded(F&& f) {
  clear_error();
  try {
    f();
    return TPS_OK;
  } catch (const tpsf::Error& e) {
    g_last_error = e.what();
    g_last_kind = std::string(tpsf::to_string(e.kind()));
    return e.category() == tpsf::ErrorCategory::Io ? TPS_IO : TPS_VALIDATION;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    g_last_kind = "SchemaError";
    return TPS_VALIDATION;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    g_last_kind = "Internal";
    return TPS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    g_last_kind = "Internal";
    return TPS_INTERNAL;
  }
}

tps_status usage(const char* what) {
  g_last_error = what;
  g_last_kind = "Usage";
  return TPS_USAGE;
}

tpsf::AlphabetMode mode_of(int lenient) {
  return lenient ? tpsf::AlphabetMode::Lenient : tpsf::AlphabetMode::Strict;
}

template <typename Run>
tps_status run_command(const tps_config* cfg, tps_result** out, Run run) {
  if (!cfg || !out) return usage("null argument");
  *out = nullptr;
  return guarded([&] { *out = new tps_result{run(cfg->cfg)}; });
}

}  // namespace

extern "C" {

const char* tps_last_error(void) { return g_last_error.c_str(); }
const char* tps_last_error_kind(void) { return g_last_kind.c_str(); }
const char* tps_version(void) { return "1.0.0"; }

tps_status tps_config_load(const char* path, tps_config** out) {
  if (!path || !out) return usage("null argument");
  *out = nullptr;
  return guarded([&] { *out = new tps_config{tpsf::load_config(path), {}}; });
}

tps_status tps_config_parse(const char* json_text, const char* base_dir, tps_config** out) {
  if (!json_text || !out) return usage("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tps_config{tpsf::parse_config(json_text, base_dir ? base_dir : "."), {}};
  });
}

void tps_config_free(tps_config* cfg) { delete cfg; }

void tps_config_set_threads(tps_config* cfg, unsigned threads) {
  if (cfg) cfg->cfg.threads = threads;
}

void tps_config_set_strict(tps_config* cfg, int strict) {
  if (cfg) cfg->cfg.strict = strict != 0;
}

void tps_config_set_output_dir(tps_config* cfg, const char* dir) {
  if (cfg && dir) cfg->cfg.output_dir = std::filesystem::absolute(dir).string();
}

const char* tps_config_digest(tps_config* cfg) {
  if (!cfg) return "";
  cfg->digest = cfg->cfg.digest();
  return cfg->digest.c_str();
}

tps_status tps_seqset_parse(const char* text, size_t len, int lenient, tps_seqset** out) {
  if ((!text && len) || !out) return usage("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tps_seqset{tpsf::parse_fasta(std::string_view(text ? text : "", len), mode_of(lenient))};
  });
}

tps_status tps_seqset_read(const char* path, int lenient, tps_seqset** out) {
  if (!path || !out) return usage("null argument");
  *out = nullptr;
  return guarded([&] { *out = new tps_seqset{tpsf::read_fasta_file(path, mode_of(lenient))}; });
}

void tps_seqset_free(tps_seqset* set) { delete set; }

size_t tps_seqset_size(const tps_seqset* set) { return set ? set->set.size() : 0; }

const char* tps_seqset_id(const tps_seqset* set, size_t i) {
  return set && i < set->set.size() ? set->set[i].id.c_str() : nullptr;
}

const char* tps_seqset_residues(const tps_seqset* set, size_t i) {
  return set && i < set->set.size() ? set->set[i].residues.c_str() : nullptr;
}

tps_status tps_seqset_length_filter(const tps_seqset* set, size_t min_len, size_t max_len,
                                    tps_seqset** out) {
  if (!set || !out) return usage("null argument");
  *out = nullptr;
  return guarded([&] { *out = new tps_seqset{tpsf::length_filter(set->set, min_len, max_len)}; });
}

tps_status tps_seqset_write(const tps_seqset* set, const char* path) {
  if (!set || !path) return usage("null argument");
  return guarded([&] { tpsf::write_fasta_file(set->set, path); });
}

tps_status tps_identity(const char* a, const char* b, double* out) {
  if (!a || !b || !out) return usage("null argument");
  return guarded([&] { *out = tpsf::identity(std::string_view(a), std::string_view(b), tpsf::AlignParams{}); });
}

tps_status tps_perplexity(const double* logprobs, size_t n, double* out) {
  if ((!logprobs && n) || !out) return usage("null argument");
  return guarded([&] { *out = tpsf::perplexity(std::span<const double>(logprobs, n)); });
}

tps_status tps_run_curate(const tps_config* cfg, tps_result** out) { return run_command(cfg, out, tpsf::run_curate); }
tps_status tps_run_split(const tps_config* cfg, tps_result** out) { return run_command(cfg, out, tpsf::run_split); }
tps_status tps_run_maxid(const tps_config* cfg, tps_result** out) { return run_command(cfg, out, tpsf::run_maxid); }
tps_status tps_run_ingest(const tps_config* cfg, tps_result** out) { return run_command(cfg, out, tpsf::run_ingest); }
tps_status tps_run_filter(const tps_config* cfg, tps_result** out) { return run_command(cfg, out, tpsf::run_filter); }
tps_status tps_run_report(const tps_config* cfg, tps_result** out) { return run_command(cfg, out, tpsf::run_report); }

void tps_result_free(tps_result* r) { delete r; }

size_t tps_result_stage_count(const tps_result* r) { return r ? r->run.stages.size() : 0; }
const char* tps_result_stage_name(const tps_result* r, size_t i) {
  return r && i < r->run.stages.size() ? r->run.stages[i].name.c_str() : nullptr;
}
size_t tps_result_stage_input(const tps_result* r, size_t i) {
  return r && i < r->run.stages.size() ? r->run.stages[i].input : 0;
}
size_t tps_result_stage_output(const tps_result* r, size_t i) {
  return r && i < r->run.stages.size() ? r->run.stages[i].output : 0;
}

size_t tps_result_final_count(const tps_result* r) { return r ? r->run.final_ids.size() : 0; }
const char* tps_result_final_id(const tps_result* r, size_t i) {
  return r && i < r->run.final_ids.size() ? r->run.final_ids[i].c_str() : nullptr;
}

size_t tps_result_warning_count(const tps_result* r) { return r ? r->run.warnings.size() : 0; }
const char* tps_result_warning(const tps_result* r, size_t i) {
  return r && i < r->run.warnings.size() ? r->run.warnings[i].c_str() : nullptr;
}

size_t tps_result_metric_count(const tps_result* r) { return r ? r->run.metrics.size() : 0; }
const char* tps_result_metric_name(const tps_result* r, size_t i) {
  return r && i < r->run.metrics.size() ? r->run.metrics[i].first.c_str() : nullptr;
}
double tps_result_metric_value(const tps_result* r, size_t i) {
  return r && i < r->run.metrics.size() ? r->run.metrics[i].second : 0.0;
}

size_t tps_result_output_count(const tps_result* r) { return r ? r->run.outputs.size() : 0; }
const char* tps_result_output(const tps_result* r, size_t i) {
  return r && i < r->run.outputs.size() ? r->run.outputs[i].c_str() : nullptr;
}

}  // extern "C"
