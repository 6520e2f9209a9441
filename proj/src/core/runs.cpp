#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>

#include <json.hpp>

#include "text_util.hpp"
#include "tpsfilter/error.hpp"
#include "tpsfilter/motif.hpp"
#include "tpsfilter/partition.hpp"
#include "tpsfilter/pipeline.hpp"

namespace tpsf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr const char* kStoreIndex = "index.json";

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create directory " + dir + ": " + ec.message());
}

void ensure_parent(const std::string& file) {
  fs::path p(file);
  if (p.has_parent_path()) ensure_dir(p.parent_path().string());
}

std::string require_path(const std::string& value, const std::string& key) {
  if (value.empty()) throw Error(ErrorKind::ConfigInvalid, key + " is not configured");
  return value;
}

void emit(RunResult& r, const std::string& path, std::string_view contents) {
  ensure_parent(path);
  write_text_file(path, contents);
  r.outputs.push_back(path);
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FunnelStage stage(std::string name, std::size_t in, std::size_t out) {
  return FunnelStage{std::move(name), in, out};
}

// Evidence keys, the store file each is copied to, and the config value.
struct EvidenceSlot {
  const char* key;
  const char* store_name;
  std::string EvidenceConfig::*path;
};

constexpr EvidenceSlot kEvidenceSlots[] = {
    {"candidates", "candidates.fasta", &EvidenceConfig::candidates},
    {"generation_records", "generation_records.jsonl", &EvidenceConfig::generation_records},
    {"maxid", "maxid.tsv", &EvidenceConfig::maxid},
    {"detector_scores", "detector_scores.csv", &EvidenceConfig::detector_scores},
    {"ec_predictions", "ec_predictions.csv", &EvidenceConfig::ec_predictions},
    {"domain_annotations", "domain_annotations.tsv", &EvidenceConfig::domain_annotations},
    {"structural_hits", "structural_hits.tsv", &EvidenceConfig::structural_hits},
};

std::string substitute(std::string tmpl, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string token = "{" + key + "}";
    for (std::size_t pos = tmpl.find(token); pos != std::string::npos; pos = tmpl.find(token, pos + value.size())) {
      tmpl.replace(pos, token.size(), value);
    }
  }
  return tmpl;
}

void run_hooks(const PipelineConfig& cfg, RunResult& r) {
  std::map<std::string, std::string> vars{
      {"candidates", cfg.resolve(cfg.evidence.candidates)},
      {"structures_dir", cfg.resolve(cfg.evidence.structures_dir)},
      {"base_dir", cfg.base_dir},
  };
  for (const auto& [key, tmpl] : cfg.hooks) {
    std::string target;
    if (key == "structures") {
      target = cfg.resolve(cfg.evidence.structures_dir);
    } else {
      auto slot = std::find_if(std::begin(kEvidenceSlots), std::end(kEvidenceSlots),
                               [&](const EvidenceSlot& s) { return key == s.key; });
      if (slot == std::end(kEvidenceSlots)) throw Error(ErrorKind::ConfigInvalid, "hook for unknown evidence '" + key + "'");
      target = cfg.resolve(cfg.evidence.*(slot->path));
    }
    if (target.empty()) throw Error(ErrorKind::ConfigInvalid, "hook '" + key + "' has no configured output path");
    auto local = vars;
    local["output"] = target;
    std::string cmd = substitute(tmpl, local);
    int status = std::system(cmd.c_str());
    if (status != 0) throw Error(ErrorKind::IoError, "hook '" + key + "' failed with status " + std::to_string(status));
    r.warnings.push_back("ran hook '" + key + "'");
  }
}

std::vector<std::string> structure_files(const std::string& dir) {
  std::vector<std::string> files;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".pdb") files.push_back(it->path().filename().string());
  }
  if (ec) throw Error(ErrorKind::IoError, "cannot list " + dir + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

FilterResult filter_store(const PipelineConfig& cfg, RunResult& r, LoadedEvidence* keep = nullptr) {
  LoadedEvidence loaded = load_evidence_store(cfg);
  ScorecardBuild built = build_scorecards(loaded.candidate_ids, loaded.bundle, cfg.strict);
  r.warnings.insert(r.warnings.end(), built.warnings.begin(), built.warnings.end());
  FilterResult result = apply_filters(std::move(built.cards), cfg.filters);

  emit(r, cfg.output_path("candidates.csv"), candidate_table_csv(result.passing));
  emit(r, cfg.output_path("scorecards.csv"), scorecards_csv(result.cards));
  emit(r, cfg.output_path("funnel.tsv"), funnel_tsv(result.funnel));
  r.stages = result.funnel.stages;
  r.final_ids = result.funnel.final_ids;
  r.metrics.emplace_back("candidates", static_cast<double>(result.cards.size()));
  r.metrics.emplace_back("passing", static_cast<double>(result.passing.size()));
  if (keep) *keep = std::move(loaded);
  return result;
}

}  // namespace

// ------------------------------------------------------------------ curate

RunResult run_curate(const PipelineConfig& cfg) {
  RunResult r;
  const auto& cc = cfg.curate;
  SequenceSet input = read_fasta_file(cfg.resolve(require_path(cc.input, "curate.input")), cfg.alphabet);
  r.metrics.emplace_back("input", static_cast<double>(input.size()));

  SequenceSet current = length_filter(input, cc.min_length, cc.max_length);
  r.stages.push_back(stage("length", input.size(), current.size()));

  SequenceSet motif_pass = motif_filter(current, cfg.motifs);
  r.stages.push_back(stage("motif", current.size(), motif_pass.size()));
  current = std::move(motif_pass);

  if (!cc.profile_hits.empty()) {
    auto hits = parse_profile_hits(read_text_file(cfg.resolve(cc.profile_hits)), cc.tps_accessions,
                                   cc.profile_orientation);
    auto exclude = stronger_non_tps_filter(hits, cc.tps_accessions);
    SequenceSet kept(current.source());
    for (const auto& s : current) {
      if (!exclude.count(s.id)) kept.add(s);
    }
    r.stages.push_back(stage("profile", current.size(), kept.size()));
    current = std::move(kept);
  }

  if (!cc.blocklist.empty()) {
    SequenceSet blocklist = read_fasta_file(cfg.resolve(cc.blocklist), cfg.alphabet);
    ScreenResult screen = identity_screen(current, blocklist, cc.blocklist_identity, cfg.align, cfg.strict, cfg.threads);
    r.warnings.insert(r.warnings.end(), screen.warnings.begin(), screen.warnings.end());
    r.stages.push_back(stage("blocklist", current.size(), screen.kept.size()));
    current = std::move(screen.kept);
  }

  for (const auto& s : current) r.final_ids.push_back(s.id);
  emit(r, cfg.output_path(cc.output), write_fasta(current, 60));
  FunnelReport funnel{r.stages, {}};
  emit(r, cfg.output_path("curate_funnel.tsv"), funnel_tsv(funnel));
  r.metrics.emplace_back("curated", static_cast<double>(current.size()));
  return r;
}

// ------------------------------------------------------------------- split

RunResult run_split(const PipelineConfig& cfg) {
  RunResult r;
  const auto& sc = cfg.split;
  const std::string input = sc.input.empty() ? cfg.output_path(cfg.curate.output) : cfg.resolve(sc.input);
  SequenceSet set = read_fasta_file(input, cfg.alphabet);

  GraphBuildStats gstats;
  IdentityGraph graph = build_identity_graph(set, sc.threshold, cfg.align, cfg.threads, &gstats);
  std::vector<Cluster> clusters = cluster(graph);
  PartitionPlan plan = assign_partitions(clusters, sc.partitions);
  SplitAssignment assignment = assignment_from_plan(set, clusters, plan);
  std::set<std::size_t> train =
      sc.train_partitions ? *sc.train_partitions : auto_train_partitions(assignment, sc.target_train_fraction);
  assignment = make_split(std::move(assignment), train, sc.target_train_fraction);
  r.warnings.insert(r.warnings.end(), assignment.warnings.begin(), assignment.warnings.end());

  LeakageReport leak = verify_split(assignment, set, sc.threshold, cfg.align, sc.verify_sampling_rate, sc.seed,
                                    cfg.threads);

  emit(r, cfg.output_path(sc.manifest), write_split_manifest(assignment, {sc.threshold, cfg.digest()}));
  SequenceSet train_set("train"), validation_set("validation");
  for (std::size_t i = 0; i < set.size(); ++i) {
    (assignment.rows[i].role == Role::Train ? train_set : validation_set).add(set[i]);
  }
  emit(r, cfg.output_path(sc.train_fasta), write_fasta(train_set, 60));
  emit(r, cfg.output_path(sc.validation_fasta), write_fasta(validation_set, 60));

  std::string leak_tsv = "a\tb\tidentity\n";
  for (const auto& v : leak.violations) leak_tsv += v.a + '\t' + v.b + '\t' + detail::shortest(v.identity) + '\n';
  leak_tsv += "# pairs_checked\t" + std::to_string(leak.pairs_checked) + '\n';
  leak_tsv += "# cross_pairs_total\t" + std::to_string(leak.cross_pairs_total) + '\n';
  leak_tsv += "# sampling_rate\t" + detail::shortest(leak.sampling_rate) + '\n';
  emit(r, cfg.output_path("leakage.tsv"), leak_tsv);

  if (!leak.clean()) {
    std::string msg = std::to_string(leak.violations.size()) + " cross-partition pair(s) at identity >= threshold";
    if (cfg.strict) throw Error(ErrorKind::InvalidPartitionSelection, msg);
    r.warnings.push_back("leakage: " + msg);
  }

  r.metrics = {
      {"sequences", static_cast<double>(set.size())},
      {"edges", static_cast<double>(graph.edges.size())},
      {"clusters", static_cast<double>(clusters.size())},
      {"train_count", static_cast<double>(assignment.train_count)},
      {"validation_count", static_cast<double>(assignment.validation_count)},
      {"train_ratio", assignment.train_ratio()},
      {"pairs_checked", static_cast<double>(leak.pairs_checked)},
      {"violations", static_cast<double>(leak.violations.size())},
  };
  return r;
}

// ------------------------------------------------------------------- maxid

RunResult run_maxid(const PipelineConfig& cfg) {
  RunResult r;
  SequenceSet queries = read_fasta_file(cfg.resolve(require_path(cfg.maxid.queries, "maxid.queries")), cfg.alphabet);
  const std::string db_path =
      cfg.maxid.database.empty() ? cfg.output_path(cfg.split.train_fasta) : cfg.resolve(cfg.maxid.database);
  SequenceSet db = read_fasta_file(db_path, cfg.alphabet);
  auto results = max_identity_batch(queries, db, cfg.align, cfg.threads);
  std::size_t skipped = 0, no_target = 0;
  for (const auto& res : results) {
    skipped += res.skipped;
    if (!res.has_target()) ++no_target;
  }
  if (no_target > 0) {
    r.warnings.push_back(std::to_string(no_target) + " queries had every database entry removed by the prefilter");
  }
  emit(r, cfg.output_path(cfg.maxid.output), maxid_tsv(results));
  r.metrics = {
      {"queries", static_cast<double>(queries.size())},
      {"database", static_cast<double>(db.size())},
      {"prefilter_skipped", static_cast<double>(skipped)},
  };
  return r;
}

// ------------------------------------------------------------------ ingest

RunResult run_ingest(const PipelineConfig& cfg) {
  RunResult r;
  const auto& ec = cfg.evidence;
  if (ec.candidates.empty() && ec.generation_records.empty()) {
    throw Error(ErrorKind::ConfigInvalid, "evidence needs candidates or generation_records");
  }
  run_hooks(cfg, r);

  const std::string store = cfg.output_path(ec.store);
  ensure_dir(store);
  json index;
  index["version"] = 1;
  index["config_digest"] = cfg.digest();
  json files = json::object();

  for (const auto& slot : kEvidenceSlots) {
    const std::string& configured = ec.*(slot.path);
    if (configured.empty()) continue;
    const std::string src = cfg.resolve(configured);
    std::string text = read_text_file(src);
    std::size_t records = 0;
    const std::string key = slot.key;
    if (key == "candidates") records = parse_fasta(text, cfg.alphabet, src).size();
    else if (key == "generation_records") records = parse_generation_records(text).size();
    else if (key == "maxid") records = parse_maxid_tsv(text).size();
    else if (key == "detector_scores") records = parse_detector_scores(text).size();
    else if (key == "ec_predictions") records = parse_ec_predictions(text).size();
    else if (key == "domain_annotations") records = parse_domain_annotations(text, ec.domain_columns).size();
    else if (key == "structural_hits") records = parse_structural_hits(text, ec.hit_columns).by_query.size();
    write_text_file((fs::path(store) / slot.store_name).string(), text);
    files[key] = {{"file", slot.store_name}, {"sha256", sha256_hex(text)}, {"records", records}};
    r.metrics.emplace_back(key, static_cast<double>(records));
  }

  if (!ec.structures_dir.empty()) {
    const std::string src_dir = cfg.resolve(ec.structures_dir);
    const std::string dst_dir = (fs::path(store) / "structures").string();
    ensure_dir(dst_dir);
    json entries = json::object();
    for (const auto& name : structure_files(src_dir)) {
      std::string text = read_text_file((fs::path(src_dir) / name).string());
      std::string id = fs::path(name).stem().string();
      parse_structure_plddt(text, id, PlddtOptions{ec.plddt_rescale});
      write_text_file((fs::path(dst_dir) / name).string(), text);
      entries[id] = {{"file", "structures/" + name}, {"sha256", sha256_hex(text)}};
    }
    r.metrics.emplace_back("structures", static_cast<double>(entries.size()));
    files["structures"] = entries;
  }
  index["files"] = files;
  emit(r, (fs::path(store) / kStoreIndex).string(), index.dump(2) + "\n");
  return r;
}

LoadedEvidence load_evidence_store(const PipelineConfig& cfg) {
  const std::string store = cfg.output_path(cfg.evidence.store);
  const std::string index_path = (fs::path(store) / kStoreIndex).string();
  json index;
  try {
    index = json::parse(read_text_file(index_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, index_path + ": " + e.what());
  }
  LoadedEvidence out;
  const json& files = index.at("files");
  auto text_of = [&](const std::string& key) -> std::optional<std::string> {
    auto it = files.find(key);
    if (it == files.end()) return std::nullopt;
    std::string name = it->at("file").get<std::string>();
    std::string text = read_text_file((fs::path(store) / name).string());
    out.inputs.emplace_back(name, sha256_hex(text));
    return text;
  };
  const auto& ec = cfg.evidence;
  auto& b = out.bundle;

  if (auto t = text_of("candidates")) {
    for (const auto& s : parse_fasta(*t, cfg.alphabet)) out.candidate_ids.push_back(s.id);
  }
  if (auto t = text_of("generation_records")) {
    std::map<std::string, double> ppl;
    for (const auto& rec : parse_generation_records(*t)) {
      ppl[rec.id] = rec.perplexity;
      if (!files.contains("candidates")) out.candidate_ids.push_back(rec.id);
    }
    b.perplexity = std::move(ppl);
  }
  if (auto t = text_of("maxid")) b.maxid = parse_maxid_tsv(*t);
  if (auto t = text_of("detector_scores")) b.detector = parse_detector_scores(*t);
  if (auto t = text_of("ec_predictions")) b.ec = parse_ec_predictions(*t);
  if (auto t = text_of("domain_annotations")) b.domains = parse_domain_annotations(*t, ec.domain_columns);
  if (auto t = text_of("structural_hits")) b.structural = parse_structural_hits(*t, ec.hit_columns);
  if (auto it = files.find("structures"); it != files.end()) {
    std::map<std::string, double> plddt;
    for (const auto& [id, entry] : it->items()) {
      std::string name = entry.at("file").get<std::string>();
      std::string text = read_text_file((fs::path(store) / name).string());
      out.inputs.emplace_back(name, sha256_hex(text));
      plddt[id] = parse_structure_plddt(text, id, PlddtOptions{ec.plddt_rescale}).mean_plddt;
    }
    b.plddt = std::move(plddt);
  }
  if (out.candidate_ids.empty()) throw Error(ErrorKind::SchemaError, "evidence store has no candidates");
  return out;
}

// ------------------------------------------------------------- filter/report

RunResult run_filter(const PipelineConfig& cfg) {
  RunResult r;
  filter_store(cfg, r);
  return r;
}

RunResult run_report(const PipelineConfig& cfg) {
  RunResult r;
  LoadedEvidence loaded;
  FilterResult result = filter_store(cfg, r, &loaded);

  // pLDDT distribution over the perplexity-retained pool (all cards when the
  // rank stage is off or no generation records were supplied).
  const bool ranked = cfg.filters.enabled(Stage::PerplexityRank) && loaded.bundle.perplexity.has_value();
  std::vector<double> plddt;
  for (const auto& c : result.cards) {
    if (c.mean_plddt && (!ranked || c.in_top_fraction)) plddt.push_back(*c.mean_plddt);
  }
  if (plddt.empty()) {
    r.warnings.push_back("no pLDDT values; CDF not written");
  } else {
    emit(r, cfg.output_path("plddt_cdf.tsv"), cdf_tsv(cdf(plddt)));
    emit(r, cfg.output_path("plddt_summary.tsv"), plddt_summary_tsv(plddt, cfg.filters.plddt_min));
    r.metrics.emplace_back("fraction_plddt_at_least_min", fraction_at_least(plddt, cfg.filters.plddt_min));
  }

  json manifest;
  manifest["tool"] = "tpsfilter";
  manifest["version"] = kToolVersion;
  manifest["config_digest"] = cfg.digest();
  json inputs = json::array();
  for (const auto& [name, digest] : loaded.inputs) inputs.push_back({{"file", name}, {"sha256", digest}});
  manifest["inputs"] = inputs;
  json outputs = json::array();
  for (const auto& o : r.outputs) outputs.push_back(fs::path(o).filename().string());
  manifest["outputs"] = outputs;
  manifest["tool_versions"] = cfg.tool_versions;
  manifest["timestamp"] = utc_timestamp();
  emit(r, cfg.output_path("manifest.json"), manifest.dump(2) + "\n");
  return r;
}

}  // namespace tpsf
