#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tpsfilter/align.hpp"
#include "tpsfilter/motif.hpp"
#include "tpsfilter/seqio.hpp"
#include "tpsfilter/toolio.hpp"

namespace tpsf {

// Filter stages in their canonical order: sequence, function, structure.
enum class Stage { PerplexityRank, MaxId, Detector, Ec, Domain, Plddt, Tm };

inline constexpr Stage kCanonicalStageOrder[] = {Stage::PerplexityRank, Stage::MaxId, Stage::Detector,
                                                 Stage::Ec, Stage::Domain, Stage::Plddt, Stage::Tm};

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view name);

struct FilterConfig {
  double perplexity_top_fraction = 0.10;
  double maxid_max_percent = 60.0;
  bool maxid_round_percent = true;  // compare round(percent) against the limit
  double detector_min = 0.7;
  double plddt_min = 70.0;
  double tm_min = 0.6;
  double tm_max = 0.9;
  std::vector<std::string> ec_allowlist{"4.2.3.75", "2.5.1.21", "5.4.99.33", "5.4.99.39", "5.4.99.8",
                                        "4.2.3.-"};
  std::vector<std::string> domain_allowlist{"IPR001906", "IPR005630", "IPR036965", "IPR008949",
                                            "IPR008930", "IPR032697", "IPR033904"};
  std::set<Stage> disabled;
  std::vector<Stage> order{std::begin(kCanonicalStageOrder), std::end(kCanonicalStageOrder)};

  bool enabled(Stage s) const { return !disabled.count(s); }
  // Throws ConfigInvalid.
  void validate() const;
};

struct CurateConfig {
  std::string input;
  std::string output = "curated.fasta";
  std::size_t min_length = 300;
  std::size_t max_length = 1100;
  std::string profile_hits;  // optional domain table
  ProfileOrientation profile_orientation = ProfileOrientation::ScanSequences;
  std::set<std::string> tps_accessions = default_tps_accessions();
  std::string blocklist;  // optional FASTA
  double blocklist_identity = 0.80;
};

struct SplitConfig {
  std::string input;  // defaults to the curate output
  std::string manifest = "split.tsv";
  std::string train_fasta = "train.fasta";
  std::string validation_fasta = "validation.fasta";
  double threshold = 0.30;
  std::size_t partitions = 6;
  std::optional<std::set<std::size_t>> train_partitions;  // nullopt = auto
  double target_train_fraction = 0.8;
  double verify_sampling_rate = 1.0;
  std::uint64_t seed = 0;
};

struct MaxIdConfig {
  std::string queries;
  std::string database;  // defaults to the split's train FASTA
  std::string output = "maxid.tsv";
};

struct EvidenceConfig {
  std::string store = "evidence";
  std::string candidates;  // FASTA; defaults to the generation records' ids
  std::string generation_records;
  std::string maxid;
  std::string detector_scores;
  std::string ec_predictions;
  std::string domain_annotations;
  DomainColumns domain_columns;
  std::string structures_dir;
  bool plddt_rescale = false;
  std::string structural_hits;
  HitTableOptions hit_columns;
};

struct PipelineConfig {
  std::string path;      // config file path, empty when built in memory
  std::string base_dir;  // relative paths resolve against this
  std::string output_dir = "out";
  AlphabetMode alphabet = AlphabetMode::Strict;
  unsigned threads = 1;
  bool strict = false;
  AlignParams align;
  std::vector<MotifRule> motifs = default_motif_rules();
  CurateConfig curate;
  SplitConfig split;
  MaxIdConfig maxid;
  EvidenceConfig evidence;
  FilterConfig filters;
  std::map<std::string, std::string> tool_versions;
  std::map<std::string, std::string> hooks;  // evidence key -> command template

  // Absolute-or-base-relative resolution; empty stays empty.
  std::string resolve(const std::string& p) const;
  std::string output_path(const std::string& name) const;

  // Canonical JSON of every setting after defaults; the digest hashes this.
  std::string canonical_json() const;
  std::string digest() const;
};

PipelineConfig parse_config(std::string_view json_text, std::string base_dir = ".");
PipelineConfig load_config(const std::string& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

}  // namespace tpsf
