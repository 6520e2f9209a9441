#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tpsfilter/align.hpp"
#include "tpsfilter/config.hpp"
#include "tpsfilter/toolio.hpp"

namespace tpsf {

// ----------------------------------------------------------------- ranking

// The ceil(top_fraction * n) records with the smallest perplexity, ties by id,
// sorted by (perplexity, id).
std::vector<ScoredSequence> rank_by_perplexity(const std::vector<ScoredSequence>& records,
                                               double top_fraction);
std::size_t top_fraction_count(std::size_t n, double top_fraction);

// ------------------------------------------------------------------ evidence

// Per-id evidence from every tool. An unset optional means that evidence
// source was not supplied at all.
struct EvidenceBundle {
  std::optional<std::map<std::string, double>> perplexity;
  std::optional<std::map<std::string, IdentityResult>> maxid;
  std::optional<std::map<std::string, double>> detector;
  std::optional<std::map<std::string, std::vector<EcPrediction>>> ec;
  std::optional<std::map<std::string, std::vector<DomainAnnotation>>> domains;
  std::optional<std::map<std::string, double>> plddt;
  std::optional<HitTable> structural;
};

enum class Outcome { Pass, Fail, MissingEvidence, Disabled };
std::string_view to_string(Outcome o);

struct Verdict {
  Stage stage = Stage::PerplexityRank;
  Outcome outcome = Outcome::Disabled;
  std::string reason;
};

struct Scorecard {
  std::string id;
  std::optional<double> perplexity;
  std::optional<std::size_t> perplexity_rank;  // 1-based, set by apply_filters
  bool in_top_fraction = false;
  std::optional<IdentityResult> maxid;
  std::optional<double> detector_score;
  std::optional<double> mean_plddt;
  std::optional<StructuralHit> best_tm;
  std::optional<std::vector<EcPrediction>> ec_predictions;
  std::optional<std::vector<DomainAnnotation>> domains;
  std::vector<Verdict> verdicts;  // canonical stage order

  const Verdict* verdict(Stage s) const;
  bool passed() const;
};

struct ScorecardBuild {
  std::vector<Scorecard> cards;  // ordered by id
  std::vector<std::string> warnings;
};

// Left join of evidence onto ids. Evidence naming an id outside `ids` raises
// UnknownEvidenceId when strict, else a warning.
ScorecardBuild build_scorecards(const std::vector<std::string>& ids, const EvidenceBundle& evidence,
                                bool strict = false);

// ------------------------------------------------------------------ filtering

struct FunnelStage {
  std::string name;
  std::size_t input = 0;
  std::size_t output = 0;
};

struct FunnelReport {
  std::vector<FunnelStage> stages;
  std::vector<std::string> final_ids;
};

struct FilterResult {
  std::vector<Scorecard> cards;  // every card, verdicts filled
  std::vector<Scorecard> passing;
  FunnelReport funnel;
};

// Verdicts for one card given perplexity-rank membership already set.
std::vector<Verdict> evaluate(const Scorecard& card, const FilterConfig& config);

FilterResult apply_filters(std::vector<Scorecard> cards, const FilterConfig& config);

// ---------------------------------------------------------------- reporting

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
};

// Sorted unique values with fraction = count(<= value) / n. Throws EmptyInput.
std::vector<CdfPoint> cdf(std::vector<double> values);
double fraction_at_least(const std::vector<double>& values, double threshold);

std::string candidate_table_csv(const std::vector<Scorecard>& cards);
std::string scorecards_csv(const std::vector<Scorecard>& cards);
std::string funnel_tsv(const FunnelReport& funnel);
std::string cdf_tsv(const std::vector<CdfPoint>& points);
std::string plddt_summary_tsv(const std::vector<double>& values, double threshold);

std::string maxid_tsv(const std::vector<IdentityResult>& results);
std::map<std::string, IdentityResult> parse_maxid_tsv(std::string_view text);

// -------------------------------------------------------------------- runs

struct RunResult {
  std::vector<FunnelStage> stages;
  std::vector<std::string> final_ids;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> outputs;  // files written
};

// Length -> motif -> profile-hit -> blocklist screens.
RunResult run_curate(const PipelineConfig& cfg);
// Cluster, balance, split and verify; writes the manifest and both FASTA halves.
RunResult run_split(const PipelineConfig& cfg);
// maxID of every query against the database; writes the maxid table.
RunResult run_maxid(const PipelineConfig& cfg);
// Runs configured hooks, validates every evidence file and copies it into the store.
RunResult run_ingest(const PipelineConfig& cfg);
// Scorecards + filter chain over the store; writes candidates, scorecards, funnel.
RunResult run_filter(const PipelineConfig& cfg);
// run_filter outputs plus the pLDDT CDF, its summary and the run manifest.
RunResult run_report(const PipelineConfig& cfg);

// Reads the evidence store written by run_ingest.
struct LoadedEvidence {
  std::vector<std::string> candidate_ids;
  EvidenceBundle bundle;
  std::vector<std::pair<std::string, std::string>> inputs;  // (store file, sha256)
};
LoadedEvidence load_evidence_store(const PipelineConfig& cfg);

}  // namespace tpsf
