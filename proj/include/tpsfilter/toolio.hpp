#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tpsf {

// ---------------------------------------------------------------- perplexity

// exp(-mean(logprobs)). The sum is exact-rounded, so the result does not
// depend on element order. Throws EmptyInput.
double perplexity(std::span<const double> logprobs);

struct ScoredSequence {
  std::string id;
  std::string residues;
  std::vector<double> token_logprobs;
  double perplexity = 0.0;
  std::optional<double> reported_perplexity;  // as emitted by the generator, if any
};

// One JSON object per line: {"id", "sequence", "token_logprobs"} plus optional
// "tokenization" ("residue" | "subword"), "token_count" and "perplexity".
std::vector<ScoredSequence> parse_generation_records(std::string_view text);
std::string write_generation_record(const ScoredSequence& rec);

// --------------------------------------------------------------- structures

struct StructureConfidence {
  std::string id;
  std::vector<double> plddt;  // one per CA row of model 1
  double mean_plddt = 0.0;
};

struct PlddtOptions {
  // Accept 0-1 scaled confidences and multiply them by 100.
  bool rescale_unit_interval = false;
};

StructureConfidence parse_structure_plddt(std::string_view pdb_text, std::string id = {},
                                          const PlddtOptions& opts = {});

// ------------------------------------------------------------ structural hits

struct StructuralHit {
  std::string query;
  std::string target;
  double tm_score = 0.0;
  std::size_t rank = 0;  // 1-based within query, by descending TM-score

  bool operator==(const StructuralHit&) const = default;
};

struct HitTableOptions {
  std::vector<std::string> columns{"query", "target", "alntmscore"};
  std::string tm_column = "alntmscore";
  // Count and skip bad rows instead of throwing UnparsableRow.
  bool skip_bad_rows = false;
};

struct HitTable {
  std::map<std::string, std::vector<StructuralHit>> by_query;  // each list ranked
  std::size_t bad_rows = 0;

  const StructuralHit* best(std::string_view query) const;
};

HitTable parse_structural_hits(std::string_view text, const HitTableOptions& opts = {});
// Rows of query, target, TM-score (columns query,target,alntmscore), ranked order.
std::string write_structural_hits(const HitTable& table);

// --------------------------------------------------------- detector scores

std::map<std::string, double> parse_detector_scores(std::string_view text);

// ----------------------------------------------------------- EC predictions

struct EcNumber {
  std::array<int, 3> head{};
  std::optional<int> last;  // nullopt renders as '-'

  std::string to_string() const;
  bool operator==(const EcNumber&) const = default;
};

// "a.b.c.d"; a-c positive integers, d a positive integer or '-'. Throws MalformedEC.
EcNumber parse_ec_number(std::string_view text);

// Allowlist pattern: up to four fields, '-' matches anything ("4.2.3.-", "4.2.3").
bool ec_matches(const EcNumber& ec, std::string_view pattern);

struct EcPrediction {
  EcNumber ec;
  std::optional<double> confidence;
};

std::map<std::string, std::vector<EcPrediction>> parse_ec_predictions(std::string_view text);

// ------------------------------------------------------- domain annotations

struct DomainAnnotation {
  std::string accession;
  std::string description;

  bool operator==(const DomainAnnotation&) const = default;
};

struct DomainColumns {
  std::size_t id = 1;  // 1-based column indices
  std::size_t accession = 12;
  std::size_t description = 13;
};

std::map<std::string, std::vector<DomainAnnotation>> parse_domain_annotations(
    std::string_view text, const DomainColumns& cols = {});

// ------------------------------------------------------ profile domain table

enum class ProfileOrientation {
  ScanSequences,    // sequences are queries, profiles are targets
  SearchProfiles,   // profiles are queries, sequences are targets
};

enum class DomainFamily { Tps, NonTps };

struct DomainHit {
  std::string sequence_id;
  std::string accession;
  DomainFamily family = DomainFamily::NonTps;  // labelled from the allowlist at parse time
  double bit_score = 0.0;
  double evalue = 0.0;
};

// Accession comparison ignores a trailing ".version".
std::string strip_accession_version(std::string_view accession);

std::vector<DomainHit> parse_profile_hits(std::string_view text,
                                          const std::set<std::string>& tps_accessions,
                                          ProfileOrientation orientation = ProfileOrientation::ScanSequences);

// Ids whose best non-TPS hit outscores their best TPS hit, or that have
// non-TPS hits and no TPS hit. Ties keep the sequence.
std::set<std::string> stronger_non_tps_filter(const std::vector<DomainHit>& hits,
                                              const std::set<std::string>& tps_accessions);

std::set<std::string> default_tps_accessions();

}  // namespace tpsf
