#include "tpsfilter/config.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "text_util.hpp"
#include "tpsfilter/error.hpp"

namespace tpsf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::PerplexityRank, "perplexity"}, {Stage::MaxId, "maxid"}, {Stage::Detector, "detector"},
    {Stage::Ec, "ec"},                     {Stage::Domain, "domain"}, {Stage::Plddt, "plddt"},
    {Stage::Tm, "tm"},
};

Error invalid(const std::string& what) { return Error(ErrorKind::ConfigInvalid, what); }

void check_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw invalid(std::string(section) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw invalid("unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view section) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw invalid(std::string(section) + "." + key + " has the wrong type");
  }
}

std::string stage_list(const std::vector<Stage>& stages) {
  std::string s;
  for (auto st : stages) s += std::string(to_string(st)) + ",";
  return s;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (auto [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  for (auto [stage, n] : kStageNames) {
    if (n == name) return stage;
  }
  throw invalid("unknown filter stage '" + std::string(name) + "'");
}

void FilterConfig::validate() const {
  if (!(perplexity_top_fraction > 0.0 && perplexity_top_fraction <= 1.0)) {
    throw invalid("perplexity_top_fraction must be in (0, 1]");
  }
  if (!(detector_min >= 0.0 && detector_min <= 1.0)) throw invalid("detector_min must be in [0, 1]");
  if (!(plddt_min >= 0.0 && plddt_min <= 100.0)) throw invalid("plddt_min must be in [0, 100]");
  if (!(tm_min >= 0.0 && tm_min <= tm_max && tm_max <= 1.0)) {
    throw invalid("TM bounds must satisfy 0 <= tm_min <= tm_max <= 1");
  }
  if (!(maxid_max_percent >= 0.0 && maxid_max_percent <= 100.0)) {
    throw invalid("maxid_max_percent must be in [0, 100]");
  }
  if (enabled(Stage::Ec) && ec_allowlist.empty()) throw invalid("EC stage enabled with an empty allowlist");
  if (enabled(Stage::Domain) && domain_allowlist.empty()) {
    throw invalid("domain stage enabled with an empty allowlist");
  }
  std::set<Stage> seen(order.begin(), order.end());
  if (seen.size() != order.size() || seen.size() != std::size(kCanonicalStageOrder)) {
    throw invalid("stage order must list every stage exactly once: " + stage_list(order));
  }
}

std::string PipelineConfig::resolve(const std::string& p) const {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::string PipelineConfig::output_path(const std::string& name) const {
  if (name.empty()) return name;
  fs::path path(name);
  if (path.is_absolute()) return name;
  return (fs::path(resolve(output_dir)) / path).lexically_normal().string();
}

std::string PipelineConfig::canonical_json() const {
  json j;
  j["alphabet"] = alphabet == AlphabetMode::Strict ? "strict" : "lenient";
  j["align"] = {
      {"match", align.match},
      {"mismatch", align.mismatch},
      {"gap", align.gap},
      {"prefilter", align.prefilter},
      {"kmer_k", align.kmer_k},
      {"min_shared_kmers", align.min_shared_kmers},
      {"band", align.band ? json(*align.band) : json(nullptr)},
      {"identity_denominator", align.denominator == IdentityDenominator::Columns ? "columns" : "min_length"},
  };
  json motifs = json::array();
  for (const auto& m : this->motifs) {
    motifs.push_back({{"name", m.name}, {"pattern", m.pattern()}, {"class", std::string(to_string(m.enzyme_class))}});
  }
  j["motifs"] = motifs;
  j["curate"] = {
      {"input", curate.input},
      {"output", curate.output},
      {"min_length", curate.min_length},
      {"max_length", curate.max_length},
      {"profile_hits", curate.profile_hits},
      {"profile_orientation", curate.profile_orientation == ProfileOrientation::ScanSequences ? "scan" : "search"},
      {"tps_accessions", curate.tps_accessions},
      {"blocklist", curate.blocklist},
      {"blocklist_identity", curate.blocklist_identity},
  };
  j["split"] = {
      {"input", split.input},
      {"manifest", split.manifest},
      {"train_fasta", split.train_fasta},
      {"validation_fasta", split.validation_fasta},
      {"threshold", split.threshold},
      {"partitions", split.partitions},
      {"train_partitions", split.train_partitions ? json(*split.train_partitions) : json("auto")},
      {"target_train_fraction", split.target_train_fraction},
      {"verify_sampling_rate", split.verify_sampling_rate},
      {"seed", split.seed},
  };
  j["maxid"] = {{"queries", maxid.queries}, {"database", maxid.database}, {"output", maxid.output}};
  j["evidence"] = {
      {"store", evidence.store},
      {"candidates", evidence.candidates},
      {"generation_records", evidence.generation_records},
      {"maxid", evidence.maxid},
      {"detector_scores", evidence.detector_scores},
      {"ec_predictions", evidence.ec_predictions},
      {"domain_annotations", evidence.domain_annotations},
      {"domain_columns",
       {{"id", evidence.domain_columns.id},
        {"accession", evidence.domain_columns.accession},
        {"description", evidence.domain_columns.description}}},
      {"structures_dir", evidence.structures_dir},
      {"plddt_rescale", evidence.plddt_rescale},
      {"structural_hits", evidence.structural_hits},
      {"structural_hits_columns", evidence.hit_columns.columns},
      {"tm_column", evidence.hit_columns.tm_column},
  };
  json disabled = json::array();
  for (auto s : filters.disabled) disabled.push_back(std::string(to_string(s)));
  json order = json::array();
  for (auto s : filters.order) order.push_back(std::string(to_string(s)));
  j["filters"] = {
      {"perplexity_top_fraction", filters.perplexity_top_fraction},
      {"maxid_max_percent", filters.maxid_max_percent},
      {"maxid_round_percent", filters.maxid_round_percent},
      {"detector_min", filters.detector_min},
      {"plddt_min", filters.plddt_min},
      {"tm_min", filters.tm_min},
      {"tm_max", filters.tm_max},
      {"ec_allowlist", filters.ec_allowlist},
      {"domain_allowlist", filters.domain_allowlist},
      {"disabled", disabled},
      {"stage_order", order},
  };
  j["tool_versions"] = tool_versions;
  j["hooks"] = hooks;
  return j.dump();
}

std::string PipelineConfig::digest() const { return sha256_hex(canonical_json()); }

PipelineConfig parse_config(std::string_view json_text, std::string base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw invalid(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  cfg.base_dir = std::move(base_dir);
  check_keys(root, "config", {"alphabet", "output_dir", "threads", "strict", "align", "motifs", "curate", "split",
                              "maxid", "evidence", "filters", "tool_versions", "hooks"});
  read(root, "output_dir", cfg.output_dir, "config");
  read(root, "threads", cfg.threads, "config");
  read(root, "strict", cfg.strict, "config");
  if (auto it = root.find("alphabet"); it != root.end()) {
    std::string a = it->is_string() ? it->get<std::string>() : "";
    if (a == "strict") cfg.alphabet = AlphabetMode::Strict;
    else if (a == "lenient") cfg.alphabet = AlphabetMode::Lenient;
    else throw invalid("alphabet must be 'strict' or 'lenient'");
  }

  if (auto it = root.find("align"); it != root.end()) {
    const json& a = *it;
    check_keys(a, "align", {"match", "mismatch", "gap", "prefilter", "kmer_k", "min_shared_kmers", "band",
                            "identity_denominator"});
    read(a, "match", cfg.align.match, "align");
    read(a, "mismatch", cfg.align.mismatch, "align");
    read(a, "gap", cfg.align.gap, "align");
    read(a, "prefilter", cfg.align.prefilter, "align");
    read(a, "kmer_k", cfg.align.kmer_k, "align");
    read(a, "min_shared_kmers", cfg.align.min_shared_kmers, "align");
    if (auto b = a.find("band"); b != a.end() && !b->is_null()) {
      if (!b->is_number_unsigned()) throw invalid("align.band must be a non-negative integer");
      cfg.align.band = b->get<std::size_t>();
    }
    if (auto d = a.find("identity_denominator"); d != a.end()) {
      std::string v = d->is_string() ? d->get<std::string>() : "";
      if (v == "columns") cfg.align.denominator = IdentityDenominator::Columns;
      else if (v == "min_length") cfg.align.denominator = IdentityDenominator::MinLength;
      else throw invalid("align.identity_denominator must be 'columns' or 'min_length'");
    }
    try {
      cfg.align.validate();
    } catch (const Error& e) {
      throw invalid(e.what());
    }
  }

  if (auto it = root.find("motifs"); it != root.end()) {
    if (!it->is_array()) throw invalid("motifs must be an array");
    cfg.motifs.clear();
    for (const auto& m : *it) {
      check_keys(m, "motifs[]", {"name", "pattern", "class"});
      std::string name, pattern, klass;
      read(m, "name", name, "motifs[]");
      read(m, "pattern", pattern, "motifs[]");
      read(m, "class", klass, "motifs[]");
      try {
        cfg.motifs.push_back(compile_motif(pattern, parse_enzyme_class(klass), name));
      } catch (const Error& e) {
        throw invalid(std::string("motif '") + name + "': " + e.what());
      }
    }
    if (cfg.motifs.empty()) throw invalid("motifs must not be empty");
  }

  if (auto it = root.find("curate"); it != root.end()) {
    const json& c = *it;
    check_keys(c, "curate", {"input", "output", "min_length", "max_length", "profile_hits", "profile_orientation",
                             "tps_accessions", "blocklist", "blocklist_identity"});
    read(c, "input", cfg.curate.input, "curate");
    read(c, "output", cfg.curate.output, "curate");
    read(c, "min_length", cfg.curate.min_length, "curate");
    read(c, "max_length", cfg.curate.max_length, "curate");
    read(c, "profile_hits", cfg.curate.profile_hits, "curate");
    read(c, "tps_accessions", cfg.curate.tps_accessions, "curate");
    read(c, "blocklist", cfg.curate.blocklist, "curate");
    read(c, "blocklist_identity", cfg.curate.blocklist_identity, "curate");
    if (auto o = c.find("profile_orientation"); o != c.end()) {
      std::string v = o->is_string() ? o->get<std::string>() : "";
      if (v == "scan") cfg.curate.profile_orientation = ProfileOrientation::ScanSequences;
      else if (v == "search") cfg.curate.profile_orientation = ProfileOrientation::SearchProfiles;
      else throw invalid("curate.profile_orientation must be 'scan' or 'search'");
    }
    if (cfg.curate.min_length == 0 || cfg.curate.min_length > cfg.curate.max_length) {
      throw invalid("curate length window must satisfy 1 <= min_length <= max_length");
    }
    if (!(cfg.curate.blocklist_identity > 0.0 && cfg.curate.blocklist_identity <= 1.0)) {
      throw invalid("curate.blocklist_identity must be in (0, 1]");
    }
  }

  if (auto it = root.find("split"); it != root.end()) {
    const json& s = *it;
    check_keys(s, "split", {"input", "manifest", "train_fasta", "validation_fasta", "threshold", "partitions",
                            "train_partitions", "target_train_fraction", "verify_sampling_rate", "seed"});
    read(s, "input", cfg.split.input, "split");
    read(s, "manifest", cfg.split.manifest, "split");
    read(s, "train_fasta", cfg.split.train_fasta, "split");
    read(s, "validation_fasta", cfg.split.validation_fasta, "split");
    read(s, "threshold", cfg.split.threshold, "split");
    read(s, "partitions", cfg.split.partitions, "split");
    read(s, "target_train_fraction", cfg.split.target_train_fraction, "split");
    read(s, "verify_sampling_rate", cfg.split.verify_sampling_rate, "split");
    read(s, "seed", cfg.split.seed, "split");
    if (auto t = s.find("train_partitions"); t != s.end()) {
      if (t->is_string() && t->get<std::string>() == "auto") {
        cfg.split.train_partitions.reset();
      } else {
        std::set<std::size_t> parts;
        read(s, "train_partitions", parts, "split");
        cfg.split.train_partitions = parts;
      }
    }
    if (!(cfg.split.threshold > 0.0 && cfg.split.threshold < 1.0)) throw invalid("split.threshold must be in (0, 1)");
    if (cfg.split.partitions < 2) throw invalid("split.partitions must be >= 2");
  }

  if (auto it = root.find("maxid"); it != root.end()) {
    check_keys(*it, "maxid", {"queries", "database", "output"});
    read(*it, "queries", cfg.maxid.queries, "maxid");
    read(*it, "database", cfg.maxid.database, "maxid");
    read(*it, "output", cfg.maxid.output, "maxid");
  }

  if (auto it = root.find("evidence"); it != root.end()) {
    const json& e = *it;
    check_keys(e, "evidence", {"store", "candidates", "generation_records", "maxid", "detector_scores",
                               "ec_predictions", "domain_annotations", "domain_columns", "structures_dir",
                               "plddt_rescale", "structural_hits", "structural_hits_columns", "tm_column"});
    read(e, "store", cfg.evidence.store, "evidence");
    read(e, "candidates", cfg.evidence.candidates, "evidence");
    read(e, "generation_records", cfg.evidence.generation_records, "evidence");
    read(e, "maxid", cfg.evidence.maxid, "evidence");
    read(e, "detector_scores", cfg.evidence.detector_scores, "evidence");
    read(e, "ec_predictions", cfg.evidence.ec_predictions, "evidence");
    read(e, "domain_annotations", cfg.evidence.domain_annotations, "evidence");
    read(e, "structures_dir", cfg.evidence.structures_dir, "evidence");
    read(e, "plddt_rescale", cfg.evidence.plddt_rescale, "evidence");
    read(e, "structural_hits", cfg.evidence.structural_hits, "evidence");
    read(e, "structural_hits_columns", cfg.evidence.hit_columns.columns, "evidence");
    read(e, "tm_column", cfg.evidence.hit_columns.tm_column, "evidence");
    if (auto dc = e.find("domain_columns"); dc != e.end()) {
      check_keys(*dc, "evidence.domain_columns", {"id", "accession", "description"});
      read(*dc, "id", cfg.evidence.domain_columns.id, "evidence.domain_columns");
      read(*dc, "accession", cfg.evidence.domain_columns.accession, "evidence.domain_columns");
      read(*dc, "description", cfg.evidence.domain_columns.description, "evidence.domain_columns");
    }
  }

  if (auto it = root.find("filters"); it != root.end()) {
    const json& f = *it;
    check_keys(f, "filters", {"perplexity_top_fraction", "maxid_max_percent", "maxid_round_percent", "detector_min",
                              "plddt_min", "tm_min", "tm_max", "ec_allowlist", "domain_allowlist", "disabled",
                              "stage_order"});
    auto& fc = cfg.filters;
    read(f, "perplexity_top_fraction", fc.perplexity_top_fraction, "filters");
    read(f, "maxid_max_percent", fc.maxid_max_percent, "filters");
    read(f, "maxid_round_percent", fc.maxid_round_percent, "filters");
    read(f, "detector_min", fc.detector_min, "filters");
    read(f, "plddt_min", fc.plddt_min, "filters");
    read(f, "tm_min", fc.tm_min, "filters");
    read(f, "tm_max", fc.tm_max, "filters");
    read(f, "ec_allowlist", fc.ec_allowlist, "filters");
    read(f, "domain_allowlist", fc.domain_allowlist, "filters");
    std::vector<std::string> names;
    read(f, "disabled", names, "filters");
    for (const auto& n : names) fc.disabled.insert(parse_stage(n));
    if (f.contains("stage_order")) {
      names.clear();
      read(f, "stage_order", names, "filters");
      fc.order.clear();
      for (const auto& n : names) fc.order.push_back(parse_stage(n));
    }
  }
  cfg.filters.validate();

  read(root, "tool_versions", cfg.tool_versions, "config");
  read(root, "hooks", cfg.hooks, "config");
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  fs::path p(path);
  std::string base = p.has_parent_path() ? p.parent_path().string() : ".";
  PipelineConfig cfg = parse_config(text, base);
  cfg.path = path;
  return cfg;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(text);
}

}  // namespace tpsf
