// Synthetic generation runs with a planted funnel.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "support/testkit.hpp"
#include "tpsfilter/pipeline.hpp"

namespace testkit {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string ca_pdb(const std::vector<double>& plddt) {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < plddt.size(); ++i) {
    std::snprintf(buf, sizeof buf, "ATOM  %5zu  CA  ALA A%4zu    %8.3f%8.3f%8.3f%6.2f%6.2f           C\n", i + 1,
                  i + 1, 3.8 * double(i), 0.0, 0.0, 1.0, plddt[i]);
    out += buf;
  }
  return out + "END\n";
}

struct SynthParams {
  std::size_t total = 28000;
  double top_fraction = 0.10;
  std::size_t detector_pass = 77;  // within the perplexity-retained pool
  std::size_t final_pass = 7;      // of those, below the maxID limit and passing the rest
  std::size_t length = 64;
  std::uint64_t seed = 1;
};

struct SynthRun {
  std::filesystem::path config;
  std::vector<std::string> expected_final;
  std::size_t expected_top = 0;
};

// Writes generation records and every evidence file, plus a config whose stage
// order is perplexity, detector, maxid, then the rest.
inline SynthRun write_synthetic_run(const std::filesystem::path& dir, const SynthParams& params) {
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = params.total;
  const std::size_t top = tpsf::top_fraction_count(n, params.top_fraction);

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = pad_id("gen-", i, 6);
  // rank_of[i] is the perplexity rank of record i, 0 = lowest.
  std::vector<std::size_t> rank_of(n);
  for (std::size_t i = 0; i < n; ++i) rank_of[i] = i;
  std::shuffle(rank_of.begin(), rank_of.end(), rng);

  std::vector<std::size_t> in_top;
  for (std::size_t i = 0; i < n; ++i) {
    if (rank_of[i] < top) in_top.push_back(i);
  }
  std::shuffle(in_top.begin(), in_top.end(), rng);
  std::set<std::size_t> det(in_top.begin(), in_top.begin() + params.detector_pass);
  std::set<std::size_t> fin(in_top.begin(), in_top.begin() + params.final_pass);

  SynthRun run;
  run.expected_top = top;
  std::string records, detector = "id,score\n", maxid = "query\ttarget\tidentity\tmatches\tcolumns\tskipped\n";
  std::string ec, domains, hits;
  char buf[256];
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = ids[i];
    const bool is_top = rank_of[i] < top, is_det = det.count(i) > 0, is_fin = fin.count(i) > 0;
    if (is_fin) run.expected_final.push_back(id);

    // Paired offsets around a rank-determined mean keep perplexity ordering exact.
    double mean_lp = -(1.0 + 1e-4 * double(rank_of[i]));
    tpsf::ScoredSequence s;
    s.id = id;
    s.residues = random_residues(rng, params.length);
    for (std::size_t k = 0; k < params.length / 2; ++k) {
      double d = 0.5 * u(rng);
      s.token_logprobs.push_back(mean_lp + d);
      s.token_logprobs.push_back(mean_lp - d);
    }
    records += tpsf::write_generation_record(s);

    double score = is_det ? 0.70 + 0.29 * u(rng) : (is_top ? 0.69 * u(rng) : u(rng));
    std::snprintf(buf, sizeof buf, "%s,%.4f\n", id.c_str(), score);
    detector += buf;

    double ident = is_fin ? 0.30 + 0.28 * u(rng) : (is_det ? 0.62 + 0.3 * u(rng) : 0.2 + 0.75 * u(rng));
    std::size_t cols = 300, matches = static_cast<std::size_t>(ident * cols);
    std::snprintf(buf, sizeof buf, "%s\tnat-%05zu\t%.17g\t%zu\t%zu\t0\n", id.c_str(), i % 997,
                  double(matches) / double(cols), matches, cols);
    maxid += buf;

    bool good = is_fin || u(rng) < 0.5;
    ec += id + (good ? ", EC:4.2.3.75/0.9\n" : ", EC:1.1.1.1/0.4\n");
    good = is_fin || u(rng) < 0.5;
    domains += id + "\tmd5\t300\tPfam\tPF03936\td\t1\t100\t1e-20\tT\tdate\t" +
               (good ? "IPR005630\tTerpene synthase, metal-binding domain\n" : "IPR000001\tKringle\n");
    double tm = is_fin ? 0.65 + 0.2 * u(rng) : u(rng);
    std::snprintf(buf, sizeof buf, "%s\tpdb-%zu\t%.4f\n", id.c_str(), i % 101, tm);
    hits += buf;
    if (is_det) {
      double base = is_fin ? 75.0 + 20.0 * u(rng) : 40.0 + 55.0 * u(rng);
      std::vector<double> pl(12);
      for (auto& v : pl) v = std::round(std::clamp(base + 4.0 * (u(rng) - 0.5), 0.0, 100.0) * 100) / 100;
      if (is_fin) {
        for (auto& v : pl) v = std::max(v, 71.0);
      }
      write_file(dir / "structures" / (id + ".pdb"), ca_pdb(pl));
    }
  }
  write_file(dir / "generation_records.jsonl", records);
  write_file(dir / "detector_scores.csv", detector);
  write_file(dir / "maxid.tsv", maxid);
  write_file(dir / "ec_predictions.csv", ec);
  write_file(dir / "domains.tsv", domains);
  write_file(dir / "hits.tsv", hits);
  std::filesystem::create_directories(dir / "structures");

  nlohmann::json cfg = {
      {"output_dir", "out"},
      {"evidence",
       {{"generation_records", "generation_records.jsonl"},
        {"maxid", "maxid.tsv"},
        {"detector_scores", "detector_scores.csv"},
        {"ec_predictions", "ec_predictions.csv"},
        {"domain_annotations", "domains.tsv"},
        {"structures_dir", "structures"},
        {"structural_hits", "hits.tsv"}}},
      {"filters",
       {{"perplexity_top_fraction", params.top_fraction},
        {"stage_order", {"perplexity", "detector", "maxid", "ec", "domain", "plddt", "tm"}}}},
      {"tool_versions", {{"generator", "synthetic"}}},
  };
  run.config = dir / "config.json";
  write_file(run.config, cfg.dump(2) + "\n");
  std::sort(run.expected_final.begin(), run.expected_final.end());
  return run;
}

// Random in-memory scorecards with every evidence kind present or absent.
inline std::vector<tpsf::Scorecard> random_cards(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  static const char* kEcs[] = {"4.2.3.75", "2.5.1.21", "1.1.1.1", "5.4.99.8", "3.1.1.-"};
  static const char* kDoms[] = {"IPR005630", "IPR033904", "IPR000001", "IPR999999"};
  std::vector<tpsf::Scorecard> cards(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = cards[i];
    c.id = pad_id("c", i);
    auto present = [&] { return u(rng) < 0.92; };
    if (present()) c.perplexity = 1.0 + 20.0 * u(rng);
    if (present()) {
      tpsf::IdentityResult r;
      r.query_id = c.id;
      r.target_id = "t";
      r.columns = 200;
      r.matches = static_cast<std::size_t>(u(rng) * 200);
      r.identity = double(r.matches) / 200.0;
      c.maxid = r;
    }
    if (present()) c.detector_score = u(rng);
    if (present()) c.mean_plddt = 100.0 * u(rng);
    if (present()) c.best_tm = tpsf::StructuralHit{c.id, "p", u(rng), 1};
    if (present()) {
      std::vector<tpsf::EcPrediction> preds;
      for (int k = int(rng() % 3); k > 0; --k) preds.push_back({tpsf::parse_ec_number(kEcs[rng() % 5]), {}});
      c.ec_predictions = preds;
    }
    if (present()) {
      std::vector<tpsf::DomainAnnotation> doms;
      for (int k = int(rng() % 3); k > 0; --k) doms.push_back({kDoms[rng() % 4], "d"});
      c.domains = doms;
    }
  }
  return cards;
}

inline std::vector<std::string> passing_ids(const tpsf::FilterResult& r) { return r.funnel.final_ids; }

}  // namespace testkit
