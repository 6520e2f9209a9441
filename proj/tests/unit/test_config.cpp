#include <doctest.h>

#include "tpsfilter/config.hpp"
#include "tpsfilter/error.hpp"
#include "tpsfilter/pipeline.hpp"

using namespace tpsf;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("defaults") {
  auto cfg = parse_config("{}");
  CHECK(cfg.filters.perplexity_top_fraction == 0.10);
  CHECK(cfg.filters.maxid_max_percent == 60.0);
  CHECK(cfg.filters.detector_min == 0.7);
  CHECK(cfg.filters.plddt_min == 70.0);
  CHECK(cfg.filters.tm_min == 0.6);
  CHECK(cfg.filters.tm_max == 0.9);
  CHECK(cfg.split.threshold == 0.30);
  CHECK(cfg.split.partitions == 6);
  CHECK_FALSE(cfg.split.train_partitions.has_value());
  CHECK(cfg.curate.min_length == 300);
  CHECK(cfg.curate.max_length == 1100);
  CHECK(cfg.align.match == 1);
  CHECK(cfg.align.mismatch == -1);
  CHECK(cfg.align.gap == -1);
  CHECK(cfg.filters.order.size() == 7);
  CHECK(cfg.threads == 1);
}

TEST_CASE("explicit values") {
  auto cfg = parse_config(R"({
    "threads": 3, "strict": true,
    "split": {"partitions": 4, "train_partitions": [1, 2, 3], "threshold": 0.4},
    "filters": {"detector_min": 0.76, "disabled": ["perplexity", "tm"],
                "stage_order": ["perplexity", "detector", "maxid", "ec", "domain", "plddt", "tm"]},
    "evidence": {"domain_columns": {"id": 2, "accession": 3, "description": 4}},
    "tool_versions": {"aligner": "1.0"}
  })");
  CHECK(cfg.threads == 3);
  CHECK(cfg.strict);
  CHECK(cfg.split.partitions == 4);
  CHECK(*cfg.split.train_partitions == std::set<std::size_t>{1, 2, 3});
  CHECK(cfg.filters.detector_min == 0.76);
  CHECK(cfg.filters.disabled == std::set<Stage>{Stage::PerplexityRank, Stage::Tm});
  CHECK(cfg.filters.order[1] == Stage::Detector);
  CHECK(cfg.filters.order[2] == Stage::MaxId);
  CHECK(cfg.evidence.domain_columns.accession == 3);
  CHECK(cfg.tool_versions.at("aligner") == "1.0");
}

TEST_CASE("invalid configs") {
  CHECK(kind_of([] { parse_config("{\"bogus\": 1}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"detectr_min\": 0.5}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"detector_min\": \"high\"}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"detector_min\": 1.5}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"tm_min\": 0.95}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"ec_allowlist\": []}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"stage_order\": [\"tm\"]}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"filters\": {\"disabled\": [\"magic\"]}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"split\": {\"threshold\": 1.0}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"split\": {\"partitions\": 1}}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("{\"alphabet\": \"dna\"}"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("not json"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { load_config("/nonexistent/config.json"); }) == ErrorKind::IoError);
}

TEST_CASE("disabling EC allows an empty allowlist") {
  auto cfg = parse_config(R"({"filters": {"ec_allowlist": [], "disabled": ["ec"]}})");
  CHECK_FALSE(cfg.filters.enabled(Stage::Ec));
}

TEST_CASE("digest is stable and sensitive to settings") {
  auto a = parse_config("{\"filters\": {\"detector_min\": 0.7}}");
  auto b = parse_config("{}");
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 64);
  auto c = parse_config("{\"filters\": {\"detector_min\": 0.71}}");
  CHECK(a.digest() != c.digest());
  auto d = parse_config("{\"output_dir\": \"elsewhere\"}");
  CHECK(d.digest() == b.digest());
  CHECK(parse_config(a.canonical_json()).digest() == a.digest());
}

TEST_CASE("path resolution") {
  auto cfg = parse_config("{\"output_dir\": \"out\"}", "/data/run");
  CHECK(cfg.resolve("x.fasta") == "/data/run/x.fasta");
  CHECK(cfg.resolve("/abs/x.fasta") == "/abs/x.fasta");
  CHECK(cfg.resolve("") == "");
  CHECK(cfg.output_path("funnel.tsv") == "/data/run/out/funnel.tsv");
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("stage names round trip") {
  for (Stage s : kCanonicalStageOrder) CHECK(parse_stage(to_string(s)) == s);
}
