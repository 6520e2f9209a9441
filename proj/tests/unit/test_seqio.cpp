#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/testkit.hpp"
#include "tpsfilter/error.hpp"
#include "tpsfilter/seqio.hpp"

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

TEST_CASE("parse_fasta joins wrapped lines and splits the header") {
  auto set = parse_fasta(">s1 demo\nMKT\nLLV\n");
  REQUIRE(set.size() == 1);
  CHECK(set[0].id == "s1");
  CHECK(set[0].description == "demo");
  CHECK(set[0].residues == "MKTLLV");
}

TEST_CASE("parse_fasta rejects duplicate ids") {
  CHECK(kind_of([] { parse_fasta(">a\nMK\n>a\nML\n"); }) == ErrorKind::DuplicateId);
}

TEST_CASE("parse_fasta error kinds") {
  CHECK(kind_of([] { parse_fasta(">a\nMKB\n"); }) == ErrorKind::IllegalResidue);
  CHECK(kind_of([] { parse_fasta(">a\nMKX\n"); }) == ErrorKind::IllegalResidue);
  CHECK(parse_fasta(">a\nMKX\n", AlphabetMode::Lenient)[0].residues == "MKX");
  CHECK(kind_of([] { parse_fasta(">a\nMKZ\n", AlphabetMode::Lenient); }) == ErrorKind::IllegalResidue);
  CHECK(kind_of([] { parse_fasta(">a\n>b\nMK\n"); }) == ErrorKind::EmptySequence);
  CHECK(kind_of([] { parse_fasta(">a\n"); }) == ErrorKind::EmptySequence);
  CHECK(kind_of([] { parse_fasta("MKT\n>a\nMK\n"); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([] { parse_fasta("> a\nMK\n"); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([] { parse_fasta(">\nMK\n"); }) == ErrorKind::MalformedHeader);
}

TEST_CASE("IllegalResidue names the id, position and character") {
  try {
    parse_fasta(">q7 x\nMKT\nL*V\n");
    FAIL("no error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("q7") != std::string::npos);
    CHECK(msg.find("position 4") != std::string::npos);
    CHECK(msg.find("'*'") != std::string::npos);
  }
}

TEST_CASE("header length guard") {
  std::string big = ">" + std::string(kMaxHeaderBytes + 1, 'a') + "\nMK\n";
  CHECK(kind_of([&] { parse_fasta(big); }) == ErrorKind::MalformedHeader);
}

TEST_CASE("lowercase, CRLF and blank lines are normalized") {
  auto set = parse_fasta(">a  some words \r\nmk t\r\n\r\nllv\r\n>b\r\nW\r\n");
  REQUIRE(set.size() == 2);
  CHECK(set[0].residues == "MKTLLV");
  CHECK(set[0].description == "some words");
  CHECK(set[1].residues == "W");
  CHECK(parse_fasta("").empty());
}

TEST_CASE("write_fasta wraps at the requested width") {
  auto set = testkit::make_set({{"s1", "MKTLLV"}});
  CHECK(write_fasta(set, 3) == ">s1\nMKT\nLLV\n");
  SequenceSet d;
  d.add({"s2", "two words", "MK"});
  CHECK(write_fasta(d, 60) == ">s2 two words\nMK\n");
}

TEST_CASE("1000-record corpus with mixed wrapping and CRLF round-trips after normalization") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 700), wrapd(1, 120), coin(0, 1);
  std::string raw, canonical;
  for (int i = 0; i < 1000; ++i) {
    std::string id = testkit::pad_id("r", i);
    std::string res = testkit::random_residues(rng, len(rng));
    std::string desc = coin(rng) ? "desc " + std::to_string(i) : "";
    const char* eol = coin(rng) ? "\r\n" : "\n";
    raw += ">" + id + (desc.empty() ? "" : " " + desc) + eol;
    int w = wrapd(rng);
    for (std::size_t p = 0; p < res.size(); p += w) {
      std::string chunk = res.substr(p, w);
      if (coin(rng)) std::transform(chunk.begin(), chunk.end(), chunk.begin(), ::tolower);
      raw += chunk + eol;
    }
    canonical += ">" + id + (desc.empty() ? "" : " " + desc) + "\n";
    for (std::size_t p = 0; p < res.size(); p += 60) canonical += res.substr(p, 60) + "\n";
  }
  auto set = parse_fasta(raw);
  CHECK(set.size() == 1000);
  CHECK(write_fasta(set, 60) == canonical);
  CHECK(parse_fasta(canonical) == set);
  CHECK(write_fasta(parse_fasta(write_fasta(set, 17)), 17) == write_fasta(set, 17));
}

TEST_CASE("length_filter keeps the inclusive window") {
  SequenceSet set;
  for (std::size_t n : {299u, 300u, 1100u, 1101u}) set.add({"l" + std::to_string(n), "", std::string(n, 'A')});
  auto kept = length_filter(set, 300, 1100);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].length() == 300);
  CHECK(kept[1].length() == 1100);
  CHECK(length_filter(set, 1) == set);
  CHECK(kind_of([&] { length_filter(set, 10, 5); }) == ErrorKind::InvalidRange);
  CHECK(kind_of([&] { length_filter(set, 0, 5); }) == ErrorKind::InvalidRange);
}

TEST_CASE("length_filter matches a scan oracle and is idempotent and monotone") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(1, 1500);
  SequenceSet set;
  for (int i = 0; i < 500; ++i) set.add({testkit::pad_id("x", i), "", testkit::random_residues(rng, len(rng))});
  auto kept = length_filter(set, 300, 1100);
  std::vector<std::string> oracle;
  for (const auto& s : set)
    if (s.residues.size() >= 300 && s.residues.size() <= 1100) oracle.push_back(s.id);
  std::vector<std::string> got;
  for (const auto& s : kept) got.push_back(s.id);
  CHECK(got == oracle);
  CHECK(length_filter(kept, 300, 1100) == kept);
  auto narrower = length_filter(set, 400, 900);
  for (const auto& s : narrower) CHECK(kept.contains(s.id));
}

TEST_CASE("file round trip and missing file") {
  auto dir = testkit::scratch_dir("seqio");
  auto set = testkit::make_set({{"a", "MKT"}, {"b", "WWW"}});
  write_fasta_file(set, (dir / "x.fasta").string());
  CHECK(read_fasta_file((dir / "x.fasta").string()) == set);
  CHECK(kind_of([&] { read_fasta_file((dir / "missing.fasta").string()); }) == ErrorKind::IoError);
  std::filesystem::remove_all(dir);
}
