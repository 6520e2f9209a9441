#include <doctest.h>

#include <random>

#include "support/testkit.hpp"
#include "tpsfilter/align.hpp"
#include "tpsfilter/error.hpp"

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

std::string strip_gaps(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), kGapSymbol), s.end());
  return s;
}

}  // namespace

TEST_CASE("small alignments") {
  AlignParams p;
  auto a = global_align("MKT", "MKT", p);
  CHECK(a.columns == 3);
  CHECK(a.matches == 3);
  CHECK(identity("MKT", "MKT", p) == 1.0);
  auto b = global_align("MKT", "MAT", p);
  CHECK(b.columns == 3);
  CHECK(b.matches == 2);
  CHECK(identity("MKT", "MAT", p) == doctest::Approx(2.0 / 3.0));
  CHECK(identity("AAAA", "CCCC", p) == 0.0);
  auto c = global_align("MKTA", "MA", p);
  CHECK(c.aligned_query == "MKTA");
  CHECK(strip_gaps(c.aligned_target) == "MA");
}

TEST_CASE("traceback prefers diagonal, then up, then left") {
  AlignParams p;
  // "A" vs "AA": two optimal placements; the diagonal taken last pins the
  // query residue to the final target residue.
  auto a = global_align("A", "AA", p);
  CHECK(a.aligned_query == "-A");
  auto b = global_align("AA", "A", p);
  CHECK(b.aligned_target == "-A");
  auto c = global_align("AC", "CA", p);
  CHECK(c.score == -1);
  CHECK(c.aligned_query == "-AC");
  CHECK(c.aligned_target == "CA-");
}

TEST_CASE("alignment invariants on random pairs") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 60);
  AlignParams p;
  for (int i = 0; i < 300; ++i) {
    auto x = testkit::random_residues(rng, len(rng), "ACDE");
    auto y = testkit::random_residues(rng, len(rng), "ACDE");
    auto a = global_align(x, y, p);
    CHECK(a.aligned_query.size() == a.columns);
    CHECK(a.aligned_target.size() == a.columns);
    CHECK(strip_gaps(a.aligned_query) == x);
    CHECK(strip_gaps(a.aligned_target) == y);
    CHECK(a.matches <= std::min(x.size(), y.size()));
    auto s = align_stats(x, y, p);
    CHECK(s.score == a.score);
    CHECK(s.matches == a.matches);
    CHECK(s.columns == a.columns);
  }
}

TEST_CASE("enumeration oracle, every pair up to length 4 over 4 letters") {
  const std::string alpha = "ACGT";
  std::vector<std::string> words;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= 4;
    for (std::size_t code = 0; code < total; ++code) {
      std::string w(n, 'A');
      std::size_t c = code;
      for (auto& ch : w) {
        ch = alpha[c % 4];
        c /= 4;
      }
      words.push_back(w);
    }
  }
  AlignParams p;
  std::size_t bad = 0;
  for (const auto& a : words) {
    for (const auto& b : words) {
      if (a.size() + b.size() > 6) continue;
      auto o = testkit::enumerate_alignments(a, b);
      auto s = align_stats(a, b, p);
      if (o.score != s.score || o.matches != s.matches || o.columns != s.columns) ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("recursive oracle on random pairs up to length 40") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 40);
  AlignParams p;
  for (int i = 0; i < 500; ++i) {
    auto x = testkit::random_residues(rng, len(rng), i % 2 ? "ACGT" : "ACDEFGHIKLMNPQRSTVWY");
    auto y = testkit::random_residues(rng, len(rng), i % 2 ? "ACGT" : "ACDEFGHIKLMNPQRSTVWY");
    auto o = testkit::recursive_oracle(x, y);
    auto s = align_stats(x, y, p);
    CHECK(o.score == s.score);
    CHECK(o.matches == s.matches);
    CHECK(o.columns == s.columns);
  }
}

TEST_CASE("non-default scores follow the oracle") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> len(1, 25);
  AlignParams p;
  p.match = 2;
  p.mismatch = -3;
  p.gap = -2;
  for (int i = 0; i < 200; ++i) {
    auto x = testkit::random_residues(rng, len(rng), "ACGT");
    auto y = testkit::random_residues(rng, len(rng), "ACGT");
    auto o = testkit::recursive_oracle(x, y, 2, -3, -2);
    auto s = align_stats(x, y, p);
    CHECK(o.score == s.score);
    CHECK(o.matches == s.matches);
  }
}

TEST_CASE("identity is symmetric, reflexive and bounded") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(1, 80);
  AlignParams p;
  for (int i = 0; i < 1000; ++i) {
    auto x = testkit::random_residues(rng, len(rng));
    auto y = testkit::random_residues(rng, len(rng));
    double xy = identity(x, y, p);
    CHECK(xy == identity(y, x, p));
    CHECK(xy >= 0.0);
    CHECK(xy <= 1.0);
    if (i % 50 == 0) CHECK(identity(x, x, p) == 1.0);
  }
}

TEST_CASE("min-length denominator") {
  AlignParams p;
  p.denominator = IdentityDenominator::MinLength;
  CHECK(identity("MKTA", "MK", p) == 1.0);
  AlignmentStats s{0, 4, 2};
  CHECK(identity_of(s, 4, 2, IdentityDenominator::Columns) == 0.5);
  CHECK(identity_of(s, 4, 2, IdentityDenominator::MinLength) == 1.0);
}

TEST_CASE("banding") {
  std::mt19937_64 rng(6);
  AlignParams wide;
  for (int i = 0; i < 100; ++i) {
    auto x = testkit::random_residues(rng, 30);
    auto y = testkit::mutate(rng, x, 0.3, 0.1);
    AlignParams b;
    b.band = std::max(x.size(), y.size());
    auto full = align_stats(x, y, wide);
    auto banded = align_stats(x, y, b);
    CHECK(full.score == banded.score);
    CHECK(full.matches == banded.matches);
    CHECK(full.columns == banded.columns);
    CHECK(global_align(x, y, b).aligned_query == global_align(x, y, wide).aligned_query);
  }
  AlignParams narrow;
  narrow.band = 2;
  CHECK(kind_of([&] { align_stats("MKTAAAA", "MK", narrow); }) == ErrorKind::BandTooNarrow);
  CHECK(kind_of([&] { global_align("MKTAAAA", "MK", narrow); }) == ErrorKind::BandTooNarrow);
  auto in_band = align_stats("MKTAW", "MKAW", narrow);
  CHECK(in_band.matches == 4);
}

TEST_CASE("parameter validation") {
  AlignParams p;
  p.match = -1;
  CHECK(kind_of([&] { p.validate(); }) == ErrorKind::InvalidParams);
  AlignParams q;
  q.kmer_k = 13;
  CHECK(kind_of([&] { q.validate(); }) == ErrorKind::InvalidParams);
  AlignParams r;
  r.gap = 1;
  CHECK(kind_of([&] { r.validate(); }) == ErrorKind::InvalidParams);
}

TEST_CASE("max_identity") {
  AlignParams p;
  auto db = testkit::make_set({{"t2", "MKTAYIAK"}, {"t1", "MKTAYIAK"}, {"t3", "WWWWWWWW"}});
  auto r = max_identity({"q", "", "MKTAYIAK"}, db, p);
  CHECK(r.identity == 1.0);
  CHECK(r.target_id == "t1");
  CHECK(kind_of([&] { max_identity({"q", "", "MK"}, SequenceSet{}, p); }) == ErrorKind::EmptyDatabase);
}

TEST_CASE("max_identity equals a linear-scan argmax") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(20, 80);
  SequenceSet db;
  for (int i = 0; i < 60; ++i) db.add({testkit::pad_id("d", i), "", testkit::random_residues(rng, len(rng), "ACDEFG")});
  AlignParams p;
  for (int q = 0; q < 20; ++q) {
    ProteinSequence query{"q", "", testkit::random_residues(rng, len(rng), "ACDEFG")};
    double best = -1;
    std::string best_id;
    for (const auto& t : db) {
      double v = identity(query.residues, t.residues, p);
      if (v > best || (v == best && t.id < best_id)) {
        best = v;
        best_id = t.id;
      }
    }
    auto r = max_identity(query, db, p);
    CHECK(r.identity == best);
    CHECK(r.target_id == best_id);
  }
}

TEST_CASE("batch results do not depend on thread count") {
  std::mt19937_64 rng(10);
  SequenceSet db, queries;
  for (int i = 0; i < 80; ++i) db.add({testkit::pad_id("d", i), "", testkit::random_residues(rng, 60)});
  for (int i = 0; i < 16; ++i) queries.add({testkit::pad_id("q", i), "", testkit::mutate(rng, db[i * 3].residues, 0.4)});
  AlignParams p;
  auto one = max_identity_batch(queries, db, p, 1);
  auto four = max_identity_batch(queries, db, p, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].target_id == four[i].target_id);
    CHECK(one[i].identity == four[i].identity);
  }
}

TEST_CASE("k-mer prefilter") {
  auto kmers = KmerIndex::distinct_kmers("AAAAAAA", 5);
  CHECK(kmers.size() == 1);
  CHECK(KmerIndex::distinct_kmers("MKXTAYIAK", 5).size() == 2);
  auto db = testkit::make_set({{"a", "MKTAYIAKQR"}, {"b", "WWWWWWWWWW"}});
  KmerIndex idx(db, 5);
  auto counts = idx.shared_counts("MKTAYIAKQR");
  CHECK(counts[0] == 6);
  CHECK(counts[1] == 0);

  AlignParams p;
  p.prefilter = true;
  auto r = max_identity({"q", "", "MKTAYIAKQR"}, db, p, &idx);
  CHECK(r.target_id == "a");
  CHECK(r.skipped == 1);
  auto none = max_identity({"q", "", "CCCCCCCCCC"}, db, p, &idx);
  CHECK_FALSE(none.has_target());
  CHECK(none.identity == 0.0);
  CHECK(none.skipped == 2);
}

TEST_CASE("prefilter agrees with exact search when the best hit shares a k-mer") {
  std::mt19937_64 rng(21);
  SequenceSet db;
  for (int i = 0; i < 1000; ++i) db.add({testkit::pad_id("d", i), "", testkit::random_residues(rng, 120)});
  AlignParams exact, fast;
  fast.prefilter = true;
  KmerIndex idx(db, fast.kmer_k);
  std::size_t agree = 0, eligible = 0;
  for (int q = 0; q < 10; ++q) {
    ProteinSequence query{"q", "", testkit::mutate(rng, db[q * 97].residues, 0.25, 0.02)};
    auto e = max_identity(query, db, exact);
    auto f = max_identity(query, db, fast, &idx);
    auto shared = idx.shared_counts(query.residues);
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < db.size(); ++i)
      if (db[i].id == e.target_id) best_index = i;
    if (shared[best_index] >= 1) {
      ++eligible;
      if (e.target_id == f.target_id && e.identity == f.identity) ++agree;
    }
  }
  CHECK(eligible > 0);
  CHECK(agree == eligible);
}

TEST_CASE("identity_screen removes strictly above the threshold") {
  AlignParams p;
  // 5 residues: one substitution gives exactly 0.8.
  auto set = testkit::make_set({{"same", "MKTAW"}, {"eighty", "MKTAY"}, {"far", "CCCCC"}});
  auto block = testkit::make_set({{"b1", "MKTAW"}});
  auto r = identity_screen(set, block, 0.80, p);
  REQUIRE(r.kept.size() == 2);
  CHECK(r.kept[0].id == "eighty");
  CHECK(r.kept[1].id == "far");
  REQUIRE(r.removed.size() == 1);
  CHECK(r.removed[0].query_id == "same");

  auto pass = identity_screen(set, SequenceSet{}, 0.8, p, false);
  CHECK(pass.kept.size() == 3);
  CHECK_FALSE(pass.warnings.empty());
  CHECK(kind_of([&] { identity_screen(set, SequenceSet{}, 0.8, p, true); }) == ErrorKind::EmptyDatabase);
  CHECK(kind_of([&] { identity_screen(set, block, 0.0, p); }) == ErrorKind::InvalidParams);
}

TEST_CASE("identity_screen equals a brute-force screen") {
  std::mt19937_64 rng(31);
  SequenceSet set, block;
  for (int i = 0; i < 20; ++i) block.add({testkit::pad_id("b", i), "", testkit::random_residues(rng, 50, "ACDEF")});
  for (int i = 0; i < 60; ++i) {
    auto base = block[i % 20].residues;
    set.add({testkit::pad_id("s", i), "", testkit::mutate(rng, base, (i % 6) * 0.1, 0.02, "ACDEF")});
  }
  AlignParams p;
  auto r = identity_screen(set, block, 0.6, p, false, 2);
  std::vector<std::string> expect;
  for (const auto& s : set) {
    double best = 0;
    for (const auto& b : block) best = std::max(best, identity(s.residues, b.residues, p));
    if (!(best > 0.6)) expect.push_back(s.id);
  }
  std::vector<std::string> got;
  for (const auto& s : r.kept) got.push_back(s.id);
  CHECK(got == expect);
}
