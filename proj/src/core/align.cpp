#include "tpsfilter/align.hpp"

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <numeric>

#include "tpsfilter/error.hpp"
#include "tpsfilter/parallel.hpp"

namespace tpsf {

namespace {

constexpr long kNegInf = LONG_MIN / 4;

enum Dir : std::uint8_t { kDiag = 0, kUp = 1, kLeft = 2, kNone = 3 };

void require_nonempty(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySequence, "cannot align an empty sequence");
}

std::size_t band_width(const AlignParams& p, std::size_t n, std::size_t m) {
  if (!p.band) return std::max(n, m);
  std::size_t w = *p.band;
  std::size_t diff = n > m ? n - m : m - n;
  if (diff > w) {
    throw Error(ErrorKind::BandTooNarrow, "length difference " + std::to_string(diff) +
                                              " exceeds band " + std::to_string(w));
  }
  return w;
}

// Packed path statistics: high 32 bits count identical columns, low 32 bits
// count diagonal columns.
constexpr std::uint64_t kDiagStep = 1;
constexpr std::uint64_t kMatchStep = (std::uint64_t{1} << 32) + 1;

// Exact comparison of a/b against c/d for non-negative integers.
int compare_fraction(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  unsigned __int128 lhs = static_cast<unsigned __int128>(a) * d;
  unsigned __int128 rhs = static_cast<unsigned __int128>(c) * b;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

std::size_t identity_denominator(const AlignmentStats& s, std::size_t la, std::size_t lb,
                                 IdentityDenominator d) {
  return d == IdentityDenominator::Columns ? s.columns : std::min(la, lb);
}

}  // namespace

void AlignParams::validate() const {
  if (!(match > mismatch)) throw Error(ErrorKind::InvalidParams, "match must exceed mismatch");
  if (!(gap < match)) throw Error(ErrorKind::InvalidParams, "gap must be below match");
  if (kmer_k < 1 || kmer_k > 12) throw Error(ErrorKind::InvalidParams, "kmer_k must be in [1, 12]");
  if (min_shared_kmers < 0) throw Error(ErrorKind::InvalidParams, "min_shared_kmers must be >= 0");
}

Alignment global_align(std::string_view q, std::string_view t, const AlignParams& p) {
  require_nonempty(q, t);
  p.validate();
  const std::size_t n = q.size(), m = t.size();
  const std::size_t w = band_width(p, n, m);
  const std::size_t cols = m + 1;

  std::vector<std::uint8_t> dir((n + 1) * cols, kNone);
  std::vector<long> prev(cols, kNegInf), cur(cols, kNegInf);

  prev[0] = 0;
  for (std::size_t j = 1; j <= m && j <= w; ++j) {
    prev[j] = static_cast<long>(j) * p.gap;
    dir[j] = kLeft;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), kNegInf);
    const std::size_t jlo = i > w ? i - w : 0;
    const std::size_t jhi = std::min(m, i + w);
    if (jlo == 0) {
      cur[0] = static_cast<long>(i) * p.gap;
      dir[i * cols] = kUp;
    }
    for (std::size_t j = std::max<std::size_t>(jlo, 1); j <= jhi; ++j) {
      long best = kNegInf;
      std::uint8_t d = kNone;
      if (prev[j - 1] > kNegInf) {
        best = prev[j - 1] + (q[i - 1] == t[j - 1] ? p.match : p.mismatch);
        d = kDiag;
      }
      if (prev[j] > kNegInf && prev[j] + p.gap > best) {
        best = prev[j] + p.gap;
        d = kUp;
      }
      if (cur[j - 1] > kNegInf && cur[j - 1] + p.gap > best) {
        best = cur[j - 1] + p.gap;
        d = kLeft;
      }
      cur[j] = best;
      dir[i * cols + j] = d;
    }
    std::swap(prev, cur);
  }

  Alignment aln;
  aln.score = prev[m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    switch (dir[i * cols + j]) {
      case kDiag:
        aln.aligned_query.push_back(q[i - 1]);
        aln.aligned_target.push_back(t[j - 1]);
        if (q[i - 1] == t[j - 1]) ++aln.matches;
        --i;
        --j;
        break;
      case kUp:
        aln.aligned_query.push_back(q[i - 1]);
        aln.aligned_target.push_back(kGapSymbol);
        --i;
        break;
      case kLeft:
        aln.aligned_query.push_back(kGapSymbol);
        aln.aligned_target.push_back(t[j - 1]);
        --j;
        break;
      default:
        throw Error(ErrorKind::BandTooNarrow, "traceback left the band");
    }
  }
  std::reverse(aln.aligned_query.begin(), aln.aligned_query.end());
  std::reverse(aln.aligned_target.begin(), aln.aligned_target.end());
  aln.columns = aln.aligned_query.size();
  return aln;
}

Alignment global_align(const ProteinSequence& a, const ProteinSequence& b, const AlignParams& p) {
  return global_align(std::string_view(a.residues), std::string_view(b.residues), p);
}

namespace {

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
__attribute__((target_clones("avx2", "default")))
#endif
void antidiagonal(std::size_t ilo, std::size_t ihi, const char* __restrict qp, const char* __restrict rk,
                  std::int32_t* __restrict h0, std::int32_t* __restrict m0, std::int32_t* __restrict d0,
                  const std::int32_t* __restrict h1, const std::int32_t* __restrict m1,
                  const std::int32_t* __restrict d1, const std::int32_t* __restrict h2,
                  const std::int32_t* __restrict m2, const std::int32_t* __restrict d2, std::int32_t match,
                  std::int32_t mismatch, std::int32_t gap) {
  // qp and rk start at the residues of cell ilo. Selections are written as
  // masks so the loop has no branches.
  const std::int32_t delta = match - mismatch;
  const std::size_t len = ihi - ilo + 1;
  h0 += ilo, m0 += ilo, d0 += ilo, h1 += ilo, m1 += ilo, d1 += ilo, h2 += ilo, m2 += ilo, d2 += ilo;
  for (std::size_t x = 0; x < len; ++x) {
    const std::int32_t eq = static_cast<std::int32_t>(qp[x] == rk[x]);
    const std::int32_t diag_h = h2[x - 1] + mismatch + eq * delta, diag_m = m2[x - 1] + eq, diag_d = d2[x - 1] + 1;
    const std::int32_t up_h = h1[x - 1] + gap, up_m = m1[x - 1], up_d = d1[x - 1];
    const std::int32_t left_h = h1[x] + gap, left_m = m1[x], left_d = d1[x];
    const std::int32_t u = -static_cast<std::int32_t>(up_h > diag_h);
    const std::int32_t best = (up_h & u) | (diag_h & ~u);
    const std::int32_t bm = (up_m & u) | (diag_m & ~u);
    const std::int32_t bd = (up_d & u) | (diag_d & ~u);
    const std::int32_t l = -static_cast<std::int32_t>(left_h > best);
    h0[x] = (left_h & l) | (best & ~l);
    m0[x] = (left_m & l) | (bm & ~l);
    d0[x] = (left_d & l) | (bd & ~l);
  }
}

// Unbanded align_stats over anti-diagonals. Cells on one anti-diagonal are
// independent, so the inner loop vectorizes; ties resolve as in the row form.
AlignmentStats full_stats(std::string_view q, std::string_view t, const AlignParams& p) {
  const std::size_t n = q.size(), m = t.size();
  if (n + m > std::size_t{1} << 30) throw Error(ErrorKind::InvalidParams, "sequences too long");
  std::string rt(t.rbegin(), t.rend());
  std::vector<std::int32_t> buf(9 * (n + 1), 0);
  std::int32_t* h[3] = {buf.data(), buf.data() + (n + 1), buf.data() + 2 * (n + 1)};
  std::int32_t* mt[3] = {h[2] + (n + 1), h[2] + 2 * (n + 1), h[2] + 3 * (n + 1)};
  std::int32_t* dg[3] = {mt[2] + (n + 1), mt[2] + 2 * (n + 1), mt[2] + 3 * (n + 1)};
  const std::int32_t gap = p.gap, match = p.match, mismatch = p.mismatch;
  const char* qp = q.data();
  const char* rp = rt.data();

  for (std::size_t k = 0; k <= n + m; ++k) {
    if (k <= m) {
      h[0][0] = static_cast<std::int32_t>(k) * gap;
      mt[0][0] = dg[0][0] = 0;
    }
    if (k <= n) {
      h[0][k] = static_cast<std::int32_t>(k) * gap;
      mt[0][k] = dg[0][k] = 0;
    }
    const std::size_t ilo = k > m ? std::max<std::size_t>(1, k - m) : 1;
    const std::size_t ihi = std::min(n, k == 0 ? 0 : k - 1);
    // t[j - 1] with j = k - i is rt[m - k + i].
    if (ilo <= ihi) {
      antidiagonal(ilo, ihi, qp + (ilo - 1), rp + (m + ilo - k), h[0], mt[0], dg[0], h[1], mt[1], dg[1],
                   h[2], mt[2], dg[2], match, mismatch, gap);
    }
    std::rotate(h, h + 2, h + 3);
    std::rotate(mt, mt + 2, mt + 3);
    std::rotate(dg, dg + 2, dg + 3);
  }
  // After the last rotation the final anti-diagonal sits in slot 1.
  AlignmentStats out;
  out.score = h[1][n];
  out.matches = static_cast<std::size_t>(mt[1][n]);
  out.columns = n + m - static_cast<std::size_t>(dg[1][n]);
  return out;
}

}  // namespace

AlignmentStats align_stats(std::string_view q, std::string_view t, const AlignParams& p) {
  require_nonempty(q, t);
  const std::size_t n = q.size(), m = t.size();
  const std::size_t w = band_width(p, n, m);
  if (w >= std::max(n, m)) return full_stats(q, t, p);

  // The traceback from any cell depends only on that cell's choice and the
  // traceback of its predecessor, so path statistics propagate forward.
  std::vector<long> prev_h(m + 1, kNegInf), cur_h(m + 1, kNegInf);
  std::vector<std::uint64_t> prev_s(m + 1, 0), cur_s(m + 1, 0);
  const long match = p.match, mismatch = p.mismatch, gap = p.gap;

  prev_h[0] = 0;
  for (std::size_t j = 1; j <= m && j <= w; ++j) prev_h[j] = static_cast<long>(j) * gap;

  const bool banded = w < std::max(n, m);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t jlo = i > w ? i - w : 0;
    const std::size_t jhi = std::min(m, i + w);
    if (banded) {
      std::fill(cur_h.begin(), cur_h.end(), kNegInf);
    }
    if (jlo == 0) {
      cur_h[0] = static_cast<long>(i) * gap;
      cur_s[0] = 0;
    }
    const char qi = q[i - 1];
    const long* ph = prev_h.data();
    const std::uint64_t* ps = prev_s.data();
    long* ch = cur_h.data();
    std::uint64_t* cs = cur_s.data();
    long left_h = ch[std::max<std::size_t>(jlo, 1) - 1];
    std::uint64_t left_s = cs[std::max<std::size_t>(jlo, 1) - 1];
    for (std::size_t j = std::max<std::size_t>(jlo, 1); j <= jhi; ++j) {
      const bool eq = qi == t[j - 1];
      long best = ph[j - 1] + (eq ? match : mismatch);
      std::uint64_t stats = ps[j - 1] + (eq ? kMatchStep : kDiagStep);
      if (ph[j - 1] <= kNegInf) best = kNegInf;
      const long up = ph[j] + gap;
      if (ph[j] > kNegInf && up > best) {
        best = up;
        stats = ps[j];
      }
      const long left = left_h + gap;
      if (left_h > kNegInf && left > best) {
        best = left;
        stats = left_s;
      }
      ch[j] = best;
      cs[j] = stats;
      left_h = best;
      left_s = stats;
    }
    std::swap(prev_h, cur_h);
    std::swap(prev_s, cur_s);
  }

  AlignmentStats out;
  out.score = prev_h[m];
  const std::uint64_t s = prev_s[m];
  out.matches = static_cast<std::size_t>(s >> 32);
  const std::size_t diag = static_cast<std::size_t>(s & 0xffffffffu);
  out.columns = n + m - diag;
  return out;
}

double identity_of(const AlignmentStats& stats, std::size_t len_a, std::size_t len_b,
                   IdentityDenominator denominator) {
  std::size_t denom = identity_denominator(stats, len_a, len_b, denominator);
  return denom == 0 ? 0.0 : static_cast<double>(stats.matches) / static_cast<double>(denom);
}

AlignmentStats identity_stats(std::string_view a, std::string_view b, const AlignParams& p) {
  return b < a ? align_stats(b, a, p) : align_stats(a, b, p);
}

double identity(std::string_view a, std::string_view b, const AlignParams& p) {
  p.validate();
  return identity_of(identity_stats(a, b, p), a.size(), b.size(), p.denominator);
}

double identity(const ProteinSequence& a, const ProteinSequence& b, const AlignParams& p) {
  return identity(std::string_view(a.residues), std::string_view(b.residues), p);
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> KmerIndex::distinct_kmers(std::string_view residues, int k) {
  std::vector<std::uint64_t> out;
  const std::size_t kk = static_cast<std::size_t>(k);
  if (k < 1 || residues.size() < kk) return out;
  out.reserve(residues.size() - kk + 1);
  const std::uint64_t mask = (std::uint64_t{1} << (5 * k)) - 1;
  std::uint64_t code = 0;
  std::size_t valid = 0;  // length of the current run of canonical residues
  for (char c : residues) {
    if (!is_canonical_residue(c)) {
      valid = 0;
      code = 0;
      continue;
    }
    code = ((code << 5) | static_cast<std::uint64_t>(c - 'A')) & mask;
    if (++valid >= kk) out.push_back(code);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

KmerIndex::KmerIndex(const SequenceSet& db, int k) : k_(k), db_size_(db.size()) {
  if (k < 1 || k > 12) throw Error(ErrorKind::InvalidParams, "kmer_k must be in [1, 12]");
  std::vector<std::pair<std::uint64_t, std::uint32_t>> pairs;
  for (std::size_t idx = 0; idx < db.size(); ++idx) {
    for (auto kmer : distinct_kmers(db[idx].residues, k)) {
      pairs.emplace_back(kmer, static_cast<std::uint32_t>(idx));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  postings_.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0 || pairs[i].first != pairs[i - 1].first) {
      keys_.push_back(pairs[i].first);
      offsets_.push_back(static_cast<std::uint32_t>(postings_.size()));
    }
    postings_.push_back(pairs[i].second);
  }
  offsets_.push_back(static_cast<std::uint32_t>(postings_.size()));
}

std::vector<std::uint32_t> KmerIndex::shared_counts(std::string_view query) const {
  std::vector<std::uint32_t> counts(db_size_, 0);
  for (auto kmer : distinct_kmers(query, k_)) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), kmer);
    if (it == keys_.end() || *it != kmer) continue;
    const std::size_t slot = static_cast<std::size_t>(it - keys_.begin());
    for (std::uint32_t o = offsets_[slot]; o < offsets_[slot + 1]; ++o) ++counts[postings_[o]];
  }
  return counts;
}

// ---------------------------------------------------------------------------

IdentityResult max_identity(const ProteinSequence& query, const SequenceSet& db,
                            const AlignParams& p, const KmerIndex* index) {
  if (db.empty()) throw Error(ErrorKind::EmptyDatabase, "max_identity against empty database");
  p.validate();

  std::vector<std::size_t> order;
  order.reserve(db.size());
  IdentityResult result;
  result.query_id = query.id;

  if (p.prefilter) {
    std::optional<KmerIndex> local;
    if (index == nullptr || index->k() != p.kmer_k || index->size() != db.size()) {
      local.emplace(db, p.kmer_k);
      index = &*local;
    }
    auto counts = index->shared_counts(query.residues);
    for (std::size_t i = 0; i < db.size(); ++i) {
      if (counts[i] >= static_cast<std::uint32_t>(p.min_shared_kmers)) order.push_back(i);
    }
    result.skipped = db.size() - order.size();
    // Strong candidates first so the length bound prunes more.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  } else {
    order.resize(db.size());
    std::iota(order.begin(), order.end(), 0);
  }

  const std::size_t qlen = query.residues.size();
  bool have_best = false;
  std::size_t best_num = 0, best_den = 1;
  for (std::size_t idx : order) {
    const auto& target = db[idx];
    const std::size_t tlen = target.residues.size();
    if (have_best && p.denominator == IdentityDenominator::Columns) {
      // columns >= max(len) and matches <= min(len).
      if (compare_fraction(std::min(qlen, tlen), std::max(qlen, tlen), best_num, best_den) < 0) {
        continue;
      }
    }
    AlignmentStats stats = identity_stats(query.residues, target.residues, p);
    std::size_t den = identity_denominator(stats, qlen, tlen, p.denominator);
    int cmp = have_best ? compare_fraction(stats.matches, den, best_num, best_den) : 1;
    if (cmp > 0 || (cmp == 0 && target.id < result.target_id)) {
      have_best = true;
      best_num = stats.matches;
      best_den = den;
      result.target_id = target.id;
      result.columns = stats.columns;
      result.matches = stats.matches;
      result.identity = den == 0 ? 0.0 : static_cast<double>(stats.matches) / static_cast<double>(den);
    }
  }
  return result;
}

std::vector<IdentityResult> max_identity_batch(const SequenceSet& queries, const SequenceSet& db,
                                               const AlignParams& p, unsigned threads) {
  if (db.empty()) throw Error(ErrorKind::EmptyDatabase, "max_identity against empty database");
  p.validate();
  std::optional<KmerIndex> index;
  if (p.prefilter) index.emplace(db, p.kmer_k);
  std::vector<IdentityResult> results(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    results[i] = max_identity(queries[i], db, p, index ? &*index : nullptr);
  });
  return results;
}

ScreenResult identity_screen(const SequenceSet& set, const SequenceSet& blocklist,
                             double threshold, const AlignParams& p, bool strict,
                             unsigned threads) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "screen threshold must be in (0, 1]");
  }
  ScreenResult out;
  out.kept.set_source(set.source());
  if (blocklist.empty()) {
    if (strict) throw Error(ErrorKind::EmptyDatabase, "identity screen blocklist is empty");
    out.warnings.push_back("identity screen blocklist is empty; all sequences pass");
    for (const auto& seq : set) out.kept.add(seq);
    return out;
  }
  auto hits = max_identity_batch(set, blocklist, p, threads);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (hits[i].has_target() && hits[i].identity > threshold) {
      out.removed.push_back(std::move(hits[i]));
    } else {
      out.kept.add(set[i]);
    }
  }
  return out;
}

}  // namespace tpsf
