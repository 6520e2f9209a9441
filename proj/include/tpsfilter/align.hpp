#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpsfilter/seqio.hpp"

namespace tpsf {

enum class IdentityDenominator {
  Columns,    // matches / alignment columns (gapped columns counted)
  MinLength,  // matches / min(|a|, |b|)
};

struct AlignParams {
  int match = 1;
  int mismatch = -1;
  int gap = -1;  // per gap column, linear
  bool prefilter = false;
  int kmer_k = 5;
  int min_shared_kmers = 1;
  std::optional<std::size_t> band;  // half-width around the main diagonal
  IdentityDenominator denominator = IdentityDenominator::Columns;

  // Throws InvalidParams.
  void validate() const;
};

struct Alignment {
  std::string aligned_query;
  std::string aligned_target;
  std::size_t columns = 0;
  std::size_t matches = 0;
  long score = 0;
};

// Score plus path statistics of the canonical (tie-broken) optimal alignment,
// without materializing the aligned strings.
struct AlignmentStats {
  long score = 0;
  std::size_t columns = 0;
  std::size_t matches = 0;
};

struct IdentityResult {
  std::string query_id;
  std::string target_id;  // empty when no target was aligned
  double identity = 0.0;
  std::size_t columns = 0;
  std::size_t matches = 0;
  std::size_t skipped = 0;  // db entries dropped by the k-mer prefilter

  bool has_target() const noexcept { return !target_id.empty(); }
};

inline constexpr char kGapSymbol = '-';

// Optimal global alignment under linear-gap scoring. Traceback prefers the
// diagonal, then up (query residue against a gap), then left.
Alignment global_align(std::string_view query, std::string_view target, const AlignParams& p);
Alignment global_align(const ProteinSequence& a, const ProteinSequence& b, const AlignParams& p);

// Same path as global_align, linear memory.
AlignmentStats align_stats(std::string_view query, std::string_view target, const AlignParams& p);

// Stats behind identity(): the lexicographically smaller residue string is
// aligned as the query, so the tie-broken path and identity(a, b) do not
// depend on argument order.
AlignmentStats identity_stats(std::string_view a, std::string_view b, const AlignParams& p);

double identity_of(const AlignmentStats& stats, std::size_t len_a, std::size_t len_b,
                   IdentityDenominator denominator);

double identity(std::string_view a, std::string_view b, const AlignParams& p);
double identity(const ProteinSequence& a, const ProteinSequence& b, const AlignParams& p);

// Inverted index of distinct k-mers per database entry. k-mers containing a
// non-canonical residue are ignored.
class KmerIndex {
 public:
  KmerIndex(const SequenceSet& db, int k);

  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return db_size_; }

  // Distinct k-mers shared between the query and each db entry.
  std::vector<std::uint32_t> shared_counts(std::string_view query) const;

  static std::vector<std::uint64_t> distinct_kmers(std::string_view residues, int k);

 private:
  int k_;
  std::size_t db_size_;
  std::vector<std::uint64_t> keys_;       // sorted distinct k-mers
  std::vector<std::uint32_t> offsets_;    // CSR offsets into postings_, size keys_+1
  std::vector<std::uint32_t> postings_;   // db indices
};

// Best identity over db; ties go to the lexicographically smallest target id.
// With prefilter on, entries sharing fewer than min_shared_kmers k-mers are
// skipped; if every entry is skipped the result carries no target and identity 0.
IdentityResult max_identity(const ProteinSequence& query, const SequenceSet& db,
                            const AlignParams& p, const KmerIndex* index = nullptr);

std::vector<IdentityResult> max_identity_batch(const SequenceSet& queries, const SequenceSet& db,
                                               const AlignParams& p, unsigned threads = 1);

struct ScreenResult {
  SequenceSet kept;
  std::vector<IdentityResult> removed;
  std::vector<std::string> warnings;
};

// Drops sequences whose max identity to the blocklist is strictly greater than
// threshold. An empty blocklist throws EmptyDatabase when strict, else passes
// everything through with a warning.
ScreenResult identity_screen(const SequenceSet& set, const SequenceSet& blocklist,
                             double threshold, const AlignParams& p, bool strict = false,
                             unsigned threads = 1);

}  // namespace tpsf
