#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tpsf {

// Strict admits the 20 canonical amino acids; Lenient also admits X.
enum class AlphabetMode { Strict, Lenient };

inline constexpr std::string_view kCanonicalResidues = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kMaxHeaderBytes = std::size_t{1} << 20;
inline constexpr std::size_t kUnboundedLength = std::numeric_limits<std::size_t>::max();

bool is_canonical_residue(char c) noexcept;
bool is_allowed_residue(char c, AlphabetMode mode) noexcept;

struct ProteinSequence {
  std::string id;
  std::string description;
  std::string residues;

  std::size_t length() const noexcept { return residues.size(); }
  bool operator==(const ProteinSequence&) const = default;
};

// Ordered collection with unique ids. Iteration order is insertion order.
class SequenceSet {
 public:
  SequenceSet() = default;
  explicit SequenceSet(std::string source) : source_(std::move(source)) {}

  // Throws Error{DuplicateId} if the id is already present.
  void add(ProteinSequence seq);

  const std::vector<ProteinSequence>& sequences() const noexcept { return seqs_; }
  std::size_t size() const noexcept { return seqs_.size(); }
  bool empty() const noexcept { return seqs_.empty(); }
  const ProteinSequence& operator[](std::size_t i) const { return seqs_[i]; }
  auto begin() const noexcept { return seqs_.begin(); }
  auto end() const noexcept { return seqs_.end(); }

  const ProteinSequence* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  const std::string& source() const noexcept { return source_; }
  void set_source(std::string source) { source_ = std::move(source); }

  // Sequences only; the source label is not part of equality.
  bool operator==(const SequenceSet& other) const { return seqs_ == other.seqs_; }

 private:
  std::vector<ProteinSequence> seqs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string source_;
};

SequenceSet parse_fasta(std::string_view text, AlphabetMode mode = AlphabetMode::Strict,
                        std::string source = {});
SequenceSet read_fasta_file(const std::string& path, AlphabetMode mode = AlphabetMode::Strict);

std::string write_fasta(const SequenceSet& set, std::size_t wrap = 60);
void write_fasta_file(const SequenceSet& set, const std::string& path, std::size_t wrap = 60);

// Keeps sequences with min_len <= length <= max_len. Throws InvalidRange when
// min_len > max_len or min_len == 0.
SequenceSet length_filter(const SequenceSet& set, std::size_t min_len,
                          std::size_t max_len = kUnboundedLength);

// Shared by the file-reading entry points of every module.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace tpsf
