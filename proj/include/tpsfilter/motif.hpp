#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpsfilter/seqio.hpp"

namespace tpsf {

enum class EnzymeClass { ClassI, ClassII };

std::string_view to_string(EnzymeClass c);
EnzymeClass parse_enzyme_class(std::string_view text);

// One pattern position. Residues are a bitmask over 'A'..'Z'.
struct MotifPosition {
  enum class Kind { Fixed, Wildcard, Alternatives };

  Kind kind = Kind::Wildcard;
  std::uint32_t allowed = 0;

  bool admits(char residue) const noexcept {
    if (kind == Kind::Wildcard) return true;
    if (residue < 'A' || residue > 'Z') return false;
    return (allowed >> (residue - 'A')) & 1u;
  }
};

struct MotifRule {
  std::string name;
  std::vector<MotifPosition> positions;
  EnzymeClass enzyme_class = EnzymeClass::ClassI;

  std::size_t length() const noexcept { return positions.size(); }
  bool matches_at(std::string_view residues, std::size_t start) const noexcept;
  // Re-renders the pattern in compile_motif syntax.
  std::string pattern() const;
};

struct MatchSite {
  std::string rule_name;
  std::size_t start = 0;
  std::string matched;

  bool operator==(const MatchSite&) const = default;
};

struct RuleHits {
  std::string rule_name;
  EnzymeClass enzyme_class = EnzymeClass::ClassI;
  std::vector<MatchSite> sites;
};

struct ClassHits {
  std::vector<RuleHits> per_rule;
  bool has_class1 = false;
  bool has_class2 = false;
};

// Pattern language: uppercase letters are fixed residues, 'X' is a wildcard,
// "[ND]" lists alternatives. At least three positions; no wildcard at either end.
// The name defaults to the pattern text.
MotifRule compile_motif(std::string_view pattern, EnzymeClass enzyme_class,
                        std::string name = {});

// All match offsets, overlapping, ascending.
std::vector<MatchSite> scan(const ProteinSequence& seq, const MotifRule& rule);

// A class flag is set iff the class has at least one rule and every one of its
// rules matches somewhere.
ClassHits classify(const ProteinSequence& seq, std::span<const MotifRule> rules);

// Keeps sequences with has_class1 || has_class2. Throws NoRulesConfigured on an
// empty rule list.
SequenceSet motif_filter(const SequenceSet& set, std::span<const MotifRule> rules);

// DDXXD + NSE/DTE for Class I, DXDD for Class II.
std::vector<MotifRule> default_motif_rules();

}  // namespace tpsf
