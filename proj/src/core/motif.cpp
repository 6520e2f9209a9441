#include "tpsfilter/motif.hpp"

#include <bit>

#include "tpsfilter/error.hpp"

namespace tpsf {

namespace {

std::uint32_t residue_bit(char c) { return 1u << (c - 'A'); }

Error syntax_error(std::string_view pattern, std::size_t pos, std::string_view what) {
  return Error(ErrorKind::SyntaxError, "'" + std::string(pattern) + "' at " +
                                           std::to_string(pos) + ": " + std::string(what));
}

void require_residue(std::string_view pattern, std::size_t pos) {
  char c = pattern[pos];
  if (c >= 'A' && c <= 'Z' && !is_canonical_residue(c)) {
    throw Error(ErrorKind::IllegalResidue,
                "'" + std::string(pattern) + "' at " + std::to_string(pos) + ": " + c);
  }
  if (!is_canonical_residue(c)) throw syntax_error(pattern, pos, "unexpected character");
}

}  // namespace

std::string_view to_string(EnzymeClass c) { return c == EnzymeClass::ClassI ? "I" : "II"; }

EnzymeClass parse_enzyme_class(std::string_view text) {
  if (text == "I" || text == "ClassI" || text == "1") return EnzymeClass::ClassI;
  if (text == "II" || text == "ClassII" || text == "2") return EnzymeClass::ClassII;
  throw Error(ErrorKind::ConfigInvalid, "unknown enzyme class '" + std::string(text) + "'");
}

bool MotifRule::matches_at(std::string_view residues, std::size_t start) const noexcept {
  if (start > residues.size() || residues.size() - start < positions.size()) return false;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (!positions[k].admits(residues[start + k])) return false;
  }
  return true;
}

std::string MotifRule::pattern() const {
  std::string out;
  for (const auto& p : positions) {
    switch (p.kind) {
      case MotifPosition::Kind::Wildcard: out += 'X'; break;
      case MotifPosition::Kind::Fixed: out += static_cast<char>('A' + std::countr_zero(p.allowed)); break;
      case MotifPosition::Kind::Alternatives:
        out += '[';
        for (int b = 0; b < 26; ++b) {
          if ((p.allowed >> b) & 1u) out += static_cast<char>('A' + b);
        }
        out += ']';
        break;
    }
  }
  return out;
}

MotifRule compile_motif(std::string_view pattern, EnzymeClass enzyme_class, std::string name) {
  MotifRule rule;
  rule.name = name.empty() ? std::string(pattern) : std::move(name);
  rule.enzyme_class = enzyme_class;

  std::size_t i = 0;
  while (i < pattern.size()) {
    char c = pattern[i];
    MotifPosition pos;
    if (c == 'X') {
      pos.kind = MotifPosition::Kind::Wildcard;
      ++i;
    } else if (c == '[') {
      std::size_t open = i++;
      pos.kind = MotifPosition::Kind::Alternatives;
      while (i < pattern.size() && pattern[i] != ']') {
        if (pattern[i] == '[') throw syntax_error(pattern, i, "nested group");
        require_residue(pattern, i);
        pos.allowed |= residue_bit(pattern[i]);
        ++i;
      }
      if (i == pattern.size()) throw syntax_error(pattern, open, "unterminated group");
      if (pos.allowed == 0) {
        throw Error(ErrorKind::EmptyAlternativeGroup,
                    "'" + std::string(pattern) + "' at " + std::to_string(open));
      }
      ++i;  // ']'
      if (std::popcount(pos.allowed) == 1) pos.kind = MotifPosition::Kind::Fixed;
    } else if (c == ']') {
      throw syntax_error(pattern, i, "unmatched ']'");
    } else {
      require_residue(pattern, i);
      pos.kind = MotifPosition::Kind::Fixed;
      pos.allowed = residue_bit(c);
      ++i;
    }
    rule.positions.push_back(pos);
  }

  if (rule.positions.size() < 3) {
    throw syntax_error(pattern, pattern.size(), "pattern needs at least 3 positions");
  }
  if (rule.positions.front().kind == MotifPosition::Kind::Wildcard) {
    throw syntax_error(pattern, 0, "leading wildcard");
  }
  if (rule.positions.back().kind == MotifPosition::Kind::Wildcard) {
    throw syntax_error(pattern, pattern.size() - 1, "trailing wildcard");
  }
  return rule;
}

std::vector<MatchSite> scan(const ProteinSequence& seq, const MotifRule& rule) {
  std::vector<MatchSite> sites;
  const std::string_view residues = seq.residues;
  const std::size_t len = rule.length();
  if (len == 0 || residues.size() < len) return sites;
  for (std::size_t start = 0; start + len <= residues.size(); ++start) {
    if (rule.matches_at(residues, start)) {
      sites.push_back({rule.name, start, std::string(residues.substr(start, len))});
    }
  }
  return sites;
}

ClassHits classify(const ProteinSequence& seq, std::span<const MotifRule> rules) {
  ClassHits hits;
  bool any1 = false, any2 = false, all1 = true, all2 = true;
  for (const auto& rule : rules) {
    RuleHits rh{rule.name, rule.enzyme_class, scan(seq, rule)};
    bool matched = !rh.sites.empty();
    if (rule.enzyme_class == EnzymeClass::ClassI) {
      any1 = true;
      all1 = all1 && matched;
    } else {
      any2 = true;
      all2 = all2 && matched;
    }
    hits.per_rule.push_back(std::move(rh));
  }
  hits.has_class1 = any1 && all1;
  hits.has_class2 = any2 && all2;
  return hits;
}

SequenceSet motif_filter(const SequenceSet& set, std::span<const MotifRule> rules) {
  if (rules.empty()) throw Error(ErrorKind::NoRulesConfigured, "motif rule list is empty");
  SequenceSet out(set.source());
  for (const auto& seq : set) {
    auto hits = classify(seq, rules);
    if (hits.has_class1 || hits.has_class2) out.add(seq);
  }
  return out;
}

std::vector<MotifRule> default_motif_rules() {
  return {
      compile_motif("DDXXD", EnzymeClass::ClassI, "DDXXD"),
      compile_motif("[ND]DXX[ST]XXXE", EnzymeClass::ClassI, "NSE/DTE"),
      compile_motif("DXDD", EnzymeClass::ClassII, "DXDD"),
  };
}

}  // namespace tpsf
