#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "text_util.hpp"
#include "tpsfilter/error.hpp"
#include "tpsfilter/seqio.hpp"
#include "tpsfilter/toolio.hpp"

namespace tpsf {

namespace {

// Correctly rounded sum (Shewchuk partials, as in Python's math.fsum).
double exact_sum(std::span<const double> values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      double hi = x + y;
      double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  std::size_t n = partials.size();
  double hi = 0.0, lo = 0.0;
  if (n > 0) {
    hi = partials[--n];
    while (n > 0) {
      double x = hi;
      double y = partials[--n];
      hi = x + y;
      double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // Round half-even across the remaining partials.
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
      double y = lo * 2.0;
      double x = hi + y;
      if (y == x - hi) hi = x;
    }
  }
  return hi;
}

double mean_clamped(const std::vector<double>& v) {
  double mean = exact_sum(v) / static_cast<double>(v.size());
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return std::clamp(mean, *lo, *hi);
}

std::string record_context(std::size_t line_no, const std::string& id) {
  return detail::line_ref(line_no) + (id.empty() ? "" : " (" + id + ")");
}

}  // namespace

double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty()) throw Error(ErrorKind::EmptyInput, "perplexity of an empty logprob list");
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    if (!std::isfinite(logprobs[i])) {
      throw Error(ErrorKind::SchemaError, "non-finite logprob at index " + std::to_string(i));
    }
    if (logprobs[i] > 0.0) {
      throw Error(ErrorKind::LogprobPositive, "logprob at index " + std::to_string(i) + " is positive");
    }
  }
  double mean = exact_sum(logprobs) / static_cast<double>(logprobs.size());
  return std::exp(-mean);
}

std::vector<ScoredSequence> parse_generation_records(std::string_view text) {
  using nlohmann::json;
  std::vector<ScoredSequence> out;
  std::set<std::string> seen;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (detail::trim(line).empty()) return;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaError, detail::line_ref(line_no) + ": " + e.what());
    }
    auto schema = [&](const std::string& what) {
      return Error(ErrorKind::SchemaError, detail::line_ref(line_no) + ": " + what);
    };
    if (!rec.is_object()) throw schema("record is not an object");
    auto id_it = rec.find("id");
    auto seq_it = rec.find("sequence");
    auto lp_it = rec.find("token_logprobs");
    if (id_it == rec.end() || !id_it->is_string()) throw schema("missing string field 'id'");
    if (seq_it == rec.end() || !seq_it->is_string()) throw schema("missing string field 'sequence'");
    if (lp_it == rec.end() || !lp_it->is_array()) throw schema("missing array field 'token_logprobs'");

    ScoredSequence s;
    s.id = id_it->get<std::string>();
    if (s.id.empty() || std::any_of(s.id.begin(), s.id.end(), [](char c) { return detail::is_space(c); })) {
      throw schema("id must be a non-empty token");
    }
    if (!seen.insert(s.id).second) throw Error(ErrorKind::DuplicateId, record_context(line_no, s.id));

    for (char raw : seq_it->get_ref<const std::string&>()) {
      char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      if (!is_canonical_residue(c)) {
        throw Error(ErrorKind::IllegalResidue, record_context(line_no, s.id) + " position " +
                                                   std::to_string(s.residues.size()));
      }
      s.residues.push_back(c);
    }
    if (s.residues.empty()) throw Error(ErrorKind::EmptySequence, record_context(line_no, s.id));

    const auto& lps = *lp_it;
    if (lps.empty()) throw schema("token_logprobs is empty");
    s.token_logprobs.reserve(lps.size());
    for (std::size_t i = 0; i < lps.size(); ++i) {
      if (!lps[i].is_number()) throw schema("token_logprobs[" + std::to_string(i) + "] is not a number");
      double v = lps[i].get<double>();
      if (!std::isfinite(v)) throw schema("token_logprobs[" + std::to_string(i) + "] is not finite");
      if (v > 0.0) {
        throw Error(ErrorKind::LogprobPositive,
                    record_context(line_no, s.id) + " index " + std::to_string(i));
      }
      s.token_logprobs.push_back(v);
    }

    std::string tokenization = "residue";
    if (auto t = rec.find("tokenization"); t != rec.end()) {
      if (!t->is_string()) throw schema("'tokenization' must be a string");
      tokenization = t->get<std::string>();
      if (tokenization != "residue" && tokenization != "subword") {
        throw schema("unknown tokenization '" + tokenization + "'");
      }
    }
    if (auto tc = rec.find("token_count"); tc != rec.end()) {
      if (!tc->is_number_unsigned()) throw schema("'token_count' must be a non-negative integer");
      if (tc->get<std::size_t>() != s.token_logprobs.size()) {
        throw Error(ErrorKind::LengthMismatch, s.id + ": token_count " + std::to_string(tc->get<std::size_t>()) +
                                                   " vs " + std::to_string(s.token_logprobs.size()) + " logprobs");
      }
    }
    if (tokenization == "residue" && s.token_logprobs.size() != s.residues.size()) {
      throw Error(ErrorKind::LengthMismatch, s.id + ": " + std::to_string(s.token_logprobs.size()) +
                                                 " logprobs for " + std::to_string(s.residues.size()) +
                                                 " residues");
    }
    if (auto rp = rec.find("perplexity"); rp != rec.end() && !rp->is_null()) {
      if (!rp->is_number()) throw schema("'perplexity' must be a number");
      s.reported_perplexity = rp->get<double>();
    }
    s.perplexity = perplexity(s.token_logprobs);
    out.push_back(std::move(s));
  });
  return out;
}

std::string write_generation_record(const ScoredSequence& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["sequence"] = rec.residues;
  j["token_logprobs"] = rec.token_logprobs;
  if (rec.token_logprobs.size() != rec.residues.size()) {
    j["tokenization"] = "subword";
    j["token_count"] = rec.token_logprobs.size();
  }
  return j.dump() + "\n";
}

StructureConfidence parse_structure_plddt(std::string_view pdb_text, std::string id,
                                          const PlddtOptions& opts) {
  StructureConfidence out;
  out.id = std::move(id);
  std::set<std::string> residues_seen;
  std::vector<std::size_t> lines;
  bool done = false;
  int models = 0;
  detail::for_each_line(pdb_text, [&](std::string_view line, std::size_t line_no) {
    if (done) return;
    if (line.starts_with("MODEL")) {
      if (++models > 1) done = true;
      return;
    }
    if (line.starts_with("ENDMDL")) {
      done = true;
      return;
    }
    if (!line.starts_with("ATOM  ")) return;
    if (line.size() < 66) {
      throw Error(ErrorKind::MalformedAtomRow, detail::line_ref(line_no) + ": shorter than 66 columns");
    }
    if (detail::trim(line.substr(12, 4)) != "CA") return;
    // resName, chain, resSeq and insertion code identify the residue; alternate
    // locations after the first are ignored.
    if (!residues_seen.insert(std::string(line.substr(17, 10))).second) return;
    auto v = detail::parse_double(line.substr(60, 6));
    if (!v) throw Error(ErrorKind::MalformedAtomRow, detail::line_ref(line_no) + ": temperature factor");
    if (*v < 0.0 || *v > 100.0) {
      throw Error(ErrorKind::ConfidenceOutOfRange, detail::line_ref(line_no) + ": " + detail::shortest(*v));
    }
    out.plddt.push_back(*v);
    lines.push_back(line_no);
  });
  if (out.plddt.empty()) throw Error(ErrorKind::NoAtoms, out.id.empty() ? "no CA atoms" : out.id + ": no CA atoms");

  const bool unit_scale = std::all_of(out.plddt.begin(), out.plddt.end(), [](double v) { return v <= 1.0; });
  if (unit_scale) {
    if (!opts.rescale_unit_interval) {
      throw Error(ErrorKind::ConfidenceOutOfRange,
                  detail::line_ref(lines.front()) + ": confidences are on a 0-1 scale (enable rescaling)");
    }
    for (auto& v : out.plddt) v *= 100.0;
  }
  out.mean_plddt = mean_clamped(out.plddt);
  return out;
}

}  // namespace tpsf
