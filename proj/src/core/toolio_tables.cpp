#include <algorithm>
#include <map>

#include "text_util.hpp"
#include "tpsfilter/error.hpp"
#include "tpsfilter/toolio.hpp"

namespace tpsf {

using detail::line_ref;

// ------------------------------------------------------------ structural hits

const StructuralHit* HitTable::best(std::string_view query) const {
  auto it = by_query.find(std::string(query));
  if (it == by_query.end() || it->second.empty()) return nullptr;
  return &it->second.front();
}

HitTable parse_structural_hits(std::string_view text, const HitTableOptions& opts) {
  auto column_of = [&](const std::string& name) {
    auto it = std::find(opts.columns.begin(), opts.columns.end(), name);
    if (it == opts.columns.end()) throw Error(ErrorKind::MissingColumn, name);
    return static_cast<std::size_t>(it - opts.columns.begin());
  };
  const std::size_t qcol = column_of("query");
  const std::size_t tcol = column_of("target");
  const std::size_t mcol = column_of(opts.tm_column);

  HitTable table;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty() || line.front() == '#') return;
    auto fields = detail::split(line, '\t');
    auto bad = [&](const std::string& why) {
      if (opts.skip_bad_rows) {
        ++table.bad_rows;
        return;
      }
      throw Error(ErrorKind::UnparsableRow, line_ref(line_no) + ": " + why);
    };
    if (fields.size() != opts.columns.size()) {
      return bad("expected " + std::to_string(opts.columns.size()) + " columns, got " +
                 std::to_string(fields.size()));
    }
    if (fields[qcol].empty() || fields[tcol].empty()) return bad("empty query or target");
    auto tm = detail::parse_double(fields[mcol]);
    if (!tm || *tm < 0.0 || *tm > 1.0) return bad("TM-score not in [0, 1]");
    table.by_query[std::string(fields[qcol])].push_back(
        {std::string(fields[qcol]), std::string(fields[tcol]), *tm, 0});
  });
  for (auto& [query, hits] : table.by_query) {
    std::stable_sort(hits.begin(), hits.end(), [](const StructuralHit& a, const StructuralHit& b) {
      if (a.tm_score != b.tm_score) return a.tm_score > b.tm_score;
      return a.target < b.target;
    });
    for (std::size_t r = 0; r < hits.size(); ++r) hits[r].rank = r + 1;
  }
  return table;
}

std::string write_structural_hits(const HitTable& table) {
  std::string out;
  for (const auto& [query, hits] : table.by_query) {
    for (const auto& h : hits) {
      out += h.query + '\t' + h.target + '\t' + detail::shortest(h.tm_score) + '\n';
    }
  }
  return out;
}

// --------------------------------------------------------- detector scores

std::map<std::string, double> parse_detector_scores(std::string_view text) {
  std::map<std::string, double> scores;
  std::map<std::string, std::size_t> first_line;
  bool first_row = true;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (detail::trim(line).empty() || line.front() == '#') return;
    auto fields = detail::split(line, ',');
    if (first_row) {
      first_row = false;
      if (fields.size() == 2 && detail::trim(fields[0]) == "id" && detail::trim(fields[1]) == "score") return;
    }
    if (fields.size() != 2) throw Error(ErrorKind::SchemaError, line_ref(line_no) + ": expected id,score");
    std::string id(detail::trim(fields[0]));
    if (id.empty()) throw Error(ErrorKind::SchemaError, line_ref(line_no) + ": empty id");
    auto score = detail::parse_double(fields[1]);
    if (!score) throw Error(ErrorKind::SchemaError, line_ref(line_no) + ": score is not a number");
    if (*score < 0.0 || *score > 1.0) {
      throw Error(ErrorKind::ScoreOutOfRange, line_ref(line_no) + ": " + id);
    }
    auto [it, inserted] = first_line.emplace(id, line_no);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateId, id + " on lines " + std::to_string(it->second) + " and " +
                                              std::to_string(line_no));
    }
    scores[id] = *score;
  });
  return scores;
}

// ----------------------------------------------------------- EC predictions

std::string EcNumber::to_string() const {
  return std::to_string(head[0]) + '.' + std::to_string(head[1]) + '.' + std::to_string(head[2]) + '.' +
         (last ? std::to_string(*last) : std::string("-"));
}

EcNumber parse_ec_number(std::string_view text) {
  auto fields = detail::split(text, '.');
  auto malformed = [&] { return Error(ErrorKind::MalformedEC, std::string(text)); };
  if (fields.size() != 4) throw malformed();
  EcNumber ec;
  for (std::size_t i = 0; i < 3; ++i) {
    if (fields[i].empty() || fields[i].size() > 6) throw malformed();
    auto v = detail::parse_long(fields[i]);
    if (!v || *v <= 0 || detail::trim(fields[i]).size() != fields[i].size()) throw malformed();
    ec.head[i] = static_cast<int>(*v);
  }
  if (fields[3] != "-") {
    if (fields[3].empty() || fields[3].size() > 6) throw malformed();
    auto v = detail::parse_long(fields[3]);
    if (!v || *v <= 0 || detail::trim(fields[3]).size() != fields[3].size()) throw malformed();
    ec.last = static_cast<int>(*v);
  }
  return ec;
}

bool ec_matches(const EcNumber& ec, std::string_view pattern) {
  auto fields = detail::split(detail::trim(pattern), '.');
  if (fields.empty() || fields.size() > 4) return false;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string_view f = detail::trim(fields[i]);
    if (f == "-" || f == "*") continue;
    auto v = detail::parse_long(f);
    if (!v) return false;
    if (i < 3) {
      if (ec.head[i] != *v) return false;
    } else if (!ec.last || *ec.last != *v) {
      return false;
    }
  }
  return true;
}

std::map<std::string, std::vector<EcPrediction>> parse_ec_predictions(std::string_view text) {
  std::map<std::string, std::vector<EcPrediction>> out;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (detail::trim(line).empty() || line.front() == '#') return;
    auto fields = detail::split(line, ',');
    std::string id(detail::trim(fields[0]));
    if (id.empty()) throw Error(ErrorKind::SchemaError, line_ref(line_no) + ": empty id");
    if (out.count(id)) throw Error(ErrorKind::DuplicateId, id + " (" + line_ref(line_no) + ")");
    auto& preds = out[id];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string_view tok = detail::trim(fields[i]);
      if (!tok.starts_with("EC:")) throw Error(ErrorKind::MalformedEC, std::string(tok));
      tok.remove_prefix(3);
      EcPrediction pred;
      std::size_t slash = tok.find('/');
      if (slash != std::string_view::npos) {
        auto conf = detail::parse_double(tok.substr(slash + 1));
        if (!conf || *conf < 0.0) throw Error(ErrorKind::MalformedEC, std::string(fields[i]));
        pred.confidence = *conf;
        tok = tok.substr(0, slash);
      }
      pred.ec = parse_ec_number(tok);
      preds.push_back(pred);
    }
  });
  return out;
}

// ------------------------------------------------------- domain annotations

std::map<std::string, std::vector<DomainAnnotation>> parse_domain_annotations(
    std::string_view text, const DomainColumns& cols) {
  if (cols.id == 0 || cols.accession == 0 || cols.description == 0) {
    throw Error(ErrorKind::ConfigInvalid, "domain column indices are 1-based");
  }
  const std::size_t needed = std::max({cols.id, cols.accession, cols.description});
  std::map<std::string, std::vector<DomainAnnotation>> out;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (detail::trim(line).empty() || line.front() == '#') return;
    auto fields = detail::split(line, '\t');
    if (fields.size() < needed) {
      throw Error(ErrorKind::RowTooShort, line_ref(line_no) + ": " + std::to_string(fields.size()) +
                                              " columns, need " + std::to_string(needed));
    }
    std::string id(detail::trim(fields[cols.id - 1]));
    if (id.empty()) throw Error(ErrorKind::SchemaError, line_ref(line_no) + ": empty id");
    auto& list = out[id];
    std::string acc(detail::trim(fields[cols.accession - 1]));
    // The scanner writes '-' when a signature has no integrated entry.
    if (acc.empty() || acc == "-") return;
    if (std::none_of(list.begin(), list.end(), [&](const DomainAnnotation& d) { return d.accession == acc; })) {
      list.push_back({acc, std::string(detail::trim(fields[cols.description - 1]))});
    }
  });
  return out;
}

// ------------------------------------------------------ profile domain table

std::string strip_accession_version(std::string_view accession) {
  std::size_t dot = accession.find('.');
  return std::string(accession.substr(0, dot));
}

std::vector<DomainHit> parse_profile_hits(std::string_view text,
                                          const std::set<std::string>& tps_accessions,
                                          ProfileOrientation orientation) {
  std::set<std::string> allow;
  for (const auto& a : tps_accessions) allow.insert(strip_accession_version(a));

  std::vector<DomainHit> hits;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (detail::trim(line).empty() || line.front() == '#') return;
    auto f = detail::split_ws(line);
    if (f.size() < 22) {
      throw Error(ErrorKind::UnparsableRow, line_ref(line_no) + ": expected at least 22 fields");
    }
    // target name, accession (0, 1); query name, accession (3, 4);
    // i-Evalue (12); domain score (13).
    auto pick = [](std::string_view name, std::string_view acc) {
      return acc == "-" ? std::string(name) : std::string(acc);
    };
    DomainHit hit;
    if (orientation == ProfileOrientation::ScanSequences) {
      hit.sequence_id = std::string(f[3]);
      hit.accession = pick(f[0], f[1]);
    } else {
      hit.sequence_id = std::string(f[0]);
      hit.accession = pick(f[3], f[4]);
    }
    auto evalue = detail::parse_double(f[12]);
    auto score = detail::parse_double(f[13]);
    if (!evalue || !score || *evalue <= 0.0) {
      throw Error(ErrorKind::UnparsableRow, line_ref(line_no) + ": bad score or e-value");
    }
    hit.evalue = *evalue;
    hit.bit_score = *score;
    hit.family = allow.count(strip_accession_version(hit.accession)) ? DomainFamily::Tps : DomainFamily::NonTps;
    hits.push_back(std::move(hit));
  });
  return hits;
}

std::set<std::string> stronger_non_tps_filter(const std::vector<DomainHit>& hits,
                                              const std::set<std::string>& tps_accessions) {
  std::set<std::string> allow;
  for (const auto& a : tps_accessions) allow.insert(strip_accession_version(a));
  struct Best {
    std::optional<double> tps, non_tps;
  };
  std::map<std::string, Best> best;
  for (const auto& h : hits) {
    auto& b = best[h.sequence_id];
    auto& slot = allow.count(strip_accession_version(h.accession)) ? b.tps : b.non_tps;
    if (!slot || h.bit_score > *slot) slot = h.bit_score;
  }
  std::set<std::string> exclude;
  for (const auto& [id, b] : best) {
    if (!b.non_tps) continue;
    if (!b.tps || *b.non_tps > *b.tps) exclude.insert(id);
  }
  return exclude;
}

std::set<std::string> default_tps_accessions() {
  return {
      "PF01397",  // terpene synthase, N-terminal domain
      "PF03936",  // terpene synthase family, metal binding domain
      "PF19086",  // terpene synthase family 2, C-terminal metal binding
      "PF13243",  // squalene-hopene cyclase C-terminal domain
      "PF13249",  // squalene-hopene cyclase N-terminal domain
      "PF00494",  // squalene/phytoene synthase
      "PF06330",  // trichodiene synthase
  };
}

}  // namespace tpsf
