#include "tpsfilter/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "text_util.hpp"
#include "tpsfilter/error.hpp"

namespace tpsf {

namespace {

// Slack for comparisons against decimal thresholds typed in a config file.
constexpr double kThresholdSlack = 1e-9;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join_ec(const std::optional<std::vector<EcPrediction>>& preds) {
  if (!preds) return {};
  std::string out;
  for (const auto& p : *preds) {
    if (!out.empty()) out += ';';
    out += p.ec.to_string();
  }
  return out;
}

std::string join_domains(const std::optional<std::vector<DomainAnnotation>>& doms) {
  if (!doms) return {};
  std::string out;
  for (const auto& d : *doms) {
    if (!out.empty()) out += "; ";
    out += d.accession;
    if (!d.description.empty()) out += " " + d.description;
  }
  return out;
}

template <typename T>
std::string opt_fixed(const std::optional<T>& v, int decimals) {
  return v ? detail::fixed(static_cast<double>(*v), decimals) : std::string();
}

double maxid_percent(const IdentityResult& r) { return r.identity * 100.0; }

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::MissingEvidence: return "missing-evidence";
    case Outcome::Disabled: return "disabled";
  }
  return "unknown";
}

// ----------------------------------------------------------------- ranking

std::size_t top_fraction_count(std::size_t n, double top_fraction) {
  if (n == 0) return 0;
  // 0.10 * 28000 must give 2800, not 2801 from representation error.
  double x = top_fraction * static_cast<double>(n) * (1.0 - 1e-12);
  auto k = static_cast<std::size_t>(std::ceil(x));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<ScoredSequence> rank_by_perplexity(const std::vector<ScoredSequence>& records,
                                               double top_fraction) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "top fraction must be in (0, 1]");
  }
  std::vector<const ScoredSequence*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const ScoredSequence* a, const ScoredSequence* b) {
    if (a->perplexity != b->perplexity) return a->perplexity < b->perplexity;
    return a->id < b->id;
  });
  const std::size_t keep = top_fraction_count(records.size(), top_fraction);
  std::vector<ScoredSequence> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(*order[i]);
  return out;
}

// ----------------------------------------------------------------- scorecards

const Verdict* Scorecard::verdict(Stage s) const {
  for (const auto& v : verdicts) {
    if (v.stage == s) return &v;
  }
  return nullptr;
}

bool Scorecard::passed() const {
  if (verdicts.empty()) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) {
    return v.outcome == Outcome::Pass || v.outcome == Outcome::Disabled;
  });
}

ScorecardBuild build_scorecards(const std::vector<std::string>& ids, const EvidenceBundle& ev, bool strict) {
  ScorecardBuild out;
  std::set<std::string> known(ids.begin(), ids.end());

  auto check_unknown = [&](const std::string& source, const auto& map) {
    std::size_t unknown = 0;
    std::string first;
    for (const auto& [id, value] : map) {
      if (known.count(id)) continue;
      if (strict) throw Error(ErrorKind::UnknownEvidenceId, id + " in " + source);
      if (unknown++ == 0) first = id;
    }
    if (unknown > 0) {
      out.warnings.push_back("UnknownEvidenceId: " + std::to_string(unknown) + " id(s) in " + source +
                             " are not candidates (first: " + first + ")");
    }
  };
  if (ev.perplexity) check_unknown("generation records", *ev.perplexity);
  if (ev.maxid) check_unknown("maxid table", *ev.maxid);
  if (ev.detector) check_unknown("detector scores", *ev.detector);
  if (ev.ec) check_unknown("EC predictions", *ev.ec);
  if (ev.domains) check_unknown("domain annotations", *ev.domains);
  if (ev.plddt) check_unknown("structures", *ev.plddt);
  if (ev.structural) check_unknown("structural hits", ev.structural->by_query);

  for (const auto& id : known) {
    Scorecard c;
    c.id = id;
    auto lookup = [&](const auto& source, auto& slot) {
      if (!source) return;
      auto it = source->find(id);
      if (it != source->end()) slot = it->second;
    };
    lookup(ev.perplexity, c.perplexity);
    lookup(ev.maxid, c.maxid);
    lookup(ev.detector, c.detector_score);
    lookup(ev.ec, c.ec_predictions);
    lookup(ev.plddt, c.mean_plddt);
    if (ev.domains) {
      // The annotation tool reports nothing for sequences without domains.
      auto it = ev.domains->find(id);
      c.domains = it == ev.domains->end() ? std::vector<DomainAnnotation>{} : it->second;
    }
    if (ev.structural) {
      if (const StructuralHit* h = ev.structural->best(id)) c.best_tm = *h;
    }
    out.cards.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------------------ filtering

std::vector<Verdict> evaluate(const Scorecard& card, const FilterConfig& cfg) {
  std::vector<Verdict> out;
  for (Stage stage : kCanonicalStageOrder) {
    Verdict v{stage, Outcome::Disabled, {}};
    if (!cfg.enabled(stage)) {
      out.push_back(v);
      continue;
    }
    auto set = [&](bool pass, std::string reason) {
      v.outcome = pass ? Outcome::Pass : Outcome::Fail;
      v.reason = std::move(reason);
    };
    auto missing = [&](std::string what) {
      v.outcome = Outcome::MissingEvidence;
      v.reason = "no " + what;
    };
    switch (stage) {
      case Stage::PerplexityRank:
        if (!card.perplexity || !card.perplexity_rank) {
          missing("perplexity");
        } else {
          set(card.in_top_fraction, "perplexity " + detail::fixed(*card.perplexity, 4) + " rank " +
                                        std::to_string(*card.perplexity_rank));
        }
        break;
      case Stage::MaxId:
        if (!card.maxid) {
          missing("maxID");
        } else {
          double pct = maxid_percent(*card.maxid);
          double compared = cfg.maxid_round_percent ? std::round(pct) : pct;
          set(compared <= cfg.maxid_max_percent + kThresholdSlack,
              "maxID " + detail::fixed(pct, 2) + "% vs <= " + detail::fixed(cfg.maxid_max_percent, 2) + "%");
        }
        break;
      case Stage::Detector:
        if (!card.detector_score) {
          missing("detector score");
        } else {
          set(*card.detector_score >= cfg.detector_min - kThresholdSlack,
              "detector " + detail::fixed(*card.detector_score, 2) + " vs >= " + detail::fixed(cfg.detector_min, 2));
        }
        break;
      case Stage::Ec:
        if (!card.ec_predictions) {
          missing("EC predictions");
        } else {
          bool hit = std::any_of(card.ec_predictions->begin(), card.ec_predictions->end(), [&](const EcPrediction& p) {
            return std::any_of(cfg.ec_allowlist.begin(), cfg.ec_allowlist.end(),
                               [&](const std::string& pat) { return ec_matches(p.ec, pat); });
          });
          set(hit, hit ? "EC in allowlist" : "no allowlisted EC among " + join_ec(card.ec_predictions));
        }
        break;
      case Stage::Domain:
        if (!card.domains) {
          missing("domain annotations");
        } else {
          bool hit = std::any_of(card.domains->begin(), card.domains->end(), [&](const DomainAnnotation& d) {
            std::string acc = strip_accession_version(d.accession);
            return std::any_of(cfg.domain_allowlist.begin(), cfg.domain_allowlist.end(),
                               [&](const std::string& a) { return strip_accession_version(a) == acc; });
          });
          set(hit, hit ? "allowlisted domain present" : "no allowlisted domain");
        }
        break;
      case Stage::Plddt:
        if (!card.mean_plddt) {
          missing("structure");
        } else {
          set(*card.mean_plddt >= cfg.plddt_min - kThresholdSlack,
              "pLDDT " + detail::fixed(*card.mean_plddt, 2) + " vs >= " + detail::fixed(cfg.plddt_min, 2));
        }
        break;
      case Stage::Tm:
        if (!card.best_tm) {
          missing("structural hit");
        } else {
          double tm = card.best_tm->tm_score;
          set(tm >= cfg.tm_min - kThresholdSlack && tm <= cfg.tm_max + kThresholdSlack,
              "TM " + detail::fixed(tm, 2) + " vs [" + detail::fixed(cfg.tm_min, 2) + ", " +
                  detail::fixed(cfg.tm_max, 2) + "]");
        }
        break;
    }
    out.push_back(std::move(v));
  }
  return out;
}

FilterResult apply_filters(std::vector<Scorecard> cards, const FilterConfig& cfg) {
  cfg.validate();
  std::sort(cards.begin(), cards.end(), [](const Scorecard& a, const Scorecard& b) { return a.id < b.id; });

  // Rank membership is computed over the whole pool so every verdict stays a
  // per-card predicate.
  std::vector<std::size_t> ranked;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (cards[i].perplexity) ranked.push_back(i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    if (*cards[a].perplexity != *cards[b].perplexity) return *cards[a].perplexity < *cards[b].perplexity;
    return cards[a].id < cards[b].id;
  });
  const std::size_t keep = top_fraction_count(ranked.size(), cfg.perplexity_top_fraction);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    cards[ranked[r]].perplexity_rank = r + 1;
    cards[ranked[r]].in_top_fraction = r < keep;
  }

  FilterResult result;
  for (auto& c : cards) c.verdicts = evaluate(c, cfg);

  std::vector<const Scorecard*> current;
  for (const auto& c : cards) current.push_back(&c);
  for (Stage stage : cfg.order) {
    if (!cfg.enabled(stage)) continue;
    FunnelStage fs{std::string(to_string(stage)), current.size(), 0};
    std::vector<const Scorecard*> next;
    for (const Scorecard* c : current) {
      if (c->verdict(stage)->outcome == Outcome::Pass) next.push_back(c);
    }
    fs.output = next.size();
    result.funnel.stages.push_back(fs);
    current = std::move(next);
  }
  for (const Scorecard* c : current) {
    result.passing.push_back(*c);
    result.funnel.final_ids.push_back(c->id);
  }
  result.cards = std::move(cards);
  return result;
}

// ---------------------------------------------------------------- reporting

std::vector<CdfPoint> cdf(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "CDF of an empty list");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

double fraction_at_least(const std::vector<double>& values, double threshold) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "fraction of an empty list");
  auto count = std::count_if(values.begin(), values.end(), [&](double v) { return v >= threshold; });
  return static_cast<double>(count) / static_cast<double>(values.size());
}

std::string candidate_table_csv(const std::vector<Scorecard>& cards) {
  std::string out = "id,detector_score,plddt,max_tm,maxid_percent,ec_predictions,domains\n";
  for (const auto& c : cards) {
    std::optional<double> tm, maxid;
    if (c.best_tm) tm = c.best_tm->tm_score;
    if (c.maxid) maxid = maxid_percent(*c.maxid);
    out += csv_field(c.id) + ',' + opt_fixed(c.detector_score, 2) + ',' + opt_fixed(c.mean_plddt, 2) + ',' +
           opt_fixed(tm, 2) + ',' + opt_fixed(maxid, 2) + ',' + csv_field(join_ec(c.ec_predictions)) + ',' +
           csv_field(join_domains(c.domains)) + '\n';
  }
  return out;
}

std::string scorecards_csv(const std::vector<Scorecard>& cards) {
  std::string out =
      "id,perplexity,perplexity_rank,maxid_percent,maxid_target,detector_score,plddt,max_tm,tm_target,"
      "ec_predictions,domains";
  for (Stage s : kCanonicalStageOrder) out += ",verdict_" + std::string(to_string(s));
  out += ",passed,reasons\n";
  for (const auto& c : cards) {
    std::optional<double> tm, maxid;
    if (c.best_tm) tm = c.best_tm->tm_score;
    if (c.maxid) maxid = maxid_percent(*c.maxid);
    out += csv_field(c.id) + ',' + opt_fixed(c.perplexity, 4) + ',' +
           (c.perplexity_rank ? std::to_string(*c.perplexity_rank) : "") + ',' + opt_fixed(maxid, 2) + ',' +
           csv_field(c.maxid ? c.maxid->target_id : "") + ',' + opt_fixed(c.detector_score, 2) + ',' +
           opt_fixed(c.mean_plddt, 2) + ',' + opt_fixed(tm, 2) + ',' + csv_field(c.best_tm ? c.best_tm->target : "") +
           ',' + csv_field(join_ec(c.ec_predictions)) + ',' + csv_field(join_domains(c.domains));
    std::string reasons;
    for (Stage s : kCanonicalStageOrder) {
      const Verdict* v = c.verdict(s);
      out += ',' + std::string(v ? to_string(v->outcome) : "disabled");
      if (v && !v->reason.empty()) {
        if (!reasons.empty()) reasons += "; ";
        reasons += std::string(to_string(s)) + ": " + v->reason;
      }
    }
    out += std::string(",") + (c.passed() ? "yes" : "no") + ',' + csv_field(reasons) + '\n';
  }
  return out;
}

std::string funnel_tsv(const FunnelReport& funnel) {
  std::string out = "stage\tinput\toutput\n";
  for (const auto& s : funnel.stages) {
    out += s.name + '\t' + std::to_string(s.input) + '\t' + std::to_string(s.output) + '\n';
  }
  return out;
}

std::string cdf_tsv(const std::vector<CdfPoint>& points) {
  std::string out = "value\tcumulative_fraction\n";
  for (const auto& p : points) out += detail::shortest(p.value) + '\t' + detail::shortest(p.fraction) + '\n';
  return out;
}

std::string plddt_summary_tsv(const std::vector<double>& values, double threshold) {
  std::string out;
  out += "n\t" + std::to_string(values.size()) + '\n';
  out += "threshold\t" + detail::fixed(threshold, 2) + '\n';
  out += "fraction_at_least_threshold\t" + detail::fixed(fraction_at_least(values, threshold), 9) + '\n';
  return out;
}

std::string maxid_tsv(const std::vector<IdentityResult>& results) {
  std::string out = "query\ttarget\tidentity\tmatches\tcolumns\tskipped\n";
  for (const auto& r : results) {
    out += r.query_id + '\t' + r.target_id + '\t' + detail::shortest(r.identity) + '\t' + std::to_string(r.matches) +
           '\t' + std::to_string(r.columns) + '\t' + std::to_string(r.skipped) + '\n';
  }
  return out;
}

std::map<std::string, IdentityResult> parse_maxid_tsv(std::string_view text) {
  std::map<std::string, IdentityResult> out;
  bool header = false;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty() || line.front() == '#') return;
    auto f = detail::split(line, '\t');
    if (!header) {
      if (f.size() != 6 || f[0] != "query") throw Error(ErrorKind::SchemaError, "maxid table header missing");
      header = true;
      return;
    }
    if (f.size() != 6) throw Error(ErrorKind::SchemaError, "maxid " + detail::line_ref(line_no));
    IdentityResult r;
    r.query_id = std::string(f[0]);
    r.target_id = std::string(f[1]);
    auto id = detail::parse_double(f[2]);
    auto m = detail::parse_long(f[3]);
    auto c = detail::parse_long(f[4]);
    auto s = detail::parse_long(f[5]);
    if (r.query_id.empty() || !id || *id < 0.0 || *id > 1.0 || !m || !c || !s || *m < 0 || *c < 0 || *s < 0) {
      throw Error(ErrorKind::SchemaError, "maxid " + detail::line_ref(line_no));
    }
    r.identity = *id;
    r.matches = static_cast<std::size_t>(*m);
    r.columns = static_cast<std::size_t>(*c);
    r.skipped = static_cast<std::size_t>(*s);
    if (!out.emplace(r.query_id, r).second) {
      throw Error(ErrorKind::DuplicateId, r.query_id + " in maxid table");
    }
  });
  return out;
}

}  // namespace tpsf
