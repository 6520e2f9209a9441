#include "tpsfilter/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "tpsfilter/error.hpp"
#include "tpsfilter/parallel.hpp"

namespace tpsf {

namespace {

// identity <= min(len)/max(len) under the column denominator.
bool may_reach(std::size_t la, std::size_t lb, double threshold, const AlignParams& p) {
  if (p.denominator != IdentityDenominator::Columns) return true;
  return static_cast<double>(std::min(la, lb)) / static_cast<double>(std::max(la, lb)) >= threshold;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    std::size_t tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

std::size_t parse_index(std::string_view s, std::size_t line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::SchemaError, "split manifest line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::Train ? "train" : "validation"; }

IdentityGraph build_identity_graph(const SequenceSet& set, double threshold, const AlignParams& p,
                                   unsigned threads, GraphBuildStats* stats) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::InvalidParams, "graph threshold must be in (0, 1)");
  }
  p.validate();
  IdentityGraph g;
  g.threshold = threshold;
  for (const auto& s : set) g.nodes.push_back(s.id);
  const std::size_t n = set.size();

  std::optional<KmerIndex> index;
  if (p.prefilter) index.emplace(set, p.kmer_k);

  std::vector<std::vector<IdentityEdge>> per_row(n);
  std::vector<std::size_t> candidates(n, 0), aligned(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::uint32_t> counts;
    if (index) counts = index->shared_counts(set[i].residues);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (index && counts[j] < static_cast<std::uint32_t>(p.min_shared_kmers)) continue;
      ++candidates[i];
      if (!may_reach(set[i].length(), set[j].length(), threshold, p)) continue;
      ++aligned[i];
      double id = identity(set[i], set[j], p);
      if (id >= threshold) per_row[i].push_back({i, j, id});
    }
  });
  for (auto& row : per_row) g.edges.insert(g.edges.end(), row.begin(), row.end());
  if (stats) {
    stats->candidate_pairs = std::accumulate(candidates.begin(), candidates.end(), std::size_t{0});
    stats->aligned_pairs = std::accumulate(aligned.begin(), aligned.end(), std::size_t{0});
  }
  return g;
}

std::vector<Cluster> cluster(const IdentityGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : g.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<bool> seen(n, false);
  std::vector<Cluster> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    Cluster c;
    seen[start] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      c.members.push_back(g.nodes[v]);
      for (std::size_t u : adj[v]) {
        if (!seen[u]) {
          seen[u] = true;
          stack.push_back(u);
        }
      }
    }
    std::sort(c.members.begin(), c.members.end());
    c.id = c.members.front();
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
  return out;
}

PartitionPlan assign_partitions(const std::vector<Cluster>& clusters, std::size_t partitions) {
  if (partitions < 2) throw Error(ErrorKind::InvalidPartitionSelection, "need at least 2 partitions");
  PartitionPlan plan;
  plan.partitions = partitions;
  plan.cluster_partition.assign(clusters.size(), 0);
  plan.partition_sizes.assign(partitions, 0);
  if (clusters.size() < partitions) {
    plan.warnings.push_back("FewerClustersThanPartitions: " + std::to_string(clusters.size()) +
                            " clusters for " + std::to_string(partitions) +
                            " partitions; some partitions stay empty");
  }

  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (clusters[a].members.size() != clusters[b].members.size()) {
      return clusters[a].members.size() > clusters[b].members.size();
    }
    return clusters[a].id < clusters[b].id;
  });

  std::size_t total = 0;
  for (std::size_t c : order) {
    auto smallest = std::min_element(plan.partition_sizes.begin(), plan.partition_sizes.end());
    std::size_t slot = static_cast<std::size_t>(smallest - plan.partition_sizes.begin());
    plan.cluster_partition[c] = slot + 1;
    *smallest += clusters[c].members.size();
    total += clusters[c].members.size();
  }

  if (!order.empty() && total > 0) {
    std::size_t largest = clusters[order.front()].members.size();
    if (static_cast<double>(largest) > 0.8 * static_cast<double>(total)) {
      plan.warnings.push_back("split balance: largest cluster holds " + std::to_string(largest) +
                              " of " + std::to_string(total) + " sequences");
    }
  }
  return plan;
}

const SplitRow* SplitAssignment::find(std::string_view id) const {
  for (const auto& r : rows) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

SplitAssignment assignment_from_plan(const SequenceSet& set, const std::vector<Cluster>& clusters,
                                     const PartitionPlan& plan) {
  std::unordered_map<std::string, std::size_t> cluster_of;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const auto& m : clusters[c].members) cluster_of[m] = c;
  }
  SplitAssignment out;
  out.partitions = plan.partitions;
  out.warnings = plan.warnings;
  for (const auto& seq : set) {
    auto it = cluster_of.find(seq.id);
    if (it == cluster_of.end()) {
      throw Error(ErrorKind::UnknownEvidenceId, "sequence '" + seq.id + "' has no cluster");
    }
    out.rows.push_back({seq.id, clusters[it->second].id, plan.cluster_partition[it->second], Role::Train});
  }
  return out;
}

SplitAssignment make_split(SplitAssignment assignment, const std::set<std::size_t>& train_partitions,
                           double target_ratio) {
  const std::size_t P = assignment.partitions;
  if (train_partitions.empty() || train_partitions.size() >= P ||
      *train_partitions.begin() < 1 || *train_partitions.rbegin() > P) {
    throw Error(ErrorKind::InvalidPartitionSelection,
                "train partitions must be a non-empty proper subset of 1.." + std::to_string(P));
  }
  assignment.train_partitions = train_partitions;
  assignment.train_count = 0;
  assignment.validation_count = 0;
  for (auto& row : assignment.rows) {
    row.role = train_partitions.count(row.partition) ? Role::Train : Role::Validation;
    (row.role == Role::Train ? assignment.train_count : assignment.validation_count)++;
  }
  double ratio = assignment.train_ratio();
  if (std::fabs(ratio - target_ratio) > 0.1) {
    assignment.warnings.push_back("train ratio " + format_fixed(ratio, 4) + " deviates from target " +
                                  format_fixed(target_ratio, 2) + " by more than 0.1");
  }
  return assignment;
}

std::set<std::size_t> auto_train_partitions(const SplitAssignment& assignment, double target_ratio) {
  const std::size_t P = assignment.partitions;
  if (P < 2) throw Error(ErrorKind::InvalidPartitionSelection, "need at least 2 partitions");
  std::vector<std::size_t> sizes(P + 1, 0);
  for (const auto& r : assignment.rows) sizes.at(r.partition)++;
  const std::size_t total = assignment.rows.size();
  std::size_t best_val = 1;
  double best_dev = 2.0;
  for (std::size_t v = 1; v <= P; ++v) {
    double ratio = total == 0 ? 0.0 : static_cast<double>(total - sizes[v]) / static_cast<double>(total);
    double dev = std::fabs(ratio - target_ratio);
    if (dev < best_dev) {
      best_dev = dev;
      best_val = v;
    }
  }
  std::set<std::size_t> train;
  for (std::size_t k = 1; k <= P; ++k) {
    if (k != best_val) train.insert(k);
  }
  return train;
}

LeakageReport verify_split(const SplitAssignment& assignment, const SequenceSet& set,
                           double threshold, const AlignParams& p, double sampling_rate,
                           std::uint64_t seed, unsigned threads) {
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "sampling rate must be in (0, 1]");
  }
  std::unordered_map<std::string, std::size_t> partition_of;
  for (const auto& r : assignment.rows) partition_of[r.id] = r.partition;
  std::vector<std::size_t> part(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto it = partition_of.find(set[i].id);
    if (it == partition_of.end()) {
      throw Error(ErrorKind::UnknownEvidenceId, "sequence '" + set[i].id + "' not in split");
    }
    part[i] = it->second;
  }

  LeakageReport report;
  report.sampling_rate = sampling_rate;
  report.threshold = threshold;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      if (part[i] == part[j]) continue;
      ++report.cross_pairs_total;
      if (sampling_rate < 1.0 && coin(rng) >= sampling_rate) continue;
      pairs.emplace_back(i, j);
    }
  }
  report.pairs_checked = pairs.size();

  std::vector<double> ids(pairs.size(), -1.0);
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    auto [i, j] = pairs[k];
    if (!may_reach(set[i].length(), set[j].length(), threshold, p)) return;
    ids[k] = identity(set[i], set[j], p);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (ids[k] >= threshold) {
      report.violations.push_back({set[pairs[k].first].id, set[pairs[k].second].id, ids[k]});
    }
  }
  return report;
}

std::string write_split_manifest(const SplitAssignment& a, const SplitManifestInfo& info) {
  std::string out = "id\tcluster\tpartition\trole\n";
  for (const auto& r : a.rows) {
    out += r.id + '\t' + r.cluster_id + '\t' + std::to_string(r.partition) + '\t' +
           std::string(to_string(r.role)) + '\n';
  }
  std::string train;
  for (std::size_t k : a.train_partitions) {
    if (!train.empty()) train += ',';
    train += std::to_string(k);
  }
  out += "# partitions\t" + std::to_string(a.partitions) + '\n';
  out += "# train_partitions\t" + train + '\n';
  out += "# train_count\t" + std::to_string(a.train_count) + '\n';
  out += "# validation_count\t" + std::to_string(a.validation_count) + '\n';
  out += "# train_ratio\t" + format_fixed(a.train_ratio(), 4) + '\n';
  out += "# threshold\t" + format_fixed(info.threshold, 2) + '\n';
  out += "# config_digest\t" + info.config_digest + '\n';
  return out;
}

SplitAssignment parse_split_manifest(std::string_view text) {
  SplitAssignment a;
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      auto f = split_tabs(line.substr(2));
      if (f.size() != 2) throw Error(ErrorKind::SchemaError, "split manifest line " + std::to_string(line_no));
      if (f[0] == "partitions") a.partitions = parse_index(f[1], line_no);
      if (f[0] == "train_partitions") {
        std::string_view v = f[1];
        while (!v.empty()) {
          std::size_t comma = v.find(',');
          a.train_partitions.insert(parse_index(v.substr(0, comma), line_no));
          v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
        }
      }
      continue;
    }
    auto f = split_tabs(line);
    if (!header_seen) {
      if (f.size() != 4 || f[0] != "id") {
        throw Error(ErrorKind::SchemaError, "split manifest header missing");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 4) throw Error(ErrorKind::SchemaError, "split manifest line " + std::to_string(line_no));
    SplitRow row{std::string(f[0]), std::string(f[1]), parse_index(f[2], line_no), Role::Train};
    if (f[3] == "validation") {
      row.role = Role::Validation;
    } else if (f[3] != "train") {
      throw Error(ErrorKind::SchemaError, "split manifest line " + std::to_string(line_no) + ": role");
    }
    (row.role == Role::Train ? a.train_count : a.validation_count)++;
    a.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorKind::SchemaError, "split manifest header missing");
  for (const auto& r : a.rows) {
    if (r.partition < 1 || (a.partitions > 0 && r.partition > a.partitions)) {
      throw Error(ErrorKind::SchemaError, "split manifest: partition out of range for " + r.id);
    }
  }
  return a;
}

}  // namespace tpsf
