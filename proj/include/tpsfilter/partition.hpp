#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tpsfilter/align.hpp"
#include "tpsfilter/seqio.hpp"

namespace tpsf {

struct IdentityEdge {
  std::size_t a = 0;  // node indices, a < b
  std::size_t b = 0;
  double identity = 0.0;

  bool operator==(const IdentityEdge&) const = default;
};

struct IdentityGraph {
  std::vector<std::string> nodes;
  std::vector<IdentityEdge> edges;  // sorted by (a, b), deduplicated
  double threshold = 0.0;
};

struct GraphBuildStats {
  std::size_t candidate_pairs = 0;
  std::size_t aligned_pairs = 0;
};

// Edge (a, b) iff identity(a, b) >= threshold. With p.prefilter the k-mer index
// proposes candidate pairs and every edge is confirmed by exact alignment.
IdentityGraph build_identity_graph(const SequenceSet& set, double threshold, const AlignParams& p,
                                   unsigned threads = 1, GraphBuildStats* stats = nullptr);

struct Cluster {
  std::string id;                    // smallest member id
  std::vector<std::string> members;  // sorted
};

// Connected components; clusters ordered by id.
std::vector<Cluster> cluster(const IdentityGraph& g);

struct PartitionPlan {
  std::size_t partitions = 0;
  std::vector<std::size_t> cluster_partition;  // 1-based, parallel to the cluster list
  std::vector<std::size_t> partition_sizes;    // index 0 is partition 1
  std::vector<std::string> warnings;
};

// Greedy balancing: largest cluster first (ties by cluster id), each into the
// currently smallest partition (ties by lowest index).
PartitionPlan assign_partitions(const std::vector<Cluster>& clusters, std::size_t partitions);

enum class Role { Train, Validation };
std::string_view to_string(Role r);

struct SplitRow {
  std::string id;
  std::string cluster_id;
  std::size_t partition = 0;
  Role role = Role::Train;

  bool operator==(const SplitRow&) const = default;
};

struct SplitAssignment {
  std::vector<SplitRow> rows;  // input order
  std::size_t partitions = 0;
  std::set<std::size_t> train_partitions;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  std::vector<std::string> warnings;

  double train_ratio() const {
    std::size_t total = train_count + validation_count;
    return total == 0 ? 0.0 : static_cast<double>(train_count) / static_cast<double>(total);
  }
  const SplitRow* find(std::string_view id) const;
};

// Rows carry partition indices for every sequence of `set`, in set order.
SplitAssignment assignment_from_plan(const SequenceSet& set, const std::vector<Cluster>& clusters,
                                     const PartitionPlan& plan);

// Assigns roles. train_partitions must be a non-empty proper subset of 1..P
// (InvalidPartitionSelection otherwise). Warns when the achieved train ratio
// is more than 0.1 from target_ratio.
SplitAssignment make_split(SplitAssignment assignment, const std::set<std::size_t>& train_partitions,
                           double target_ratio = 0.8);

// All partitions but the one whose exclusion brings the train ratio closest to
// target_ratio (ties to the lowest validation index).
std::set<std::size_t> auto_train_partitions(const SplitAssignment& assignment,
                                            double target_ratio = 0.8);

struct LeakagePair {
  std::string a;
  std::string b;
  double identity = 0.0;
};

struct LeakageReport {
  std::size_t pairs_checked = 0;
  std::size_t cross_pairs_total = 0;
  double sampling_rate = 1.0;
  double threshold = 0.0;
  std::vector<LeakagePair> violations;

  bool clean() const noexcept { return violations.empty(); }
};

// Checks cross-partition pairs for identity >= threshold. sampling_rate < 1
// checks a seeded random subset of pairs.
LeakageReport verify_split(const SplitAssignment& assignment, const SequenceSet& set,
                           double threshold, const AlignParams& p, double sampling_rate = 1.0,
                           std::uint64_t seed = 0, unsigned threads = 1);

// Tab-separated split manifest; see docs/formats.md.
struct SplitManifestInfo {
  double threshold = 0.0;
  std::string config_digest;
};
std::string write_split_manifest(const SplitAssignment& assignment, const SplitManifestInfo& info);
SplitAssignment parse_split_manifest(std::string_view text);

}  // namespace tpsf
