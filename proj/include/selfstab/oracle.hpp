#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "selfstab/graph.hpp"
#include "selfstab/kgrouping.hpp"
#include "selfstab/state.hpp"

namespace selfstab::oracle {

struct GroupingReport {
  std::map<std::int64_t, std::vector<ProcessId>> groups;  // group id -> members
  std::map<std::int64_t, Hops> per_group_diameter;        // kInfinity when disconnected
  std::vector<std::pair<std::int64_t, std::int64_t>> mergeable_pairs;
  std::size_t group_count = 0;
  bool verdict = false;
  std::vector<std::string> violations;
};

// L_k over an explicit assignment: label[i] is the group of vertex index i.
GroupingReport check_Lk(const Graph& g, const std::vector<std::int64_t>& label, int k);
// L_k reading the `group` variable of every process.
GroupingReport check_Lk(const Graph& g, const Configuration& cfg, ScalarVar group, int k);

nlohmann::json to_json(const GroupingReport& r);

// Groups are given as identifier lists. Overlapping groups are rejected.
bool near(const Graph& g, const std::vector<ProcessId>& a, const std::vector<ProcessId>& b, int k);
bool mergeable(const Graph& g, const std::vector<ProcessId>& a, const std::vector<ProcessId>& b, int k);

// Minimum number of parts over all partitions with diameter bound k. n <= 10.
std::size_t exhaustive_min_groups(const Graph& g, int k);

// Group membership by the copying variable in-group (l_v).
std::map<std::int64_t, std::vector<ProcessId>> copy_groups(const Graph& g, const Configuration& cfg,
                                                           const kgrouping::GroupVars& v);

struct Potential {
  std::size_t groups = 0;
  std::size_t prior = 0;
  std::size_t black = 0;
  std::size_t total() const { return 2 * groups + prior + black; }
  bool operator==(const Potential&) const = default;
};

// 2#groups + #prior + #black over the copy groups; meaningful in ¬E.
Potential potential(const Graph& g, const Configuration& cfg, const kgrouping::GroupVars& v, int k);

// Near group pairs where a member holds in-stampON for the other group but
// the pair is mergeable. Empty when stamps are sound.
std::vector<std::string> stamp_violations(const Graph& g, const Configuration& cfg, const kgrouping::GroupVars& v,
                                          int k);

}  // namespace selfstab::oracle
