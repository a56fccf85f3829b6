#ifndef LIFTED_TAME_HPP
#define LIFTED_TAME_HPP

#include <string>
#include <vector>

#include "lifted/model.hpp"

namespace lifted {

// Settings for the temporal approximate merging pass. `significance_gate`
// turns the ANOVA test off (every clustering is merged) for ablation runs.
struct TameConfig {
  double epsilon = 0.05;
  double alpha = 0.005;
  bool significance_gate = true;
};

// Parfactors grouped by the set of logvars they range over, so all members
// are affected identically by constraint splits.
struct Partition {
  std::vector<std::string> logvars;
  std::vector<Parfactor> members;
};

std::vector<Partition> partition_by_logvars(
    const std::vector<Parfactor>& parfactors);

// Multiplies parfactors with identical constraints within a partition into
// one product per constraint class. Constraints must be pairwise
// identical-or-disjoint.
std::vector<Parfactor> combine_overlapping(
    const std::vector<Parfactor>& members);

// Potential-shape distance: 1 - cosine similarity, in [0, 1].
double rsim(const std::vector<double>& a, const std::vector<double>& b);
double rsim(const Parfactor& a, const Parfactor& b);

struct DbscanResult {
  std::vector<std::vector<int>> clusters;  // indices into the input
  std::vector<int> noise;
};

// Density clustering under the rsim distance. A point is core when at least
// `min_pts` points (itself included) lie within `epsilon`. Parfactors with
// different argument lists are never neighbours.
DbscanResult dbscan(const std::vector<Parfactor>& points, double epsilon,
                    int min_pts = 2);

// Grounding-weighted mean of parfactors over the same arguments with
// pairwise disjoint constraints; the result covers their union.
Parfactor mean_parfactor(const std::vector<Parfactor>& cluster);

enum class GateDecision { reject, accept, single_cluster, no_clusters };

std::string to_string(GateDecision d);

// Outcome of clustering one partition (one argument signature within it).
struct ClusterReport {
  std::vector<std::string> partition_logvars;
  std::vector<PRV> arguments;
  std::vector<std::vector<Parfactor>> clusters;
  std::vector<Parfactor> noise;
  std::vector<Parfactor> cluster_means;
  std::optional<Parfactor> overall_mean;
  long long total_groundings = 0;  // m: groundings across clustered members
  double msg = 0;                  // between-cluster mean square
  double mse = 0;                  // within-cluster mean square
  double f = 0;
  double f_crit = 0;
  GateDecision decision = GateDecision::no_clusters;
  bool merged = false;
  int groups_before = 0;
  int groups_after = 0;
};

// One-way ANOVA over grounding-weighted rsim deviations. Rejecting the
// null hypothesis (cluster means indistinguishable) licenses the merge.
// Needs at least two clusters and more groundings than clusters.
ClusterReport anova(const std::vector<std::vector<Parfactor>>& clusters,
                    double alpha);

// The merging pass: partition by logvar signature, combine overlapping
// parfactors, cluster by rsim, and merge per cluster when the gate rejects
// (or unconditionally for a single cluster). Noise parfactors survive
// verbatim; a partition whose gate accepts is returned unchanged.
std::pair<std::vector<Parfactor>, std::vector<ClusterReport>> tame(
    const std::vector<Parfactor>& parfactors, const TameConfig& cfg);

}  // namespace lifted

#endif
