#ifndef LIFTED_FOJT_HPP
#define LIFTED_FOJT_HPP

#include <map>
#include <vector>

#include "lifted/model.hpp"

namespace lifted {

// Forward message: the parfactors summarising everything observed up to and
// including step t, ranging over the interface PRVs of that step.
struct ForwardMessage {
  int t = 0;
  std::vector<Parfactor> parfactors;
};

struct Parcluster {
  int id = 0;
  std::vector<PRV> prvs;  // sorted
  std::vector<Parfactor> local;
  std::map<int, std::vector<Parfactor>> received;  // by neighbour id
};

// First-order junction tree over one step model. Clusters are connected by
// separator-labelled edges and satisfy the running intersection property.
struct FOJTree {
  std::vector<Parcluster> clusters;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<PRV>> separators;  // parallel to edges
  int in_cluster = -1;
  int out_cluster = -1;
  bool calibrated = false;

  std::vector<int> neighbours(int id) const;
  const std::vector<PRV>& separator_between(int a, int b) const;
};

// Interface of the transition model: every previous-slice PRV occurring in
// a parfactor that also touches the current slice.
std::vector<PRV> forward_interface(const Model& gtrans);

// Builds the tree by min-fill elimination over the lifted moral graph, with
// the given interface PRV sets forced into single clusters. Every parfactor
// is assigned to the first cluster covering its arguments.
FOJTree build_fojt(const std::vector<Parfactor>& parfactors,
                   const std::vector<PRV>& force_in,
                   const std::vector<PRV>& force_out);

// Two-pass message passing (collect toward the out-cluster, then
// distribute). Afterwards every cluster can answer queries over its PRVs.
void calibrate(FOJTree& tree);

// Local model plus every received message.
std::vector<Parfactor> cluster_belief(const FOJTree& tree, int id);

// Marginal of one ground instance from the first cluster containing the PRV.
// Falls back to grounding the query's connected component when the lifted
// elimination is unsupported.
std::vector<double> tree_marginal(const FOJTree& tree, const PRV& prv,
                                  const std::vector<int>& consts);

// Eliminates everything but the interface from the out-cluster belief and
// rescales each resulting parfactor to unit maximum.
ForwardMessage forward_message(const FOJTree& tree,
                               const std::vector<PRV>& out_interface, int t);

}  // namespace lifted

#endif
