#ifndef LIFTED_LDJT_HPP
#define LIFTED_LDJT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lifted/fojt.hpp"
#include "lifted/model.hpp"
#include "lifted/ops.hpp"
#include "lifted/tame.hpp"

namespace lifted {

// Per-advance byproducts for instrumentation.
struct StepStats {
  ForwardMessage message;
  std::vector<ClusterReport> tame_reports;
};

// Forward-filtering state over a temporal model: a calibrated junction tree
// for the current step plus the machinery to roll it forward. Copyable, so
// prediction works on throwaway copies.
class LdjtState {
 public:
  // Builds and calibrates the step-0 tree under the given evidence.
  static LdjtState start(const PDM& pdm, const std::vector<Event>& ev0);

  // Moves to step t+1: computes the forward message (optionally compressed
  // by the merging pass), instantiates the next tree, conditions it on the
  // step's evidence, and calibrates.
  void advance(const std::vector<Event>& ev,
               const std::optional<TameConfig>& tame_cfg = std::nullopt,
               StepStats* stats = nullptr);

  // Filtering marginal of one current-step instance.
  std::vector<double> filter(const std::string& prv,
                             const std::vector<std::string>& consts) const;

  // Filtering (pi == t) or prediction (pi > t) marginal; smoothing is
  // rejected. The query's horizon must equal the current step.
  std::vector<double> answer(const Query& q) const;

  // Prediction marginals for several targets at once (one rolled-out copy).
  std::vector<std::vector<double>> predict_many(
      int pi,
      const std::vector<std::pair<std::string, std::vector<std::string>>>&
          targets) const;

  // Message leaving the current step, for metrics at the final step.
  ForwardMessage peek_message(
      const std::optional<TameConfig>& tame_cfg = std::nullopt,
      std::vector<ClusterReport>* reports = nullptr) const;

  // Distinct constraint classes per logvar in a message.
  static std::map<std::string, int> group_count(const ForwardMessage& m);

  int t() const { return t_; }
  const FOJTree& tree() const { return tree_; }
  const std::vector<PRV>& interface_prev() const { return interface_prev_; }
  const std::vector<PRV>& interface_cur() const { return interface_cur_; }

 private:
  LdjtState() = default;

  Model step_model_;                 // transition step structure
  Model vocab_;                      // logvar declarations
  std::vector<PRV> interface_prev_;  // slice tag 0
  std::vector<PRV> interface_cur_;   // slice tag 1
  FOJTree step_template_;
  FOJTree tree_;
  int t_ = 0;
  // Current-step evidence on interface PRVs, re-applied (relabelled to the
  // previous slice) when the next step is instantiated.
  std::vector<ResolvedEvent> carry_;
  // All current-step evidence: conditioning removes the observed randvars
  // from the tree, so filtering one returns its point mass from here.
  std::vector<ResolvedEvent> observed_;

  std::vector<ResolvedEvent> resolve_step_events(
      const std::vector<Event>& ev, int slice_tag) const;
};

}  // namespace lifted

#endif
