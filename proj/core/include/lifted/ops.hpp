#ifndef LIFTED_OPS_HPP
#define LIFTED_OPS_HPP

#include <vector>

#include "lifted/model.hpp"

namespace lifted {

// Ground observation resolved against a model: PRV metadata plus constant
// indices aligned with the PRV's logvars.
struct ResolvedEvent {
  PRV prv;
  std::vector<int> consts;
  int value = 0;
};

// Looks a PRV up by name and slice among the model's parfactor arguments.
std::optional<PRV> find_prv(const Model& m, const std::string& name,
                            std::optional<int> slice);

ResolvedEvent resolve_event(const Model& m, const Event& e,
                            std::optional<int> slice);

// Lifted product. Joins the constraints over shared logvars and multiplies
// the potentials on their projections. When the inputs cover different
// logvar sets, each input is raised to gr(own)/gr(joined) so the ground
// product is preserved; the exponent is 1 whenever both sides cover the
// joined constraint (uniform coverage is checked).
Parfactor multiply(const Parfactor& a, const Parfactor& b);

// Lifted elimination of one argument. Requires every constraint logvar to
// occur in the target (otherwise counting conversion would be needed, which
// is unsupported). Logvars exclusive to the target exponentiate the summed
// table by their per-binding constant count.
Parfactor sum_out(const Parfactor& p, const PRV& target);

// Conditions on a uniformly observed argument: fixes the axis to the
// observed value and drops it. Logvars exclusive to the observed PRV
// exponentiate the sliced table by their per-binding constant count.
Parfactor absorb(const Parfactor& p, const PRV& target,
                 const std::string& value);

// Splits parfactors by evidence signature and then aligns constraints
// pairwise until any two parfactors sharing a PRV have identical-or-disjoint
// instance sets. No conditioning happens here.
Model shatter(const Model& m, const std::vector<ResolvedEvent>& events);

// shatter followed by absorption of every uniformly covered observed PRV.
// Detects contradictory or partially covering evidence.
Model apply_evidence(const Model& m, const std::vector<ResolvedEvent>& events);

// Grouped variants used by the junction tree: parfactors keep their group
// (cluster) assignment through splitting.
std::vector<std::vector<Parfactor>> apply_evidence_grouped(
    const std::vector<std::vector<Parfactor>>& groups,
    const std::vector<ResolvedEvent>& events);

// Eliminates one PRV from a set of mutually aligned parfactors: parfactors
// containing it are grouped by instance class, multiplied, and summed out.
std::vector<Parfactor> eliminate_prv(std::vector<Parfactor> set,
                                     const PRV& target);

// Eliminates every PRV not in `keep`, smallest-footprint first.
std::vector<Parfactor> eliminate_all_except(std::vector<Parfactor> set,
                                            const std::vector<PRV>& keep);

}  // namespace lifted

#endif
