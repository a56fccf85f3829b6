#ifndef LIFTED_GROUND_HPP
#define LIFTED_GROUND_HPP

#include <string>
#include <vector>

#include "lifted/model.hpp"

namespace lifted {

// Reference to one ground PRV instance, constants by name.
struct AtomRef {
  std::string prv;
  std::vector<std::string> consts;
  std::optional<int> slice;
  bool operator==(const AtomRef& o) const {
    return prv == o.prv && consts == o.consts && slice == o.slice;
  }
};

struct GroundEvent {
  AtomRef at;
  std::string value;
};

struct GroundAtom {
  std::string name;
  std::vector<std::string> consts;
  std::optional<int> slice;
  std::vector<std::string> range;
};

std::string to_string(const GroundAtom& a);

struct GroundFactor {
  std::vector<int> vars;  // indices into GroundModel::atoms
  std::vector<double> table;
};

struct GroundModel {
  std::vector<GroundAtom> atoms;
  std::vector<GroundFactor> factors;

  int atom_index(const AtomRef& ref) const;  // -1 when absent
};

// Expands every parfactor over its admissible bindings. One factor per
// binding; atoms are shared across factors.
GroundModel ground(const Model& m);

inline constexpr int kOracleBudget = 24;

// Exact marginal of one ground randvar by variable elimination over the
// ground factor graph. Refuses models larger than `budget` ground randvars.
std::vector<double> exact_marginal(const GroundModel& gm, const AtomRef& target,
                                   const std::vector<GroundEvent>& evidence,
                                   int budget = kOracleBudget);

// Same contract via exhaustive enumeration; limited to 20 ground randvars.
std::vector<double> exact_marginal_enumeration(
    const GroundModel& gm, const AtomRef& target,
    const std::vector<GroundEvent>& evidence, int budget = 20);

// Variable elimination with a caller-chosen order over the non-target atoms.
std::vector<double> exact_marginal_with_order(
    const GroundModel& gm, const AtomRef& target,
    const std::vector<GroundEvent>& evidence,
    const std::vector<int>& elimination_order, int budget = kOracleBudget);

// Max absolute difference between two distributions of equal length.
double compare_marginals(const std::vector<double>& a,
                         const std::vector<double>& b);

}  // namespace lifted

#endif
