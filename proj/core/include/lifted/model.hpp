#ifndef LIFTED_MODEL_HPP
#define LIFTED_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lifted {

// Raised when an input is outside the supported model class (e.g. an
// elimination that would need counting conversion). Callers may catch it
// and fall back to grounding.
struct unsupported_operation : std::runtime_error {
  explicit unsupported_operation(const std::string& what)
      : std::runtime_error(what) {}
};

// Logical variable with a finite domain of named constants.
struct LogVar {
  std::string name;
  std::vector<std::string> domain;
};

// Parameterised randvar: a named variable template over logical variables.
// `slice` tags the time step; transition models use 0 for the previous and
// 1 for the current slice, unrolled models use absolute step numbers.
struct PRV {
  std::string name;
  std::vector<std::string> logvars;
  std::vector<std::string> range{"false", "true"};
  std::optional<int> slice;

  int range_index(const std::string& value) const;
  bool operator==(const PRV& o) const {
    return name == o.name && logvars == o.logvars && slice == o.slice;
  }
  bool operator<(const PRV& o) const {
    if (name != o.name) return name < o.name;
    if (logvars != o.logvars) return logvars < o.logvars;
    return slice < o.slice;
  }
};

std::string to_string(const PRV& prv);

// Set of admissible bindings for a list of logical variables. A default
// constructed-from-slots constraint is the full cross product ("top") and
// stays symbolic until a split materialises explicit tuples. Slots are
// sorted by logvar name; tuples are lexicographically sorted and unique,
// with constants stored as indices into the logvar domain.
struct Constraint {
  struct Slot {
    std::string logvar;
    int domain_size = 0;
    bool operator==(const Slot& o) const {
      return logvar == o.logvar && domain_size == o.domain_size;
    }
  };

  std::vector<Slot> slots;
  std::optional<std::vector<std::vector<int>>> tuples;  // nullopt = top

  static Constraint top(std::vector<Slot> slots);
  static Constraint explicit_set(std::vector<Slot> slots,
                                 std::vector<std::vector<int>> tuples);

  bool is_top() const { return !tuples.has_value(); }
  long long gr() const;
  int column(const std::string& logvar) const;  // -1 when absent
  std::vector<std::vector<int>> expanded() const;

  // Set of distinct sub-tuples over the named logvars (all must be slots).
  std::vector<std::vector<int>> projection(
      const std::vector<std::string>& logvars) const;

  // Splits into (tuples whose projection is in `keep`, the rest). Either
  // part may come back empty.
  std::pair<Constraint, Constraint> split_by_projection(
      const std::vector<std::string>& logvars,
      const std::vector<std::vector<int>>& keep) const;

  // Natural join over shared logvars.
  Constraint join(const Constraint& o) const;
  // Projection onto a subset of slots, as a constraint.
  Constraint project_onto(const std::vector<std::string>& logvars) const;
  // Union of two constraints over identical slots.
  Constraint unite(const Constraint& o) const;

  bool same_slots(const Constraint& o) const { return slots == o.slots; }
  bool equal_set(const Constraint& o) const;
  bool disjoint_with(const Constraint& o) const;
};

// Parfactor: potential table over a list of PRV arguments, restricted by a
// constraint covering exactly the logvars of the arguments. The table is
// dense, indexed mixed-radix over the argument ranges in declared order
// with the last argument varying fastest. Arguments are kept sorted by
// (name, logvars, slice); construction canonicalises.
struct Parfactor {
  std::vector<PRV> args;
  std::vector<double> table;
  Constraint constraint;

  Parfactor() = default;
  Parfactor(std::vector<PRV> args, std::vector<double> table,
            Constraint constraint);

  int arg_index(const PRV& prv) const;  // -1 when absent
  std::vector<int> dims() const;
  std::vector<std::string> logvar_names() const;  // sorted, from constraint
};

long long gr(const Parfactor& p);

struct Model {
  std::vector<LogVar> logvars;
  std::vector<Parfactor> parfactors;

  const LogVar* find_logvar(const std::string& name) const;
  int constant_index(const std::string& logvar, const std::string& c) const;
};

// Temporal model: initial slice plus a two-slice transition model whose
// current-slice structure mirrors the initial model.
struct PDM {
  Model g0;
  Model gtrans;
};

// Ground observation of one PRV instance; constants by name, value by
// range label. Evidence maps time steps to event lists.
struct Event {
  std::string prv;
  std::vector<std::string> consts;
  std::string value;
};

struct Evidence {
  std::map<int, std::vector<Event>> steps;
  int horizon() const { return steps.empty() ? 0 : steps.rbegin()->first; }
};

// Marginal query: ground target instance, query time pi, evidence horizon t.
// pi == t is filtering, pi > t prediction; pi < t (smoothing) is rejected.
struct Query {
  std::string prv;
  std::vector<std::string> consts;
  int pi = 0;
  int horizon = 0;
};

// --- table helpers -------------------------------------------------------

std::size_t table_size(const std::vector<int>& dims);
std::vector<std::size_t> row_major_strides(const std::vector<int>& dims);
// Advances a mixed-radix digit vector; false once it wraps to all zeros.
bool next_digits(std::vector<int>& digits, const std::vector<int>& dims);
// Reorders table axes; perm[i] is the source axis for result axis i.
std::vector<double> permute_table(const std::vector<double>& table,
                                  const std::vector<int>& dims,
                                  const std::vector<int>& perm);

// --- model-level operations ----------------------------------------------

// Instantiates a temporal model for steps 0..steps-1: the initial model at
// slice 0, one copy of the transition's current-slice parfactors per later
// slice, and inter-slice parfactors bridging consecutive slices.
Model unroll(const PDM& pdm, int steps);

// Structural checks; returns human-readable violations, empty when valid.
std::vector<std::string> validate(const Model& m);
std::vector<std::string> validate_pdm(const PDM& pdm);

}  // namespace lifted

#endif
