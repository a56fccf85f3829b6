#include "lifted/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace lifted {

// --- PRV -------------------------------------------------------------------

int PRV::range_index(const std::string& value) const {
  for (std::size_t i = 0; i < range.size(); ++i)
    if (range[i] == value) return static_cast<int>(i);
  throw std::invalid_argument("value '" + value + "' not in range of " + name);
}

std::string to_string(const PRV& prv) {
  std::ostringstream os;
  os << prv.name;
  if (!prv.logvars.empty()) {
    os << '(';
    for (std::size_t i = 0; i < prv.logvars.size(); ++i) {
      if (i) os << ',';
      os << prv.logvars[i];
    }
    os << ')';
  }
  if (prv.slice) os << '@' << *prv.slice;
  return os.str();
}

// --- Constraint --------------------------------------------------------------

namespace {

std::vector<int> slot_order(const std::vector<Constraint::Slot>& slots) {
  std::vector<int> order(slots.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return slots[a].logvar < slots[b].logvar;
  });
  return order;
}

void check_slots(const std::vector<Constraint::Slot>& slots) {
  for (std::size_t i = 0; i + 1 < slots.size(); ++i)
    if (slots[i].logvar == slots[i + 1].logvar)
      throw std::invalid_argument("duplicate constraint logvar " +
                                  slots[i].logvar);
  for (const auto& s : slots)
    if (s.domain_size <= 0)
      throw std::invalid_argument("constraint logvar " + s.logvar +
                                  " has empty domain");
}

}  // namespace

Constraint Constraint::top(std::vector<Slot> slots) {
  auto order = slot_order(slots);
  std::vector<Slot> sorted;
  sorted.reserve(slots.size());
  for (int i : order) sorted.push_back(slots[i]);
  check_slots(sorted);
  Constraint c;
  c.slots = std::move(sorted);
  return c;
}

Constraint Constraint::explicit_set(std::vector<Slot> slots,
                                    std::vector<std::vector<int>> tuples) {
  auto order = slot_order(slots);
  std::vector<Slot> sorted;
  sorted.reserve(slots.size());
  for (int i : order) sorted.push_back(slots[i]);
  check_slots(sorted);
  std::vector<std::vector<int>> fixed;
  fixed.reserve(tuples.size());
  for (const auto& t : tuples) {
    if (t.size() != slots.size())
      throw std::invalid_argument("constraint tuple arity mismatch");
    std::vector<int> row(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      int v = t[order[i]];
      if (v < 0 || v >= sorted[i].domain_size)
        throw std::invalid_argument("constraint constant out of domain for " +
                                    sorted[i].logvar);
      row[i] = v;
    }
    fixed.push_back(std::move(row));
  }
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  Constraint c;
  c.slots = std::move(sorted);
  c.tuples = std::move(fixed);
  return c;
}

long long Constraint::gr() const {
  if (tuples) return static_cast<long long>(tuples->size());
  long long n = 1;
  for (const auto& s : slots) n *= s.domain_size;
  return n;
}

int Constraint::column(const std::string& logvar) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].logvar == logvar) return static_cast<int>(i);
  return -1;
}

std::vector<std::vector<int>> Constraint::expanded() const {
  if (tuples) return *tuples;
  std::vector<int> dims;
  dims.reserve(slots.size());
  for (const auto& s : slots) dims.push_back(s.domain_size);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(gr()));
  std::vector<int> digits(dims.size(), 0);
  do {
    out.push_back(digits);
  } while (next_digits(digits, dims));
  return out;
}

std::vector<std::vector<int>> Constraint::projection(
    const std::vector<std::string>& logvars) const {
  std::vector<std::string> names = logvars;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<int> cols;
  cols.reserve(names.size());
  for (const auto& n : names) {
    int c = column(n);
    if (c < 0) throw std::invalid_argument("projection logvar " + n +
                                           " not in constraint");
    cols.push_back(c);
  }
  std::vector<std::vector<int>> out;
  for (const auto& t : expanded()) {
    std::vector<int> row;
    row.reserve(cols.size());
    for (int c : cols) row.push_back(t[c]);
    out.push_back(std::move(row));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::pair<Constraint, Constraint> Constraint::split_by_projection(
    const std::vector<std::string>& logvars,
    const std::vector<std::vector<int>>& keep) const {
  std::vector<std::string> names = logvars;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<int> cols;
  for (const auto& n : names) {
    int c = column(n);
    if (c < 0) throw std::invalid_argument("split logvar " + n +
                                           " not in constraint");
    cols.push_back(c);
  }
  std::vector<std::vector<int>> sorted_keep = keep;
  std::sort(sorted_keep.begin(), sorted_keep.end());
  std::vector<std::vector<int>> in, out;
  for (const auto& t : expanded()) {
    std::vector<int> key;
    key.reserve(cols.size());
    for (int c : cols) key.push_back(t[c]);
    if (std::binary_search(sorted_keep.begin(), sorted_keep.end(), key))
      in.push_back(t);
    else
      out.push_back(t);
  }
  Constraint a, b;
  a.slots = slots;
  a.tuples = std::move(in);
  b.slots = slots;
  b.tuples = std::move(out);
  return {std::move(a), std::move(b)};
}

Constraint Constraint::join(const Constraint& o) const {
  std::vector<Slot> merged = slots;
  std::vector<std::string> shared;
  for (const auto& s : o.slots) {
    int c = column(s.logvar);
    if (c < 0) {
      merged.push_back(s);
    } else {
      if (slots[c].domain_size != s.domain_size)
        throw std::invalid_argument("domain size mismatch on " + s.logvar);
      shared.push_back(s.logvar);
    }
  }
  std::sort(merged.begin(), merged.end(),
            [](const Slot& a, const Slot& b) { return a.logvar < b.logvar; });
  if (is_top() && o.is_top()) {
    Constraint c;
    c.slots = std::move(merged);
    return c;
  }

  std::vector<int> shared_a, shared_b;
  for (const auto& n : shared) {
    shared_a.push_back(column(n));
    shared_b.push_back(o.column(n));
  }
  // Index the right side by its shared-column key.
  std::map<std::vector<int>, std::vector<const std::vector<int>*>> by_key;
  auto right = o.expanded();
  for (const auto& t : right) {
    std::vector<int> key;
    key.reserve(shared_b.size());
    for (int c : shared_b) key.push_back(t[c]);
    by_key[key].push_back(&t);
  }
  std::vector<int> col_of_a(merged.size(), -1), col_of_b(merged.size(), -1);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    col_of_a[i] = column(merged[i].logvar);
    col_of_b[i] = o.column(merged[i].logvar);
  }
  std::vector<std::vector<int>> joined;
  for (const auto& ta : expanded()) {
    std::vector<int> key;
    key.reserve(shared_a.size());
    for (int c : shared_a) key.push_back(ta[c]);
    auto it = by_key.find(key);
    if (it == by_key.end()) continue;
    for (const auto* tb : it->second) {
      std::vector<int> row(merged.size());
      for (std::size_t i = 0; i < merged.size(); ++i)
        row[i] = col_of_a[i] >= 0 ? ta[col_of_a[i]] : (*tb)[col_of_b[i]];
      joined.push_back(std::move(row));
    }
  }
  std::sort(joined.begin(), joined.end());
  joined.erase(std::unique(joined.begin(), joined.end()), joined.end());
  Constraint c;
  c.slots = std::move(merged);
  c.tuples = std::move(joined);
  return c;
}

Constraint Constraint::project_onto(
    const std::vector<std::string>& logvars) const {
  std::vector<std::string> names = logvars;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<Slot> sub;
  for (const auto& n : names) {
    int c = column(n);
    if (c < 0) throw std::invalid_argument("projection logvar " + n +
                                           " not in constraint");
    sub.push_back(slots[c]);
  }
  if (is_top()) {
    Constraint c;
    c.slots = std::move(sub);
    return c;
  }
  Constraint c;
  c.slots = std::move(sub);
  c.tuples = projection(names);
  return c;
}

Constraint Constraint::unite(const Constraint& o) const {
  if (!same_slots(o))
    throw std::invalid_argument("constraint union over different logvars");
  if (is_top() && o.is_top()) return *this;
  auto a = expanded();
  auto b = o.expanded();
  std::vector<std::vector<int>> u;
  u.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
  u.erase(std::unique(u.begin(), u.end()), u.end());
  Constraint c;
  c.slots = slots;
  c.tuples = std::move(u);
  return c;
}

bool Constraint::equal_set(const Constraint& o) const {
  if (!same_slots(o)) return false;
  if (is_top() && o.is_top()) return true;
  return expanded() == o.expanded();
}

bool Constraint::disjoint_with(const Constraint& o) const {
  if (!same_slots(o))
    throw std::invalid_argument("disjointness over different logvars");
  auto a = expanded();
  auto b = o.expanded();
  std::vector<std::vector<int>> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  return inter.empty();
}

// --- table helpers ----------------------------------------------------------

std::size_t table_size(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("non-positive table dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::vector<std::size_t> row_major_strides(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * static_cast<std::size_t>(dims[i + 1]);
  return s;
}

bool next_digits(std::vector<int>& digits, const std::vector<int>& dims) {
  for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
    if (++digits[i] < dims[i]) return true;
    digits[i] = 0;
  }
  return false;
}

std::vector<double> permute_table(const std::vector<double>& table,
                                  const std::vector<int>& dims,
                                  const std::vector<int>& perm) {
  if (perm.size() != dims.size())
    throw std::invalid_argument("permutation arity mismatch");
  std::vector<int> new_dims(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_dims[i] = dims[perm[i]];
  auto src_strides = row_major_strides(dims);
  std::vector<double> out(table.size());
  if (table.size() != table_size(dims))
    throw std::invalid_argument("table size mismatch");
  std::vector<int> digits(new_dims.size(), 0);
  std::size_t dst = 0;
  do {
    std::size_t src = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      src += static_cast<std::size_t>(digits[i]) * src_strides[perm[i]];
    out[dst++] = table[src];
  } while (next_digits(digits, new_dims));
  return out;
}

// --- Parfactor ---------------------------------------------------------------

Parfactor::Parfactor(std::vector<PRV> in_args, std::vector<double> in_table,
                     Constraint in_constraint)
    : constraint(std::move(in_constraint)) {
  std::vector<int> order(in_args.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return in_args[a] < in_args[b];
  });
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    if (in_args[order[i]] == in_args[order[i + 1]])
      throw std::invalid_argument("duplicate parfactor argument " +
                                  to_string(in_args[order[i]]));
  std::vector<int> old_dims;
  old_dims.reserve(in_args.size());
  for (const auto& a : in_args) {
    if (a.range.size() < 2)
      throw std::invalid_argument("range of " + to_string(a) +
                                  " must have at least two values");
    old_dims.push_back(static_cast<int>(a.range.size()));
  }
  if (in_table.size() != table_size(old_dims))
    throw std::invalid_argument("potential table size mismatch");
  for (double v : in_table)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("potentials must be finite and >= 0");

  args.reserve(in_args.size());
  for (int i : order) args.push_back(in_args[i]);
  bool identity = true;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] != static_cast<int>(i)) identity = false;
  table = identity ? std::move(in_table)
                   : permute_table(in_table, old_dims, order);

  std::set<std::string> arg_lvs;
  for (const auto& a : args)
    for (const auto& lv : a.logvars) arg_lvs.insert(lv);
  std::set<std::string> slot_lvs;
  for (const auto& s : constraint.slots) slot_lvs.insert(s.logvar);
  if (arg_lvs != slot_lvs)
    throw std::invalid_argument(
        "constraint must cover exactly the argument logvars");
  if (constraint.tuples && constraint.tuples->empty() && !args.empty() &&
      !arg_lvs.empty())
    throw std::invalid_argument("empty constraint tuple set");
}

int Parfactor::arg_index(const PRV& prv) const {
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i] == prv) return static_cast<int>(i);
  return -1;
}

std::vector<int> Parfactor::dims() const {
  std::vector<int> d;
  d.reserve(args.size());
  for (const auto& a : args) d.push_back(static_cast<int>(a.range.size()));
  return d;
}

std::vector<std::string> Parfactor::logvar_names() const {
  std::vector<std::string> names;
  names.reserve(constraint.slots.size());
  for (const auto& s : constraint.slots) names.push_back(s.logvar);
  return names;
}

long long gr(const Parfactor& p) { return p.constraint.gr(); }

// --- Model -------------------------------------------------------------------

const LogVar* Model::find_logvar(const std::string& name) const {
  for (const auto& lv : logvars)
    if (lv.name == name) return &lv;
  return nullptr;
}

int Model::constant_index(const std::string& logvar,
                          const std::string& c) const {
  const LogVar* lv = find_logvar(logvar);
  if (!lv) throw std::invalid_argument("undeclared logvar " + logvar);
  for (std::size_t i = 0; i < lv->domain.size(); ++i)
    if (lv->domain[i] == c) return static_cast<int>(i);
  throw std::invalid_argument("constant " + c + " not in domain of " + logvar);
}

// --- unroll ------------------------------------------------------------------

namespace {

Parfactor retag(const Parfactor& p,
                const std::map<std::optional<int>, int>& slice_map) {
  std::vector<PRV> args = p.args;
  for (auto& a : args) {
    auto it = slice_map.find(a.slice);
    if (it == slice_map.end())
      throw std::invalid_argument("unexpected slice tag in " + to_string(a));
    a.slice = it->second;
  }
  return Parfactor(std::move(args), p.table, p.constraint);
}

bool all_slices(const Parfactor& p, int tag) {
  for (const auto& a : p.args)
    if (!a.slice || *a.slice != tag) return false;
  return true;
}

bool is_inter_slice(const Parfactor& p) {
  bool has0 = false, has1 = false;
  for (const auto& a : p.args) {
    if (a.slice && *a.slice == 0) has0 = true;
    if (a.slice && *a.slice == 1) has1 = true;
  }
  return has0 && has1;
}

}  // namespace

Model unroll(const PDM& pdm, int steps) {
  if (steps < 1) throw std::invalid_argument("unroll needs at least one step");
  auto violations = validate_pdm(pdm);
  if (!violations.empty())
    throw std::invalid_argument("invalid temporal model: " + violations[0]);

  Model out;
  out.logvars = pdm.g0.logvars;
  for (const auto& p : pdm.g0.parfactors)
    out.parfactors.push_back(
        retag(p, {{std::nullopt, 0}, {std::optional<int>(0), 0}}));
  for (int t = 1; t < steps; ++t) {
    for (const auto& p : pdm.gtrans.parfactors) {
      if (is_inter_slice(p))
        out.parfactors.push_back(retag(p, {{std::optional<int>(0), t - 1},
                                           {std::optional<int>(1), t}}));
      else if (all_slices(p, 1))
        out.parfactors.push_back(retag(p, {{std::optional<int>(1), t}}));
      // Previous-slice intra parfactors are structural duplicates of the
      // earlier step and are not instantiated.
    }
  }
  return out;
}

// --- validate ----------------------------------------------------------------

std::vector<std::string> validate(const Model& m) {
  std::vector<std::string> out;
  std::set<std::string> lv_names;
  for (const auto& lv : m.logvars) {
    if (!lv_names.insert(lv.name).second)
      out.push_back("duplicate logvar " + lv.name);
    if (lv.domain.empty()) out.push_back("logvar " + lv.name + " has empty domain");
    std::set<std::string> consts(lv.domain.begin(), lv.domain.end());
    if (consts.size() != lv.domain.size())
      out.push_back("duplicate constants in domain of " + lv.name);
  }

  std::map<std::string, std::vector<std::string>> range_of;
  std::map<std::string, std::size_t> arity_of;
  for (std::size_t pi = 0; pi < m.parfactors.size(); ++pi) {
    const auto& p = m.parfactors[pi];
    std::string where = "parfactor " + std::to_string(pi) + ": ";
    for (const auto& a : p.args) {
      if (a.range.size() < 2)
        out.push_back(where + "range of " + to_string(a) + " too small");
      auto [it, fresh] = range_of.emplace(a.name, a.range);
      if (!fresh && it->second != a.range)
        out.push_back(where + "inconsistent range for " + a.name);
      auto [jt, fresh2] = arity_of.emplace(a.name, a.logvars.size());
      if (!fresh2 && jt->second != a.logvars.size())
        out.push_back(where + "inconsistent arity for " + a.name);
      for (const auto& lv : a.logvars)
        if (!m.find_logvar(lv))
          out.push_back(where + "undeclared logvar " + lv + " in " +
                        to_string(a));
    }
    for (const auto& s : p.constraint.slots) {
      const LogVar* lv = m.find_logvar(s.logvar);
      if (lv && static_cast<int>(lv->domain.size()) != s.domain_size)
        out.push_back(where + "constraint domain size mismatch on " + s.logvar);
    }
    if (p.constraint.tuples && p.constraint.tuples->empty() &&
        !p.constraint.slots.empty())
      out.push_back(where + "empty constraint tuple set");
    bool all_zero = true;
    for (double v : p.table)
      if (v != 0.0) all_zero = false;
    if (all_zero) out.push_back(where + "all potentials are zero");
  }
  return out;
}

std::vector<std::string> validate_pdm(const PDM& pdm) {
  std::vector<std::string> out;
  for (auto& v : validate(pdm.g0)) out.push_back("g0: " + v);
  for (auto& v : validate(pdm.gtrans)) out.push_back("gtrans: " + v);

  auto domains = [](const Model& m) {
    std::map<std::string, std::vector<std::string>> d;
    for (const auto& lv : m.logvars) d[lv.name] = lv.domain;
    return d;
  };
  if (domains(pdm.g0) != domains(pdm.gtrans))
    out.push_back("g0 and transition declare different logvars");

  bool g0_tagged = false, g0_untagged = false;
  for (const auto& p : pdm.g0.parfactors)
    for (const auto& a : p.args) {
      if (!a.slice)
        g0_untagged = true;
      else if (*a.slice == 0)
        g0_tagged = true;
      else
        out.push_back("g0 slice tags must be absent or 0");
    }
  if (g0_tagged && g0_untagged)
    out.push_back("g0 mixes tagged and untagged PRVs");

  for (const auto& p : pdm.gtrans.parfactors)
    for (const auto& a : p.args)
      if (!a.slice || (*a.slice != 0 && *a.slice != 1))
        out.push_back("transition slice tags must be 0 or 1");

  // Current-slice structure must mirror the initial model.
  auto signature = [](const Parfactor& p) {
    std::vector<std::string> sig;
    for (const auto& a : p.args) {
      PRV stripped = a;
      stripped.slice.reset();
      sig.push_back(to_string(stripped));
    }
    return sig;
  };
  std::multiset<std::vector<std::string>> init_sigs, cur_sigs;
  for (const auto& p : pdm.g0.parfactors) init_sigs.insert(signature(p));
  for (const auto& p : pdm.gtrans.parfactors)
    if (all_slices(p, 1)) cur_sigs.insert(signature(p));
  if (init_sigs != cur_sigs)
    out.push_back("current-slice structure does not mirror the initial model");

  // The step model (current-slice + inter-slice parfactors) must keep all
  // interface PRVs in one connected component.
  std::vector<const Parfactor*> step;
  for (const auto& p : pdm.gtrans.parfactors)
    if (all_slices(p, 1) || is_inter_slice(p)) step.push_back(&p);
  std::map<std::string, int> comp;
  int next_comp = 0;
  auto key = [](const PRV& a) { return to_string(a); };
  std::map<std::string, std::vector<std::string>> adj;
  for (const Parfactor* p : step)
    for (const auto& a : p->args)
      for (const auto& b : p->args)
        if (!(a == b)) adj[key(a)].push_back(key(b));
  for (const Parfactor* p : step)
    for (const auto& a : p->args) comp.emplace(key(a), -1);
  for (auto& [node, c] : comp) {
    if (c != -1) continue;
    std::vector<std::string> stack{node};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      auto it = comp.find(cur);
      if (it->second != -1) continue;
      it->second = next_comp;
      for (const auto& n : adj[cur]) stack.push_back(n);
    }
    ++next_comp;
  }
  std::set<int> interface_comps;
  for (const Parfactor* p : step)
    if (is_inter_slice(*p))
      for (const auto& a : p->args)
        if (a.slice && *a.slice == 0) interface_comps.insert(comp[key(a)]);
  if (interface_comps.size() > 1)
    out.push_back("interface PRVs span disconnected step-model components");

  return out;
}

}  // namespace lifted
