#include "lifted/ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lifted {

std::optional<PRV> find_prv(const Model& m, const std::string& name,
                            std::optional<int> slice) {
  for (const auto& p : m.parfactors)
    for (const auto& a : p.args)
      if (a.name == name && a.slice == slice) return a;
  return std::nullopt;
}

ResolvedEvent resolve_event(const Model& m, const Event& e,
                            std::optional<int> slice) {
  auto prv = find_prv(m, e.prv, slice);
  if (!prv)
    throw std::invalid_argument("evidence on undeclared PRV " + e.prv);
  if (e.consts.size() != prv->logvars.size())
    throw std::invalid_argument("evidence arity mismatch for " + e.prv);
  ResolvedEvent out;
  out.prv = *prv;
  out.consts.reserve(e.consts.size());
  for (std::size_t i = 0; i < e.consts.size(); ++i)
    out.consts.push_back(m.constant_index(prv->logvars[i], e.consts[i]));
  out.value = prv->range_index(e.value);
  return out;
}

namespace {

std::vector<std::string> union_logvars(const std::vector<PRV>& args) {
  std::vector<std::string> lvs;
  for (const auto& a : args)
    for (const auto& lv : a.logvars) lvs.push_back(lv);
  std::sort(lvs.begin(), lvs.end());
  lvs.erase(std::unique(lvs.begin(), lvs.end()), lvs.end());
  return lvs;
}

// Number of bindings of `exclusive` logvars per binding of the remaining
// logvars; must be uniform across the constraint.
long long exclusive_multiplicity(const Constraint& c,
                                 const std::vector<std::string>& remaining,
                                 const std::vector<std::string>& exclusive) {
  if (exclusive.empty()) return 1;
  if (c.is_top()) {
    long long k = 1;
    for (const auto& lv : exclusive) {
      int col = c.column(lv);
      k *= c.slots[col].domain_size;
    }
    return k;
  }
  std::vector<int> rem_cols, exc_cols;
  for (const auto& lv : remaining) rem_cols.push_back(c.column(lv));
  for (const auto& lv : exclusive) exc_cols.push_back(c.column(lv));
  std::map<std::vector<int>, std::set<std::vector<int>>> per_binding;
  for (const auto& t : *c.tuples) {
    std::vector<int> rem, exc;
    for (int col : rem_cols) rem.push_back(t[col]);
    for (int col : exc_cols) exc.push_back(t[col]);
    per_binding[rem].insert(exc);
  }
  long long k = -1;
  for (const auto& [rem, excs] : per_binding) {
    long long n = static_cast<long long>(excs.size());
    if (k < 0)
      k = n;
    else if (k != n)
      throw unsupported_operation(
          "non-uniform constraint grouping; split the constraint first");
  }
  return k < 0 ? 1 : k;
}

void pow_in_place(std::vector<double>& table, long long k) {
  if (k == 1) return;
  for (double& v : table) v = std::pow(v, static_cast<double>(k));
}

// Sums one axis away (value < 0) or slices it at `value`.
std::vector<double> reduce_axis(const std::vector<double>& table,
                                const std::vector<int>& dims, int axis,
                                int value) {
  std::vector<int> out_dims = dims;
  out_dims.erase(out_dims.begin() + axis);
  std::vector<double> out(table_size(out_dims), 0.0);
  auto strides = row_major_strides(dims);
  std::vector<int> digits(out_dims.size(), 0);
  std::size_t dst = 0;
  do {
    std::size_t base = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (static_cast<int>(i) != axis)
        base += static_cast<std::size_t>(digits[j++]) * strides[i];
    if (value >= 0) {
      out[dst++] =
          table[base + static_cast<std::size_t>(value) * strides[axis]];
    } else {
      double acc = 0;
      for (int k = 0; k < dims[axis]; ++k)
        acc += table[base + static_cast<std::size_t>(k) * strides[axis]];
      out[dst++] = acc;
    }
  } while (next_digits(digits, out_dims));
  return out;
}

}  // namespace

// --- multiply ---------------------------------------------------------------

Parfactor multiply(const Parfactor& a, const Parfactor& b) {
  for (const auto& aa : a.args) {
    int j = b.arg_index(aa);
    if (j >= 0 && b.args[j].range != aa.range)
      throw std::invalid_argument("range mismatch on shared PRV " +
                                  to_string(aa));
  }
  std::vector<std::string> shared;
  for (const auto& s : a.constraint.slots)
    if (b.constraint.column(s.logvar) >= 0) shared.push_back(s.logvar);
  if (!shared.empty() &&
      a.constraint.projection(shared) != b.constraint.projection(shared))
    throw unsupported_operation("misaligned constraints; shatter first");

  Constraint joined = a.constraint.join(b.constraint);
  long long gr_j = joined.gr();
  long long gr_a = a.constraint.gr();
  long long gr_b = b.constraint.gr();
  if (gr_j <= 0) throw unsupported_operation("empty joined constraint");

  // Uniform-coverage check: every input tuple must extend to the same
  // number of joined tuples for the grounding-ratio exponent to be exact.
  auto check_uniform = [&](const Parfactor& p, long long gr_p) {
    if (gr_p == gr_j) return;
    if (gr_j % gr_p != 0)
      throw unsupported_operation("non-uniform constraint overlap in multiply");
    auto lvs = p.logvar_names();
    if (lvs.empty()) return;  // scalar side: trivially uniform
    std::map<std::vector<int>, long long> counts;
    std::vector<int> cols;
    for (const auto& lv : lvs) cols.push_back(joined.column(lv));
    for (const auto& t : joined.expanded()) {
      std::vector<int> key;
      for (int col : cols) key.push_back(t[col]);
      ++counts[key];
    }
    long long expected = gr_j / gr_p;
    if (static_cast<long long>(counts.size()) != gr_p)
      throw unsupported_operation("non-uniform constraint overlap in multiply");
    for (const auto& [key, n] : counts)
      if (n != expected)
        throw unsupported_operation(
            "non-uniform constraint overlap in multiply");
  };
  check_uniform(a, gr_a);
  check_uniform(b, gr_b);
  double ea = static_cast<double>(gr_a) / static_cast<double>(gr_j);
  double eb = static_cast<double>(gr_b) / static_cast<double>(gr_j);

  std::vector<PRV> args = a.args;
  for (const auto& bb : b.args)
    if (a.arg_index(bb) < 0) args.push_back(bb);
  std::sort(args.begin(), args.end());

  std::vector<int> dims;
  dims.reserve(args.size());
  for (const auto& arg : args) dims.push_back(static_cast<int>(arg.range.size()));

  auto member_strides = [&](const Parfactor& p) {
    auto own = row_major_strides(p.dims());
    std::vector<std::size_t> s(args.size(), 0);
    for (std::size_t i = 0; i < args.size(); ++i) {
      int j = p.arg_index(args[i]);
      if (j >= 0) s[i] = own[j];
    }
    return s;
  };
  auto sa = member_strides(a);
  auto sb = member_strides(b);

  std::vector<double> table(table_size(dims), 0.0);
  std::vector<int> digits(dims.size(), 0);
  std::size_t dst = 0;
  do {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      ia += static_cast<std::size_t>(digits[i]) * sa[i];
      ib += static_cast<std::size_t>(digits[i]) * sb[i];
    }
    double va = ea == 1.0 ? a.table[ia] : std::pow(a.table[ia], ea);
    double vb = eb == 1.0 ? b.table[ib] : std::pow(b.table[ib], eb);
    table[dst++] = va * vb;
  } while (next_digits(digits, dims));

  return Parfactor(std::move(args), std::move(table), std::move(joined));
}

// --- sum_out ----------------------------------------------------------------

Parfactor sum_out(const Parfactor& p, const PRV& target) {
  int axis = p.arg_index(target);
  if (axis < 0)
    throw std::invalid_argument("sum_out target " + to_string(target) +
                                " is not an argument");
  std::set<std::string> target_lvs(target.logvars.begin(),
                                   target.logvars.end());
  for (const auto& s : p.constraint.slots)
    if (!target_lvs.count(s.logvar))
      throw unsupported_operation("eliminating " + to_string(target) +
                                  " requires counting conversion, unsupported");

  std::vector<PRV> remaining = p.args;
  remaining.erase(remaining.begin() + axis);
  auto rem_lvs = union_logvars(remaining);
  std::set<std::string> rem_set(rem_lvs.begin(), rem_lvs.end());
  std::vector<std::string> exclusive;
  for (const auto& lv : target.logvars)
    if (!rem_set.count(lv)) exclusive.push_back(lv);
  std::sort(exclusive.begin(), exclusive.end());
  exclusive.erase(std::unique(exclusive.begin(), exclusive.end()),
                  exclusive.end());

  long long k = exclusive_multiplicity(p.constraint, rem_lvs, exclusive);
  std::vector<double> table = reduce_axis(p.table, p.dims(), axis, -1);
  pow_in_place(table, k);
  Constraint c = p.constraint.project_onto(rem_lvs);
  return Parfactor(std::move(remaining), std::move(table), std::move(c));
}

// --- absorb -----------------------------------------------------------------

Parfactor absorb(const Parfactor& p, const PRV& target,
                 const std::string& value) {
  int axis = p.arg_index(target);
  if (axis < 0)
    throw std::invalid_argument("observed PRV " + to_string(target) +
                                " is not an argument");
  int vi = p.args[axis].range_index(value);

  std::vector<PRV> remaining = p.args;
  remaining.erase(remaining.begin() + axis);
  auto rem_lvs = union_logvars(remaining);
  std::set<std::string> rem_set(rem_lvs.begin(), rem_lvs.end());
  std::vector<std::string> exclusive;
  for (const auto& lv : target.logvars)
    if (!rem_set.count(lv)) exclusive.push_back(lv);
  std::sort(exclusive.begin(), exclusive.end());
  exclusive.erase(std::unique(exclusive.begin(), exclusive.end()),
                  exclusive.end());

  long long k = exclusive_multiplicity(p.constraint, rem_lvs, exclusive);
  std::vector<double> table = reduce_axis(p.table, p.dims(), axis, vi);
  pow_in_place(table, k);
  Constraint c = p.constraint.project_onto(rem_lvs);
  return Parfactor(std::move(remaining), std::move(table), std::move(c));
}

// --- shatter ----------------------------------------------------------------

namespace {

using EventIndex = std::map<PRV, std::map<std::vector<int>, int>>;

EventIndex index_events(const std::vector<ResolvedEvent>& events) {
  EventIndex idx;
  for (const auto& e : events) {
    auto [it, fresh] = idx[e.prv].emplace(e.consts, e.value);
    if (!fresh && it->second != e.value)
      throw std::invalid_argument("contradictory evidence on " +
                                  to_string(e.prv));
  }
  return idx;
}

struct Tagged {
  int group = 0;
  Parfactor p;
};

// Splits one parfactor into evidence-signature classes.
std::vector<Parfactor> split_by_signature(const Parfactor& p,
                                          const EventIndex& idx) {
  std::vector<const std::map<std::vector<int>, int>*> per_arg(p.args.size(),
                                                              nullptr);
  bool any = false;
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    auto it = idx.find(p.args[i]);
    if (it != idx.end()) {
      per_arg[i] = &it->second;
      any = true;
    }
  }
  if (!any) return {p};

  std::vector<std::vector<int>> arg_cols(p.args.size());
  for (std::size_t i = 0; i < p.args.size(); ++i)
    for (const auto& lv : p.args[i].logvars)
      arg_cols[i].push_back(p.constraint.column(lv));

  std::map<std::vector<int>, std::vector<std::vector<int>>> by_sig;
  for (const auto& t : p.constraint.expanded()) {
    std::vector<int> sig(p.args.size(), -1);
    for (std::size_t i = 0; i < p.args.size(); ++i) {
      if (!per_arg[i]) continue;
      std::vector<int> consts;
      consts.reserve(arg_cols[i].size());
      for (int col : arg_cols[i]) consts.push_back(t[col]);
      auto it = per_arg[i]->find(consts);
      if (it != per_arg[i]->end()) sig[i] = it->second;
    }
    by_sig[sig].push_back(t);
  }
  if (by_sig.size() == 1) return {p};
  std::vector<Parfactor> out;
  out.reserve(by_sig.size());
  for (auto& [sig, tuples] : by_sig) {
    Constraint c;
    c.slots = p.constraint.slots;
    c.tuples = std::move(tuples);
    out.emplace_back(p.args, p.table, std::move(c));
  }
  return out;
}

// Pairwise constraint alignment to a fixpoint: any two parfactors sharing a
// PRV end up with identical or disjoint instance sets for it.
void align(std::vector<Tagged>& items) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < items.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < items.size() && !changed; ++j) {
        PRV arg;
        std::vector<std::vector<int>> inter;
        bool found = false, need_i = false, need_j = false;
        for (const auto& cand : items[i].p.args) {
          if (items[j].p.arg_index(cand) < 0) continue;
          auto pi = items[i].p.constraint.projection(cand.logvars);
          auto pj = items[j].p.constraint.projection(cand.logvars);
          if (pi == pj) continue;
          std::vector<std::vector<int>> in;
          std::set_intersection(pi.begin(), pi.end(), pj.begin(), pj.end(),
                                std::back_inserter(in));
          if (in.empty()) continue;
          arg = cand;
          need_i = pi != in;
          need_j = pj != in;
          inter = std::move(in);
          found = true;
          break;
        }
        if (!found) continue;

        auto split_item = [&](std::size_t at) {
          Tagged item = items[at];
          auto [in_c, out_c] =
              item.p.constraint.split_by_projection(arg.logvars, inter);
          std::vector<Tagged> parts;
          if (!in_c.tuples->empty())
            parts.push_back(
                {item.group, Parfactor(item.p.args, item.p.table, in_c)});
          if (!out_c.tuples->empty())
            parts.push_back(
                {item.group, Parfactor(item.p.args, item.p.table, out_c)});
          items.erase(items.begin() + at);
          items.insert(items.begin() + at, parts.begin(), parts.end());
        };
        if (need_j) split_item(j);
        if (need_i) split_item(i);
        changed = true;
      }
    }
  }
}

std::vector<Tagged> shatter_tagged(std::vector<Tagged> items,
                                   const std::vector<ResolvedEvent>& events) {
  EventIndex idx = index_events(events);

  // Every event must name a covered instance.
  for (const auto& e : events) {
    // projection() orders columns by sorted unique logvar name
    std::map<std::string, int> binding;
    bool consistent = true;
    for (std::size_t i = 0; i < e.prv.logvars.size(); ++i) {
      auto [it, fresh] = binding.emplace(e.prv.logvars[i], e.consts[i]);
      if (!fresh && it->second != e.consts[i]) consistent = false;
    }
    std::vector<int> key;
    for (const auto& [lv, c] : binding) key.push_back(c);
    bool covered = false;
    if (consistent) {
      for (const auto& item : items) {
        if (item.p.arg_index(e.prv) < 0) continue;
        auto proj = item.p.constraint.projection(e.prv.logvars);
        if (std::binary_search(proj.begin(), proj.end(), key)) {
          covered = true;
          break;
        }
      }
    }
    if (!covered)
      throw std::invalid_argument("evidence instance not covered: " +
                                  to_string(e.prv));
  }

  std::vector<Tagged> split;
  for (const auto& item : items)
    for (auto& part : split_by_signature(item.p, idx))
      split.push_back({item.group, std::move(part)});
  align(split);
  return split;
}

std::vector<Tagged> absorb_tagged(std::vector<Tagged> items,
                                  const std::vector<ResolvedEvent>& events) {
  EventIndex idx = index_events(events);
  for (auto& item : items) {
    bool again = true;
    while (again) {
      again = false;
      for (const auto& arg : item.p.args) {
        auto it = idx.find(arg);
        if (it == idx.end()) continue;
        const auto& observed = it->second;
        auto proj = item.p.constraint.projection(arg.logvars);
        int value = -2;  // -2 unset, -1 unobserved
        bool uniform = true;
        for (const auto& inst : proj) {
          auto ob = observed.find(inst);
          int v = ob == observed.end() ? -1 : ob->second;
          if (value == -2)
            value = v;
          else if (value != v)
            uniform = false;
        }
        if (!uniform)
          throw std::logic_error(
              "evidence not uniform over a shattered parfactor");
        if (value >= 0) {
          item.p = absorb(item.p, arg, arg.range[value]);
          again = true;
          break;
        }
      }
    }
  }
  return items;
}

}  // namespace

Model shatter(const Model& m, const std::vector<ResolvedEvent>& events) {
  std::vector<Tagged> items;
  items.reserve(m.parfactors.size());
  for (const auto& p : m.parfactors) items.push_back({0, p});
  items = shatter_tagged(std::move(items), events);
  Model out;
  out.logvars = m.logvars;
  for (auto& item : items) out.parfactors.push_back(std::move(item.p));
  return out;
}

Model apply_evidence(const Model& m, const std::vector<ResolvedEvent>& events) {
  std::vector<Tagged> items;
  items.reserve(m.parfactors.size());
  for (const auto& p : m.parfactors) items.push_back({0, p});
  items = absorb_tagged(shatter_tagged(std::move(items), events), events);
  Model out;
  out.logvars = m.logvars;
  for (auto& item : items) out.parfactors.push_back(std::move(item.p));
  return out;
}

std::vector<std::vector<Parfactor>> apply_evidence_grouped(
    const std::vector<std::vector<Parfactor>>& groups,
    const std::vector<ResolvedEvent>& events) {
  std::vector<Tagged> items;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const auto& p : groups[g])
      items.push_back({static_cast<int>(g), p});
  items = absorb_tagged(shatter_tagged(std::move(items), events), events);
  std::vector<std::vector<Parfactor>> out(groups.size());
  for (auto& item : items) out[item.group].push_back(std::move(item.p));
  return out;
}

// --- set-level elimination ----------------------------------------------------

std::vector<Parfactor> eliminate_prv(std::vector<Parfactor> set,
                                     const PRV& target) {
  std::vector<Parfactor> rest;
  std::map<std::vector<std::vector<int>>, std::vector<Parfactor>> by_class;
  for (auto& p : set) {
    if (p.arg_index(target) >= 0)
      by_class[p.constraint.projection(target.logvars)].push_back(
          std::move(p));
    else
      rest.push_back(std::move(p));
  }
  for (auto& [cls, members] : by_class) {
    Parfactor prod = std::move(members[0]);
    for (std::size_t i = 1; i < members.size(); ++i)
      prod = multiply(prod, members[i]);
    rest.push_back(sum_out(prod, target));
  }
  return rest;
}

std::vector<Parfactor> eliminate_all_except(std::vector<Parfactor> set,
                                            const std::vector<PRV>& keep) {
  std::set<PRV> keep_set(keep.begin(), keep.end());
  while (true) {
    std::map<PRV, int> counts;
    for (const auto& p : set)
      for (const auto& a : p.args)
        if (!keep_set.count(a)) ++counts[a];
    if (counts.empty()) return set;
    PRV pick = counts.begin()->first;
    int best = counts.begin()->second;
    for (const auto& [prv, n] : counts)
      if (n < best) {
        pick = prv;
        best = n;
      }
    set = eliminate_prv(std::move(set), pick);
  }
}

}  // namespace lifted
