#include "lifted/ground.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace lifted {

std::string to_string(const GroundAtom& a) {
  std::ostringstream os;
  os << a.name;
  if (!a.consts.empty()) {
    os << '(';
    for (std::size_t i = 0; i < a.consts.size(); ++i) {
      if (i) os << ',';
      os << a.consts[i];
    }
    os << ')';
  }
  if (a.slice) os << '@' << *a.slice;
  return os.str();
}

int GroundModel::atom_index(const AtomRef& ref) const {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    if (a.name == ref.prv && a.consts == ref.consts && a.slice == ref.slice)
      return static_cast<int>(i);
  }
  return -1;
}

GroundModel ground(const Model& m) {
  GroundModel gm;
  std::map<std::tuple<std::string, std::vector<std::string>, std::optional<int>>,
           int>
      index;
  auto intern = [&](const PRV& prv, const std::vector<std::string>& consts) {
    auto key = std::make_tuple(prv.name, consts, prv.slice);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(gm.atoms.size());
    gm.atoms.push_back(GroundAtom{prv.name, consts, prv.slice, prv.range});
    index.emplace(key, id);
    return id;
  };

  for (const auto& p : m.parfactors) {
    for (const auto& tuple : p.constraint.expanded()) {
      GroundFactor f;
      f.vars.reserve(p.args.size());
      for (const auto& arg : p.args) {
        std::vector<std::string> consts;
        consts.reserve(arg.logvars.size());
        for (const auto& lv : arg.logvars) {
          int col = p.constraint.column(lv);
          const LogVar* decl = m.find_logvar(lv);
          if (col < 0 || !decl)
            throw std::invalid_argument("unbound logvar " + lv);
          consts.push_back(decl->domain[tuple[col]]);
        }
        f.vars.push_back(intern(arg, consts));
      }
      f.table = p.table;
      gm.factors.push_back(std::move(f));
    }
    if (p.args.empty()) {
      GroundFactor f;
      f.table = p.table;
      gm.factors.push_back(std::move(f));
    }
  }
  return gm;
}

namespace {

std::vector<int> factor_dims(const GroundModel& gm, const GroundFactor& f) {
  std::vector<int> dims;
  dims.reserve(f.vars.size());
  for (int v : f.vars)
    dims.push_back(static_cast<int>(gm.atoms[v].range.size()));
  return dims;
}

// Slices observed axes out of a factor.
GroundFactor condition(const GroundModel& gm, const GroundFactor& f,
                       const std::map<int, int>& observed) {
  bool any = false;
  for (int v : f.vars)
    if (observed.count(v)) any = true;
  if (!any) return f;

  GroundFactor out;
  std::vector<int> dims = factor_dims(gm, f);
  std::vector<int> out_dims;
  for (std::size_t i = 0; i < f.vars.size(); ++i)
    if (!observed.count(f.vars[i])) {
      out.vars.push_back(f.vars[i]);
      out_dims.push_back(dims[i]);
    }
  out.table.assign(table_size(out_dims), 0.0);
  auto strides = row_major_strides(dims);
  std::vector<int> digits(out_dims.size(), 0);
  std::size_t dst = 0;
  do {
    std::size_t src = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
      auto it = observed.find(f.vars[i]);
      int digit = it != observed.end() ? it->second : digits[j++];
      src += static_cast<std::size_t>(digit) * strides[i];
    }
    out.table[dst++] = f.table[src];
  } while (next_digits(digits, out_dims));
  return out;
}

GroundFactor multiply_factors(const GroundModel& gm, const GroundFactor& a,
                              const GroundFactor& b) {
  GroundFactor out;
  out.vars = a.vars;
  for (int v : b.vars)
    if (std::find(out.vars.begin(), out.vars.end(), v) == out.vars.end())
      out.vars.push_back(v);
  std::sort(out.vars.begin(), out.vars.end());

  std::vector<int> out_dims = factor_dims(gm, out);
  auto pos_map = [&](const GroundFactor& f) {
    std::vector<int> pos;
    pos.reserve(f.vars.size());
    for (int v : f.vars) {
      auto it = std::find(out.vars.begin(), out.vars.end(), v);
      pos.push_back(static_cast<int>(it - out.vars.begin()));
    }
    return pos;
  };
  auto pa = pos_map(a), pb = pos_map(b);
  auto sa = row_major_strides(factor_dims(gm, a));
  auto sb = row_major_strides(factor_dims(gm, b));

  out.table.assign(table_size(out_dims), 0.0);
  std::vector<int> digits(out_dims.size(), 0);
  std::size_t dst = 0;
  do {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < pa.size(); ++i)
      ia += static_cast<std::size_t>(digits[pa[i]]) * sa[i];
    for (std::size_t i = 0; i < pb.size(); ++i)
      ib += static_cast<std::size_t>(digits[pb[i]]) * sb[i];
    out.table[dst++] = a.table[ia] * b.table[ib];
  } while (next_digits(digits, out_dims));
  return out;
}

GroundFactor sum_out_var(const GroundModel& gm, const GroundFactor& f, int v) {
  auto it = std::find(f.vars.begin(), f.vars.end(), v);
  if (it == f.vars.end()) return f;
  std::size_t axis = static_cast<std::size_t>(it - f.vars.begin());
  std::vector<int> dims = factor_dims(gm, f);
  GroundFactor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + axis);
  std::vector<int> out_dims = dims;
  out_dims.erase(out_dims.begin() + axis);
  out.table.assign(table_size(out_dims), 0.0);
  auto strides = row_major_strides(dims);
  std::vector<int> digits(out_dims.size(), 0);
  std::size_t dst = 0;
  do {
    std::size_t base = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (i != axis) base += static_cast<std::size_t>(digits[j++]) * strides[i];
    double acc = 0;
    for (int k = 0; k < dims[axis]; ++k)
      acc += f.table[base + static_cast<std::size_t>(k) * strides[axis]];
    out.table[dst++] = acc;
  } while (next_digits(digits, out_dims));
  return out;
}

void rescale(GroundFactor& f) {
  double mx = 0;
  for (double v : f.table) mx = std::max(mx, v);
  if (mx > 0)
    for (double& v : f.table) v /= mx;
}

std::map<int, int> resolve_observed(const GroundModel& gm,
                                    const std::vector<GroundEvent>& evidence) {
  std::map<int, int> observed;
  for (const auto& e : evidence) {
    int id = gm.atom_index(e.at);
    if (id < 0)
      throw std::invalid_argument("evidence on unknown ground randvar " +
                                  e.at.prv);
    const auto& range = gm.atoms[id].range;
    auto it = std::find(range.begin(), range.end(), e.value);
    if (it == range.end())
      throw std::invalid_argument("evidence value " + e.value +
                                  " not in range of " + e.at.prv);
    int v = static_cast<int>(it - range.begin());
    auto [existing, fresh] = observed.emplace(id, v);
    if (!fresh && existing->second != v)
      throw std::invalid_argument("contradictory evidence on " + e.at.prv);
  }
  return observed;
}

std::vector<double> run_ve(const GroundModel& gm, int target,
                           const std::map<int, int>& observed,
                           std::vector<int> order) {
  std::vector<GroundFactor> factors;
  factors.reserve(gm.factors.size());
  for (const auto& f : gm.factors) factors.push_back(condition(gm, f, observed));

  for (int v : order) {
    std::vector<GroundFactor> touching;
    std::vector<GroundFactor> rest;
    for (auto& f : factors) {
      if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end())
        touching.push_back(std::move(f));
      else
        rest.push_back(std::move(f));
    }
    if (touching.empty()) {
      factors = std::move(rest);
      continue;
    }
    GroundFactor prod = std::move(touching[0]);
    for (std::size_t i = 1; i < touching.size(); ++i)
      prod = multiply_factors(gm, prod, touching[i]);
    GroundFactor reduced = sum_out_var(gm, prod, v);
    rescale(reduced);
    rest.push_back(std::move(reduced));
    factors = std::move(rest);
  }

  int n = static_cast<int>(gm.atoms[target].range.size());
  std::vector<double> marginal(n, 1.0);
  for (const auto& f : factors) {
    if (f.vars.empty()) {
      for (double& m : marginal) m *= f.table[0];
    } else if (f.vars.size() == 1 && f.vars[0] == target) {
      for (int k = 0; k < n; ++k) marginal[k] *= f.table[k];
    } else {
      throw std::logic_error("variable elimination left a non-target factor");
    }
  }
  double z = 0;
  for (double m : marginal) z += m;
  if (!(z > 0))
    throw std::runtime_error("evidence has zero probability under the model");
  for (double& m : marginal) m /= z;
  return marginal;
}

std::vector<int> min_degree_order(const GroundModel& gm, int target,
                                  const std::map<int, int>& observed) {
  std::set<int> active;
  for (std::size_t i = 0; i < gm.atoms.size(); ++i) {
    int v = static_cast<int>(i);
    if (v != target && !observed.count(v)) active.insert(v);
  }
  std::map<int, std::set<int>> adj;
  for (const auto& f : gm.factors)
    for (int a : f.vars)
      for (int b : f.vars)
        if (a != b && active.count(a) && active.count(b)) adj[a].insert(b);

  std::vector<int> order;
  order.reserve(active.size());
  while (!active.empty()) {
    int best = -1;
    std::size_t best_deg = 0;
    for (int v : active) {
      std::size_t deg = adj[v].size();
      if (best < 0 || deg < best_deg || (deg == best_deg && v < best)) {
        best = v;
        best_deg = deg;
      }
    }
    order.push_back(best);
    active.erase(best);
    auto nbrs = adj[best];
    for (int a : nbrs) {
      adj[a].erase(best);
      for (int b : nbrs)
        if (a != b) adj[a].insert(b);
    }
    adj.erase(best);
  }
  return order;
}

}  // namespace

std::vector<double> exact_marginal(const GroundModel& gm, const AtomRef& target,
                                   const std::vector<GroundEvent>& evidence,
                                   int budget) {
  if (static_cast<int>(gm.atoms.size()) > budget)
    throw unsupported_operation(
        "oracle budget exceeded: " + std::to_string(gm.atoms.size()) +
        " ground randvars > " + std::to_string(budget));
  int t = gm.atom_index(target);
  if (t < 0) throw std::invalid_argument("unknown query randvar " + target.prv);
  auto observed = resolve_observed(gm, evidence);
  if (auto it = observed.find(t); it != observed.end()) {
    std::vector<double> point(gm.atoms[t].range.size(), 0.0);
    point[it->second] = 1.0;
    return point;
  }
  return run_ve(gm, t, observed, min_degree_order(gm, t, observed));
}

std::vector<double> exact_marginal_with_order(
    const GroundModel& gm, const AtomRef& target,
    const std::vector<GroundEvent>& evidence,
    const std::vector<int>& elimination_order, int budget) {
  if (static_cast<int>(gm.atoms.size()) > budget)
    throw unsupported_operation("oracle budget exceeded");
  int t = gm.atom_index(target);
  if (t < 0) throw std::invalid_argument("unknown query randvar " + target.prv);
  auto observed = resolve_observed(gm, evidence);
  if (auto it = observed.find(t); it != observed.end()) {
    std::vector<double> point(gm.atoms[t].range.size(), 0.0);
    point[it->second] = 1.0;
    return point;
  }
  return run_ve(gm, t, observed, elimination_order);
}

std::vector<double> exact_marginal_enumeration(
    const GroundModel& gm, const AtomRef& target,
    const std::vector<GroundEvent>& evidence, int budget) {
  if (static_cast<int>(gm.atoms.size()) > budget)
    throw unsupported_operation("enumeration limited to " +
                                std::to_string(budget) + " ground randvars");
  int t = gm.atom_index(target);
  if (t < 0) throw std::invalid_argument("unknown query randvar " + target.prv);
  auto observed = resolve_observed(gm, evidence);

  std::vector<int> dims;
  dims.reserve(gm.atoms.size());
  for (const auto& a : gm.atoms) dims.push_back(static_cast<int>(a.range.size()));
  std::vector<std::vector<std::size_t>> strides;
  strides.reserve(gm.factors.size());
  for (const auto& f : gm.factors)
    strides.push_back(row_major_strides(factor_dims(gm, f)));

  // Log-space joint, two passes to keep the accumulation stable.
  auto logp = [&](const std::vector<int>& assign) {
    double acc = 0;
    for (std::size_t fi = 0; fi < gm.factors.size(); ++fi) {
      const auto& f = gm.factors[fi];
      std::size_t idx = 0;
      for (std::size_t i = 0; i < f.vars.size(); ++i)
        idx += static_cast<std::size_t>(assign[f.vars[i]]) * strides[fi][i];
      double v = f.table[idx];
      if (v == 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(v);
    }
    return acc;
  };
  auto consistent = [&](const std::vector<int>& assign) {
    for (const auto& [v, val] : observed)
      if (assign[v] != val) return false;
    return true;
  };

  std::vector<int> assign(dims.size(), 0);
  double max_log = -std::numeric_limits<double>::infinity();
  do {
    if (!consistent(assign)) continue;
    max_log = std::max(max_log, logp(assign));
  } while (next_digits(assign, dims));
  if (max_log == -std::numeric_limits<double>::infinity())
    throw std::runtime_error("evidence has zero probability under the model");

  std::vector<double> marginal(dims[t], 0.0);
  std::fill(assign.begin(), assign.end(), 0);
  do {
    if (!consistent(assign)) continue;
    double lp = logp(assign);
    if (lp == -std::numeric_limits<double>::infinity()) continue;
    marginal[assign[t]] += std::exp(lp - max_log);
  } while (next_digits(assign, dims));
  double z = 0;
  for (double m : marginal) z += m;
  for (double& m : marginal) m /= z;
  return marginal;
}

double compare_marginals(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("marginal length mismatch");
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace lifted
