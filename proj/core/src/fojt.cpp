#include "lifted/fojt.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "lifted/ground.hpp"
#include "lifted/ops.hpp"

namespace lifted {

std::vector<int> FOJTree::neighbours(int id) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == id) out.push_back(b);
    if (b == id) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<PRV>& FOJTree::separator_between(int a, int b) const {
  for (std::size_t e = 0; e < edges.size(); ++e)
    if ((edges[e].first == a && edges[e].second == b) ||
        (edges[e].first == b && edges[e].second == a))
      return separators[e];
  throw std::invalid_argument("clusters are not adjacent");
}

std::vector<PRV> forward_interface(const Model& gtrans) {
  std::set<PRV> out;
  for (const auto& p : gtrans.parfactors) {
    bool cur = false;
    for (const auto& a : p.args)
      if (a.slice && *a.slice == 1) cur = true;
    if (!cur) continue;
    for (const auto& a : p.args)
      if (a.slice && *a.slice == 0) out.insert(a);
  }
  return {out.begin(), out.end()};
}

FOJTree build_fojt(const std::vector<Parfactor>& parfactors,
                   const std::vector<PRV>& force_in,
                   const std::vector<PRV>& force_out) {
  std::vector<PRV> nodes;
  {
    std::set<PRV> s;
    for (const auto& p : parfactors)
      for (const auto& a : p.args) s.insert(a);
    nodes.assign(s.begin(), s.end());
  }
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw std::invalid_argument("no PRVs to build a tree over");
  auto node_of = [&](const PRV& prv) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), prv);
    if (it == nodes.end() || !(*it == prv))
      throw std::invalid_argument("interface PRV " + to_string(prv) +
                                  " missing from the step model");
    return static_cast<int>(it - nodes.begin());
  };

  std::vector<std::set<int>> adj(n);
  auto connect = [&](const std::vector<int>& group) {
    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        adj[group[i]].insert(group[j]);
        adj[group[j]].insert(group[i]);
      }
  };
  for (const auto& p : parfactors) {
    std::vector<int> g;
    for (const auto& a : p.args) g.push_back(node_of(a));
    connect(g);
  }
  auto force = [&](const std::vector<PRV>& prvs) {
    std::vector<int> g;
    for (const auto& prv : prvs) g.push_back(node_of(prv));
    connect(g);
  };
  if (!force_in.empty()) force(force_in);
  if (!force_out.empty()) force(force_out);

  // Min-fill elimination; ties go to the smallest PRV.
  std::vector<bool> alive(n, true);
  std::vector<std::vector<int>> cliques;
  for (int round = 0; round < n; ++round) {
    int best = -1;
    long long best_fill = -1;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      std::vector<int> nb;
      for (int u : adj[v])
        if (alive[u]) nb.push_back(u);
      long long fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
          if (!adj[nb[i]].count(nb[j])) ++fill;
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<int> clique{best};
    for (int u : adj[best])
      if (alive[u]) clique.push_back(u);
    std::sort(clique.begin(), clique.end());
    cliques.push_back(clique);
    for (std::size_t i = 0; i < clique.size(); ++i)
      for (std::size_t j = i + 1; j < clique.size(); ++j) {
        adj[clique[i]].insert(clique[j]);
        adj[clique[j]].insert(clique[i]);
      }
    alive[best] = false;
  }

  std::vector<std::vector<int>> maximal;
  for (const auto& c : cliques) {
    bool contained = false;
    for (const auto& m : maximal)
      if (std::includes(m.begin(), m.end(), c.begin(), c.end())) {
        contained = true;
        break;
      }
    if (!contained) maximal.push_back(c);
  }

  FOJTree tree;
  tree.clusters.resize(maximal.size());
  for (std::size_t i = 0; i < maximal.size(); ++i) {
    tree.clusters[i].id = static_cast<int>(i);
    for (int v : maximal[i]) tree.clusters[i].prvs.push_back(nodes[v]);
  }

  // Maximum spanning tree on separator sizes.
  struct Cand {
    int size, i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < maximal.size(); ++i)
    for (std::size_t j = i + 1; j < maximal.size(); ++j) {
      std::vector<int> sep;
      std::set_intersection(maximal[i].begin(), maximal[i].end(),
                            maximal[j].begin(), maximal[j].end(),
                            std::back_inserter(sep));
      if (!sep.empty())
        cands.push_back({static_cast<int>(sep.size()), static_cast<int>(i),
                         static_cast<int>(j)});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.size != b.size) return a.size > b.size;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<int> comp(maximal.size());
  for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (const auto& c : cands) {
    int a = find(c.i), b = find(c.j);
    if (a == b) continue;
    comp[a] = b;
    tree.edges.emplace_back(c.i, c.j);
    std::vector<PRV> sep;
    std::set_intersection(tree.clusters[c.i].prvs.begin(),
                          tree.clusters[c.i].prvs.end(),
                          tree.clusters[c.j].prvs.begin(),
                          tree.clusters[c.j].prvs.end(),
                          std::back_inserter(sep));
    tree.separators.push_back(std::move(sep));
  }

  auto covering = [&](const std::vector<PRV>& prvs) {
    for (const auto& c : tree.clusters) {
      bool all = true;
      for (const auto& prv : prvs)
        if (!std::binary_search(c.prvs.begin(), c.prvs.end(), prv)) {
          all = false;
          break;
        }
      if (all) return c.id;
    }
    throw std::logic_error("no cluster covers a forced interface");
  };
  if (!force_in.empty()) tree.in_cluster = covering(force_in);
  if (!force_out.empty()) tree.out_cluster = covering(force_out);

  for (const auto& p : parfactors) {
    std::vector<PRV> scope = p.args;
    std::sort(scope.begin(), scope.end());
    tree.clusters[covering(scope)].local.push_back(p);
  }
  return tree;
}

namespace {

std::vector<Parfactor> message_inputs(const FOJTree& tree, int from,
                                      int except) {
  std::vector<Parfactor> set = tree.clusters[from].local;
  for (const auto& [nbr, msg] : tree.clusters[from].received) {
    if (nbr == except) continue;
    set.insert(set.end(), msg.begin(), msg.end());
  }
  return set;
}

}  // namespace

void calibrate(FOJTree& tree) {
  for (auto& c : tree.clusters) c.received.clear();
  const int n = static_cast<int>(tree.clusters.size());
  std::vector<int> parent(n, -1), order;
  std::vector<bool> seen(n, false);
  auto bfs = [&](int root) {
    seen[root] = true;
    order.push_back(root);
    for (std::size_t qi = order.size() - 1; qi < order.size(); ++qi) {
      int v = order[qi];
      for (int u : tree.neighbours(v)) {
        if (seen[u]) continue;
        seen[u] = true;
        parent[u] = v;
        order.push_back(u);
      }
    }
  };
  if (tree.out_cluster >= 0) bfs(tree.out_cluster);
  for (int i = 0; i < n; ++i)
    if (!seen[i]) bfs(i);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (parent[v] < 0) continue;
    auto msg = eliminate_all_except(message_inputs(tree, v, parent[v]),
                                    tree.separator_between(v, parent[v]));
    tree.clusters[parent[v]].received[v] = std::move(msg);
  }
  for (int v : order) {
    for (int u : tree.neighbours(v)) {
      if (parent[u] != v) continue;
      auto msg = eliminate_all_except(message_inputs(tree, v, u),
                                      tree.separator_between(v, u));
      tree.clusters[u].received[v] = std::move(msg);
    }
  }
  tree.calibrated = true;
}

std::vector<Parfactor> cluster_belief(const FOJTree& tree, int id) {
  return message_inputs(tree, id, -1);
}

namespace {

// Sorted constant indices keyed by unique logvar, mirroring projection();
// nullopt when the same logvar is bound to two different constants.
std::optional<std::vector<int>> projection_key(
    const std::vector<std::string>& logvars, const std::vector<int>& consts) {
  std::map<std::string, int> binding;
  for (std::size_t i = 0; i < logvars.size(); ++i) {
    auto [it, fresh] = binding.emplace(logvars[i], consts[i]);
    if (!fresh && it->second != consts[i]) return std::nullopt;
  }
  std::vector<int> key;
  key.reserve(binding.size());
  for (const auto& [lv, c] : binding) key.push_back(c);
  return key;
}

std::vector<Parfactor> component_of(const std::vector<Parfactor>& belief,
                                    const PRV& prv) {
  const int n = static_cast<int>(belief.size());
  std::vector<bool> in_comp(n, false);
  std::vector<int> queue;
  for (int i = 0; i < n; ++i)
    if (belief[i].arg_index(prv) >= 0) {
      in_comp[i] = true;
      queue.push_back(i);
    }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const auto& cur = belief[queue[qi]];
    for (int j = 0; j < n; ++j) {
      if (in_comp[j]) continue;
      for (const auto& a : cur.args)
        if (belief[j].arg_index(a) >= 0) {
          in_comp[j] = true;
          queue.push_back(j);
          break;
        }
    }
  }
  std::vector<Parfactor> comp;
  for (int i = 0; i < n; ++i)
    if (in_comp[i]) comp.push_back(belief[i]);
  return comp;
}

std::vector<double> ground_component_marginal(
    const std::vector<Parfactor>& component, const PRV& prv,
    const std::vector<int>& consts) {
  Model m;
  std::map<std::string, int> sizes;
  for (const auto& p : component)
    for (const auto& s : p.constraint.slots) {
      auto [it, fresh] = sizes.emplace(s.logvar, s.domain_size);
      if (!fresh && it->second < s.domain_size) it->second = s.domain_size;
    }
  for (const auto& [name, size] : sizes) {
    LogVar lv;
    lv.name = name;
    for (int i = 0; i < size; ++i) lv.domain.push_back(std::to_string(i));
    m.logvars.push_back(std::move(lv));
  }
  m.parfactors = component;
  GroundModel gm = ground(m);
  AtomRef ref;
  ref.prv = prv.name;
  ref.slice = prv.slice;
  for (int c : consts) ref.consts.push_back(std::to_string(c));
  return exact_marginal(gm, ref, {});
}

}  // namespace

std::vector<double> tree_marginal(const FOJTree& tree, const PRV& prv,
                                  const std::vector<int>& consts) {
  if (!tree.calibrated) throw std::logic_error("tree is not calibrated");
  if (consts.size() != prv.logvars.size())
    throw std::invalid_argument("constant arity mismatch for " +
                                to_string(prv));
  int cid = -1;
  for (const auto& c : tree.clusters)
    if (std::binary_search(c.prvs.begin(), c.prvs.end(), prv)) {
      cid = c.id;
      break;
    }
  if (cid < 0)
    throw std::invalid_argument("PRV " + to_string(prv) +
                                " is not covered by the tree");
  auto key = projection_key(prv.logvars, consts);
  if (!key) throw std::invalid_argument("inconsistent repeated constants");

  auto component = component_of(cluster_belief(tree, cid), prv);
  if (component.empty())
    throw std::runtime_error("no parfactor mentions " + to_string(prv));
  try {
    auto kept = eliminate_all_except(component, {prv});
    std::vector<double> result(prv.range.size(), 1.0);
    bool found = false;
    for (const auto& p : kept) {
      if (p.args.empty()) continue;
      auto proj = p.constraint.projection(prv.logvars);
      if (!std::binary_search(proj.begin(), proj.end(), *key)) continue;
      found = true;
      for (std::size_t r = 0; r < result.size(); ++r) result[r] *= p.table[r];
    }
    if (!found)
      throw std::runtime_error("query instance not covered: " +
                               to_string(prv));
    double z = 0;
    for (double v : result) z += v;
    if (z <= 0) throw std::runtime_error("zero normaliser for " +
                                         to_string(prv));
    for (double& v : result) v /= z;
    return result;
  } catch (const unsupported_operation&) {
    return ground_component_marginal(component, prv, consts);
  }
}

ForwardMessage forward_message(const FOJTree& tree,
                               const std::vector<PRV>& out_interface, int t) {
  if (!tree.calibrated) throw std::logic_error("tree is not calibrated");
  if (tree.out_cluster < 0) throw std::logic_error("tree has no out-cluster");
  auto kept = eliminate_all_except(cluster_belief(tree, tree.out_cluster),
                                   out_interface);
  ForwardMessage msg;
  msg.t = t;
  for (auto& p : kept) {
    if (p.args.empty()) continue;  // constants carry no information
    double mx = 0;
    for (double v : p.table) mx = std::max(mx, v);
    if (mx > 0)
      for (double& v : p.table) v /= mx;
    msg.parfactors.push_back(std::move(p));
  }
  return msg;
}

}  // namespace lifted
