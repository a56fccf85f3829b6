#include "lifted/tame.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lifted/ops.hpp"
#include "lifted/stats.hpp"

namespace lifted {

std::vector<Partition> partition_by_logvars(
    const std::vector<Parfactor>& parfactors) {
  std::map<std::vector<std::string>, std::vector<Parfactor>> by_lvs;
  for (const auto& p : parfactors) by_lvs[p.logvar_names()].push_back(p);
  std::vector<Partition> out;
  out.reserve(by_lvs.size());
  for (auto& [lvs, members] : by_lvs)
    out.push_back({lvs, std::move(members)});
  return out;
}

std::vector<Parfactor> combine_overlapping(
    const std::vector<Parfactor>& members) {
  std::vector<Parfactor> products;
  for (const auto& p : members) {
    bool placed = false;
    for (auto& prod : products) {
      if (prod.constraint.same_slots(p.constraint) &&
          prod.constraint.equal_set(p.constraint)) {
        prod = multiply(prod, p);
        placed = true;
        break;
      }
      if (!prod.constraint.disjoint_with(p.constraint))
        throw unsupported_operation(
            "partially overlapping constraints in one partition");
    }
    if (!placed) products.push_back(p);
  }
  return products;
}

double rsim(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("rsim needs equal-length potentials");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return na == nb ? 0.0 : 1.0;
  double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
  return std::min(1.0, std::max(0.0, d));
}

double rsim(const Parfactor& a, const Parfactor& b) {
  if (a.args != b.args)
    throw std::invalid_argument("rsim needs identical argument lists");
  return rsim(a.table, b.table);
}

DbscanResult dbscan(const std::vector<Parfactor>& points, double epsilon,
                    int min_pts) {
  const int n = static_cast<int>(points.size());
  constexpr int kUndef = -2, kNoise = -1;
  std::vector<int> label(n, kUndef);
  auto neighbours = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
      if (points[j].args == points[i].args &&
          rsim(points[i].table, points[j].table) <= epsilon)
        out.push_back(j);
    return out;
  };
  int next_cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (label[i] != kUndef) continue;
    auto seed = neighbours(i);
    if (static_cast<int>(seed.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int cid = next_cluster++;
    label[i] = cid;
    std::vector<int> queue(seed.begin(), seed.end());
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int q = queue[qi];
      if (label[q] == kNoise) label[q] = cid;  // border point
      if (label[q] != kUndef) continue;
      label[q] = cid;
      auto nq = neighbours(q);
      if (static_cast<int>(nq.size()) >= min_pts)
        queue.insert(queue.end(), nq.begin(), nq.end());
    }
  }
  DbscanResult res;
  res.clusters.resize(next_cluster);
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0)
      res.clusters[label[i]].push_back(i);
    else
      res.noise.push_back(i);
  }
  return res;
}

Parfactor mean_parfactor(const std::vector<Parfactor>& cluster) {
  if (cluster.empty())
    throw std::invalid_argument("mean of an empty cluster");
  const auto& first = cluster.front();
  for (std::size_t i = 1; i < cluster.size(); ++i) {
    if (cluster[i].args != first.args)
      throw std::invalid_argument("mean needs identical argument lists");
    for (std::size_t j = 0; j < i; ++j)
      if (!cluster[i].constraint.disjoint_with(cluster[j].constraint))
        throw std::invalid_argument("mean needs disjoint constraints");
  }
  std::vector<double> table(first.table.size(), 0.0);
  double total = 0;
  Constraint united = first.constraint;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const double w = static_cast<double>(gr(cluster[i]));
    total += w;
    for (std::size_t k = 0; k < table.size(); ++k)
      table[k] += w * cluster[i].table[k];
    if (i > 0) united = united.unite(cluster[i].constraint);
  }
  for (double& v : table) v /= total;
  return Parfactor(first.args, std::move(table), std::move(united));
}

std::string to_string(GateDecision d) {
  switch (d) {
    case GateDecision::reject: return "reject";
    case GateDecision::accept: return "accept";
    case GateDecision::single_cluster: return "single_cluster";
    case GateDecision::no_clusters: return "no_clusters";
  }
  return "?";
}

ClusterReport anova(const std::vector<std::vector<Parfactor>>& clusters,
                    double alpha) {
  const int l = static_cast<int>(clusters.size());
  if (l < 2) throw std::invalid_argument("anova needs at least two clusters");
  ClusterReport rep;
  rep.clusters = clusters;
  std::vector<Parfactor> all;
  for (const auto& k : clusters) {
    rep.cluster_means.push_back(mean_parfactor(k));
    all.insert(all.end(), k.begin(), k.end());
  }
  rep.overall_mean = mean_parfactor(all);
  long long m = 0;
  for (const auto& p : all) m += gr(p);
  rep.total_groundings = m;
  if (m <= l)
    throw std::invalid_argument("anova needs more groundings than clusters");

  double between = 0, within = 0;
  for (int k = 0; k < l; ++k) {
    const auto& mean_k = rep.cluster_means[k];
    const double dk = rsim(mean_k, *rep.overall_mean);
    between += static_cast<double>(gr(mean_k)) * dk * dk;
    for (const auto& g : clusters[k]) {
      const double dg = rsim(g, mean_k);
      within += static_cast<double>(gr(g)) * dg * dg;
    }
  }
  rep.msg = between / (l - 1);
  rep.mse = within / static_cast<double>(m - l);
  if (rep.mse == 0 && rep.msg == 0) {
    rep.decision = GateDecision::accept;
  } else if (rep.mse == 0) {
    rep.decision = GateDecision::reject;
  } else {
    rep.f = rep.msg / rep.mse;
    rep.f_crit = f_critical(alpha, l - 1, static_cast<int>(m - l));
    rep.decision =
        rep.f > rep.f_crit ? GateDecision::reject : GateDecision::accept;
  }
  return rep;
}

std::pair<std::vector<Parfactor>, std::vector<ClusterReport>> tame(
    const std::vector<Parfactor>& parfactors, const TameConfig& cfg) {
  std::vector<Parfactor> out;
  std::vector<ClusterReport> reports;
  for (const auto& partition : partition_by_logvars(parfactors)) {
    auto combined = combine_overlapping(partition.members);

    // Originals feeding each product, keyed by the product's constraint.
    auto originals_of = [&](const Parfactor& prod) {
      std::vector<Parfactor> sources;
      for (const auto& m : partition.members)
        if (m.constraint.same_slots(prod.constraint) &&
            m.constraint.equal_set(prod.constraint))
          sources.push_back(m);
      return sources;
    };

    std::map<std::vector<PRV>, std::vector<int>> by_args;
    for (std::size_t i = 0; i < combined.size(); ++i)
      by_args[combined[i].args].push_back(static_cast<int>(i));

    for (const auto& [args, idxs] : by_args) {
      std::vector<Parfactor> points;
      points.reserve(idxs.size());
      for (int i : idxs) points.push_back(combined[i]);
      auto res = dbscan(points, cfg.epsilon);

      ClusterReport rep;
      int originals_in = 0;
      for (const auto& p : points)
        originals_in += static_cast<int>(originals_of(p).size());
      const int l = static_cast<int>(res.clusters.size());
      if (l >= 2) {
        std::vector<std::vector<Parfactor>> clusters(l);
        for (int k = 0; k < l; ++k)
          for (int i : res.clusters[k]) clusters[k].push_back(points[i]);
        rep = anova(clusters, cfg.alpha);
        rep.merged =
            !cfg.significance_gate || rep.decision == GateDecision::reject;
      } else if (l == 1) {
        rep.decision = GateDecision::single_cluster;
        rep.merged = true;
        rep.clusters.resize(1);
        for (int i : res.clusters[0]) rep.clusters[0].push_back(points[i]);
        rep.cluster_means.push_back(mean_parfactor(rep.clusters[0]));
        for (const auto& p : rep.clusters[0]) rep.total_groundings += gr(p);
      } else {
        rep.decision = GateDecision::no_clusters;
        rep.merged = false;
      }
      for (int i : res.noise) rep.noise.push_back(points[i]);
      rep.partition_logvars = partition.logvars;
      rep.arguments = args;
      rep.groups_before = originals_in;

      if (rep.merged) {
        for (const auto& mean : rep.cluster_means) out.push_back(mean);
        for (const auto& p : rep.noise) out.push_back(p);
        rep.groups_after =
            static_cast<int>(rep.cluster_means.size() + rep.noise.size());
      } else {
        int emitted = 0;
        for (const auto& p : points)
          for (auto& src : originals_of(p)) {
            out.push_back(std::move(src));
            ++emitted;
          }
        rep.groups_after = emitted;
      }
      reports.push_back(std::move(rep));
    }
  }
  return {std::move(out), std::move(reports)};
}

}  // namespace lifted
