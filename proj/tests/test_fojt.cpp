#include <algorithm>
#include <set>

#include "doctest.h"
#include "lifted/experiment.hpp"
#include "lifted/fojt.hpp"
#include "lifted/ground.hpp"
#include "lifted/ops.hpp"

using namespace lifted;

namespace {

PRV prv(const std::string& name, std::vector<std::string> lvs,
        std::optional<int> slice = std::nullopt) {
  PRV p;
  p.name = name;
  p.logvars = std::move(lvs);
  p.slice = slice;
  return p;
}

bool cluster_covers(const Parcluster& c, const PRV& p) {
  return std::find(c.prvs.begin(), c.prvs.end(), p) != c.prvs.end();
}

// Running intersection: for every PRV the clusters containing it must form
// a connected subtree.
void check_rip(const FOJTree& tree) {
  std::set<PRV> all;
  for (const auto& c : tree.clusters) all.insert(c.prvs.begin(), c.prvs.end());
  for (const auto& p : all) {
    std::vector<int> holders;
    for (const auto& c : tree.clusters)
      if (cluster_covers(c, p)) holders.push_back(c.id);
    std::set<int> reached{holders[0]};
    bool grew = true;
    while (grew) {
      grew = false;
      for (auto [a, b] : tree.edges) {
        const bool ha = std::count(holders.begin(), holders.end(), a) &&
                        reached.count(a);
        const bool hb = std::count(holders.begin(), holders.end(), b) &&
                        reached.count(b);
        if (ha && !reached.count(b) &&
            std::count(holders.begin(), holders.end(), b)) {
          reached.insert(b);
          grew = true;
        } else if (hb && !reached.count(a) &&
                   std::count(holders.begin(), holders.end(), a)) {
          reached.insert(a);
          grew = true;
        }
      }
    }
    CHECK(reached.size() == holders.size());
  }
}

}  // namespace

TEST_SUITE("fojt") {

TEST_CASE("forward_interface finds previous-slice PRVs in bridges") {
  PDM pdm = reputation_pdm(3, 2);
  auto iface = forward_interface(pdm.gtrans);
  REQUIRE(iface.size() == 2);
  CHECK(iface[0] == prv("A", {"X"}, 0));
  CHECK(iface[1] == prv("R", {"X"}, 0));
}

TEST_CASE("build_fojt produces a covering junction tree") {
  PDM pdm = reputation_pdm(3, 2);
  auto prev = forward_interface(pdm.gtrans);
  std::vector<PRV> cur;
  for (auto p : prev) {
    p.slice = 1;
    cur.push_back(p);
  }
  FOJTree tree = build_fojt(pdm.gtrans.parfactors, prev, cur);
  REQUIRE(!tree.clusters.empty());
  CHECK(tree.edges.size() == tree.clusters.size() - 1);
  CHECK(tree.in_cluster >= 0);
  CHECK(tree.out_cluster >= 0);
  for (const auto& p : prev)
    CHECK(cluster_covers(tree.clusters[tree.in_cluster], p));
  for (const auto& p : cur)
    CHECK(cluster_covers(tree.clusters[tree.out_cluster], p));
  check_rip(tree);

  // Every parfactor must live in a cluster covering its arguments.
  std::size_t assigned = 0;
  for (const auto& c : tree.clusters) {
    for (const auto& f : c.local) {
      for (const auto& a : f.args) CHECK(cluster_covers(c, a));
      ++assigned;
    }
  }
  CHECK(assigned == pdm.gtrans.parfactors.size());

  // Separators are the PRV intersections of their endpoints.
  for (std::size_t e = 0; e < tree.edges.size(); ++e) {
    const auto [a, b] = tree.edges[e];
    for (const auto& p : tree.separators[e]) {
      CHECK(cluster_covers(tree.clusters[a], p));
      CHECK(cluster_covers(tree.clusters[b], p));
    }
  }
}

TEST_CASE("build_fojt rejects an uncoverable interface") {
  Model g0 = reputation_g0(2, 1);
  CHECK_THROWS_AS(
      (void)build_fojt(g0.parfactors, {prv("Nope", {"X"}, 0)}, {}),
      std::invalid_argument);
}

TEST_CASE("calibrated clusters answer queries consistently") {
  Model g0 = reputation_g0(3, 2);
  FOJTree tree = build_fojt(g0.parfactors, {}, {});
  calibrate(tree);
  REQUIRE(tree.calibrated);

  const PRV a = prv("A", {"X"});
  std::vector<std::vector<double>> answers;
  for (const auto& c : tree.clusters) {
    if (!cluster_covers(c, a)) continue;
    auto belief = cluster_belief(tree, c.id);
    auto kept = eliminate_all_except(belief, {a});
    REQUIRE(kept.size() == 1);
    double z = kept[0].table[0] + kept[0].table[1];
    answers.push_back({kept[0].table[0] / z, kept[0].table[1] / z});
  }
  REQUIRE(!answers.empty());
  for (std::size_t i = 1; i < answers.size(); ++i)
    CHECK(compare_marginals(answers[0], answers[i]) < 1e-12);
}

TEST_CASE("tree_marginal matches the ground oracle") {
  Model g0 = reputation_g0(3, 2);
  FOJTree tree = build_fojt(g0.parfactors, {}, {});
  calibrate(tree);
  GroundModel gm = ground(g0);
  struct Case {
    PRV prv;
    std::vector<int> consts;
    AtomRef ref;
  };
  std::vector<Case> cases{
      {prv("R", {"X"}), {0}, {"R", {"p0"}, std::nullopt}},
      {prv("A", {"X"}), {2}, {"A", {"p2"}, std::nullopt}},
      {prv("Pub", {"X", "J"}), {1, 1}, {"Pub", {"p1", "j1"}, std::nullopt}},
  };
  for (const auto& c : cases) {
    auto lifted_marg = tree_marginal(tree, c.prv, c.consts);
    auto oracle = exact_marginal(gm, c.ref, {}, 64);
    CHECK(compare_marginals(lifted_marg, oracle) < 1e-12);
  }
}

TEST_CASE("tree_marginal validates its query") {
  Model g0 = reputation_g0(2, 1);
  FOJTree tree = build_fojt(g0.parfactors, {}, {});
  CHECK_THROWS_AS((void)tree_marginal(tree, prv("R", {"X"}), {0}),
                  std::logic_error);  // not calibrated yet
  calibrate(tree);
  CHECK_THROWS_AS((void)tree_marginal(tree, prv("R", {"X"}), {0, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)tree_marginal(tree, prv("Zz", {"X"}), {0}),
                  std::invalid_argument);
}

TEST_CASE("forward_message eliminates down to the interface") {
  PDM pdm = reputation_pdm(2, 2);
  auto prev = forward_interface(pdm.gtrans);
  // Slice-0 view of the initial model, as the filter uses at t = 0.
  Model g0 = pdm.g0;
  for (auto& p : g0.parfactors)
    for (auto& a : p.args) a.slice = 0;
  FOJTree tree = build_fojt(g0.parfactors, {}, prev);
  calibrate(tree);
  ForwardMessage msg = forward_message(tree, prev, 0);
  CHECK(msg.t == 0);
  REQUIRE(!msg.parfactors.empty());
  for (const auto& p : msg.parfactors) {
    double peak = 0;
    for (const auto& a : p.args) {
      CHECK(std::find(prev.begin(), prev.end(), a) != prev.end());
    }
    for (double v : p.table) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
  }
}

}  // TEST_SUITE
