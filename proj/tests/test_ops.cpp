#include <cmath>

#include "doctest.h"
#include "lifted/experiment.hpp"
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

// Ground marginals of every atom still present in `b` must agree with the
// original model `a`.
void check_same_distribution(const Model& a, const Model& b,
                             double tol = 1e-12) {
  GroundModel ga = ground(a);
  GroundModel gb = ground(b);
  int compared = 0;
  for (const auto& atom : gb.atoms) {
    AtomRef ref{atom.name, atom.consts, atom.slice};
    if (ga.atom_index(ref) < 0) continue;
    auto ma = exact_marginal(ga, ref, {}, 64);
    auto mb = exact_marginal(gb, ref, {}, 64);
    CHECK(compare_marginals(ma, mb) < tol);
    ++compared;
  }
  CHECK(compared > 0);
}

}  // namespace

TEST_SUITE("ops") {

TEST_CASE("multiply with identical arguments is pointwise") {
  Constraint c = Constraint::top({{"X", 3}});
  Parfactor a({prv("A", {"X"})}, {2, 3}, c);
  Parfactor b({prv("A", {"X"})}, {5, 7}, c);
  Parfactor p = multiply(a, b);
  CHECK(p.table == std::vector<double>{10, 21});
  CHECK(p.constraint.gr() == 3);
}

TEST_CASE("multiply joins disjoint argument sets") {
  Constraint c = Constraint::top({{"X", 2}});
  Parfactor a({prv("A", {"X"})}, {2, 3}, c);
  Parfactor b({prv("B", {"X"})}, {5, 7}, c);
  Parfactor p = multiply(a, b);
  REQUIRE(p.args.size() == 2);
  CHECK(p.table == std::vector<double>{10, 14, 15, 21});
}

TEST_CASE("grounding-ratio exponents preserve the distribution") {
  // a ranges over X alone, b over (X, Y): a enters the joined constraint
  // with exponent gr(a)/gr(join) = 1/2 per binding.
  Model m;
  m.logvars = {{"X", {"p0", "p1"}}, {"Y", {"q0", "q1"}}};
  Constraint cx = Constraint::top({{"X", 2}});
  Constraint cxy = Constraint::top({{"X", 2}, {"Y", 2}});
  Parfactor a({prv("A", {"X"})}, {4, 9}, cx);
  Parfactor b({prv("A", {"X"}), prv("B", {"X", "Y"})}, {1, 2, 3, 4}, cxy);
  Parfactor p = multiply(a, b);
  CHECK(p.constraint.gr() == 4);
  CHECK(p.table[0] == doctest::Approx(std::sqrt(4.0) * 1).epsilon(1e-12));
  CHECK(p.table[3] == doctest::Approx(std::sqrt(9.0) * 4).epsilon(1e-12));

  Model m1 = m;
  m1.parfactors = {a, b};
  Model m2 = m;
  m2.parfactors = {p};
  check_same_distribution(m1, m2);
}

TEST_CASE("multiply rejects misaligned explicit constraints") {
  Parfactor a({prv("A", {"X"})}, {2, 3},
              Constraint::explicit_set({{"X", 3}}, {{0}, {1}}));
  Parfactor b({prv("A", {"X"})}, {5, 7},
              Constraint::explicit_set({{"X", 3}}, {{1}, {2}}));
  CHECK_THROWS_AS((void)multiply(a, b), unsupported_operation);
}

TEST_CASE("multiply rejects range mismatches") {
  Constraint c = Constraint::top({{"X", 2}});
  Parfactor a({prv("A", {"X"})}, {2, 3}, c);
  PRV wide = prv("A", {"X"});
  wide.range = {"low", "mid", "high"};
  Parfactor b({wide}, {1, 2, 3}, c);
  CHECK_THROWS_AS((void)multiply(a, b), std::invalid_argument);
}

TEST_CASE("sum_out drops an axis") {
  Constraint c = Constraint::top({{"X", 2}});
  Parfactor p({prv("A", {"X"}), prv("B", {"X"})}, {1, 2, 3, 4}, c);
  Parfactor s = sum_out(p, prv("B", {"X"}));
  CHECK(s.args.size() == 1);
  CHECK(s.table == std::vector<double>{3, 7});
}

TEST_CASE("sum_out exponentiates exclusive logvars") {
  // B(X, Y) is summed out; Y is exclusive to it, so each X binding carries
  // |D(Y)| = 2 independent copies: (sum_b phi)^2.
  Model m;
  m.logvars = {{"X", {"p0"}}, {"Y", {"q0", "q1"}}};
  Constraint cxy = Constraint::top({{"X", 1}, {"Y", 2}});
  Parfactor p({prv("A", {"X"}), prv("B", {"X", "Y"})}, {1, 2, 3, 4}, cxy);
  Parfactor s = sum_out(p, prv("B", {"X", "Y"}));
  CHECK(s.table == std::vector<double>{9, 49});

  // Ground check: P(A) prop. to prod_y sum_b phi(a, b_y).
  Model m1 = m;
  m1.parfactors = {p};
  auto marg = exact_marginal(ground(m1), {"A", {"p0"}, std::nullopt}, {});
  CHECK(marg[0] == doctest::Approx(9.0 / 58).epsilon(1e-12));
  CHECK(marg[1] == doctest::Approx(49.0 / 58).epsilon(1e-12));
}

TEST_CASE("sum_out refuses counting conversion") {
  Constraint cxy = Constraint::top({{"X", 2}, {"Y", 2}});
  Parfactor p({prv("A", {"X"}), prv("B", {"X", "Y"})}, {1, 2, 3, 4}, cxy);
  // Eliminating A(X) would leave Y unaccounted for.
  CHECK_THROWS_AS((void)sum_out(p, prv("A", {"X"})), unsupported_operation);
}

TEST_CASE("absorb slices the observed axis") {
  Constraint c = Constraint::top({{"X", 2}});
  Parfactor p({prv("A", {"X"}), prv("B", {"X"})}, {1, 2, 3, 4}, c);
  Parfactor s = absorb(p, prv("B", {"X"}), "true");
  CHECK(s.table == std::vector<double>{2, 4});
  CHECK_THROWS_AS((void)absorb(p, prv("Z", {"X"}), "true"),
                  std::invalid_argument);
}

TEST_CASE("absorb exponentiates exclusive logvars") {
  Constraint cxy = Constraint::top({{"X", 1}, {"Y", 2}});
  Parfactor p({prv("A", {"X"}), prv("B", {"X", "Y"})}, {1, 2, 3, 4}, cxy);
  Parfactor s = absorb(p, prv("B", {"X", "Y"}), "false");
  CHECK(s.table == std::vector<double>{1, 9});
}

TEST_CASE("shatter splits by evidence signature") {
  Model m;
  m.logvars = {{"X", {"p0", "p1", "p2"}}};
  Constraint c = Constraint::top({{"X", 3}});
  m.parfactors.emplace_back(std::vector<PRV>{prv("A", {"X"})},
                            std::vector<double>{1, 2}, c);
  ResolvedEvent ev{prv("A", {"X"}), {0}, 1};
  Model s = shatter(m, {ev});
  REQUIRE(s.parfactors.size() == 2);
  long long grs[2] = {gr(s.parfactors[0]), gr(s.parfactors[1])};
  CHECK(grs[0] + grs[1] == 3);
  CHECK(std::min(grs[0], grs[1]) == 1);
  for (const auto& p : s.parfactors)
    CHECK(p.table == std::vector<double>{1, 2});
}

TEST_CASE("shatter aligns overlapping parfactors pairwise") {
  Model m;
  m.logvars = {{"X", {"p0", "p1", "p2", "p3"}}};
  m.parfactors.emplace_back(
      std::vector<PRV>{prv("A", {"X"})}, std::vector<double>{1, 2},
      Constraint::explicit_set({{"X", 4}}, {{0}, {1}, {2}}));
  m.parfactors.emplace_back(
      std::vector<PRV>{prv("A", {"X"}), prv("B", {"X"})},
      std::vector<double>{1, 2, 3, 4},
      Constraint::explicit_set({{"X", 4}}, {{1}, {2}, {3}}));
  Model s = shatter(m, {});
  // Overlap {1,2} must be carved out of both sides.
  for (std::size_t i = 0; i < s.parfactors.size(); ++i)
    for (std::size_t j = i + 1; j < s.parfactors.size(); ++j) {
      const auto& ci = s.parfactors[i].constraint;
      const auto& cj = s.parfactors[j].constraint;
      if (!ci.same_slots(cj)) continue;
      CHECK((ci.equal_set(cj) || ci.disjoint_with(cj)));
    }
  GroundModel g1 = ground(m), g2 = ground(s);
  CHECK(g1.factors.size() == g2.factors.size());
}

TEST_CASE("apply_evidence conditions uniformly covered classes") {
  Model m;
  m.logvars = {{"X", {"p0", "p1", "p2"}}};
  Constraint c = Constraint::top({{"X", 3}});
  m.parfactors.emplace_back(
      std::vector<PRV>{prv("A", {"X"}), prv("D", {"X"})},
      std::vector<double>{1, 2, 3, 4}, c);
  ResolvedEvent ev{prv("D", {"X"}), {0}, 1};
  Model e = apply_evidence(m, {ev});
  REQUIRE(e.parfactors.size() == 2);
  bool saw_conditioned = false;
  for (const auto& p : e.parfactors) {
    if (p.args.size() == 1) {
      CHECK(gr(p) == 1);
      CHECK(p.table == std::vector<double>{2, 4});
      saw_conditioned = true;
    }
  }
  CHECK(saw_conditioned);

  std::vector<ResolvedEvent> contradiction{{prv("A", {"X"}), {0}, 1},
                                           {prv("A", {"X"}), {0}, 0}};
  CHECK_THROWS_AS((void)apply_evidence(m, contradiction),
                  std::invalid_argument);
}

TEST_CASE("apply_evidence_grouped keeps cluster assignment") {
  Constraint c = Constraint::top({{"X", 3}});
  Parfactor p({prv("A", {"X"}), prv("D", {"X"})}, {1, 2, 3, 4}, c);
  Parfactor q({prv("A", {"X"})}, {5, 6}, c);
  ResolvedEvent ev{prv("D", {"X"}), {1}, 0};
  auto groups = apply_evidence_grouped({{p}, {q}}, {ev});
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].size() == 2);  // conditioned {p1} piece + remainder
  CHECK(groups[1].size() == 2);  // split to stay aligned with group 0
  long long total = 0;
  for (const auto& g : groups[1]) total += gr(g);
  CHECK(total == 3);
}

TEST_CASE("eliminate_prv merges per instance class") {
  Model g0 = reputation_g0(3, 2);
  auto reduced = eliminate_prv(g0.parfactors, prv("Pub", {"X", "J"}));
  for (const auto& p : reduced)
    for (const auto& a : p.args) CHECK(a.name != "Pub");

  Model m2 = g0;
  m2.parfactors = reduced;
  check_same_distribution(g0, m2);
}

TEST_CASE("eliminate_all_except matches the ground oracle") {
  Model g0 = reputation_g0(3, 2);
  auto kept = eliminate_all_except(g0.parfactors, {prv("R", {"X"})});
  REQUIRE(kept.size() == 1);
  REQUIRE(kept[0].args.size() == 1);
  double z = kept[0].table[0] + kept[0].table[1];
  auto oracle =
      exact_marginal(ground(g0), {"R", {"p1"}, std::nullopt}, {}, 64);
  CHECK(kept[0].table[0] / z == doctest::Approx(oracle[0]).epsilon(1e-12));
  CHECK(kept[0].table[1] / z == doctest::Approx(oracle[1]).epsilon(1e-12));
}

}  // TEST_SUITE
