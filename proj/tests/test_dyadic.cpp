#include "blochlab/construct.hpp"
#include "blochlab/dyadic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace blochlab;

TEST_CASE("dyadic arc geometry") {
  DyadicArc I(3, 5);
  CHECK(I.length() == Rational(1, 8));
  CHECK(I.low() == Rational(5, 8));
  CHECK(I.left_child() == DyadicArc(4, 10));
  CHECK(I.right_child() == DyadicArc(4, 11));
  CHECK(I.right_child().parent() == I);
  CHECK(I.contains_arc(DyadicArc(5, 21)));
  CHECK_FALSE(I.contains_arc(DyadicArc(5, 24)));
  CHECK(I.closed_contains(Rational(3, 4)));       // right endpoint included
  CHECK(I.closed_contains(Rational(5, 8)));
  CHECK_FALSE(I.closed_contains(Rational(1, 2)));
  CHECK_THROWS(DyadicArc(3, 8));
}

TEST_CASE("lebesgue masses") {
  DyadicMeasure m = lebesgue_measure();
  CHECK(m.mass(DyadicArc(3, 5)) == Rational(1, 8));
  CHECK(m.mass(DyadicArc(10, 1023)) == Rational(1, 1024));
  CHECK(m.check_consistency(10).empty());
}

TEST_CASE("atom measure masses") {
  DyadicMeasure a = atom_measure(0);
  CHECK(a.mass(DyadicArc(4, 7)) == 0);
  CHECK(a.mass(DyadicArc(4, 0)) == 1);

  AtomList atoms = a.to_atoms(3);
  REQUIRE(atoms.atoms.size() == 1);
  CHECK(atoms.atoms[0].theta == Rational(1, 16));
  CHECK(atoms.atoms[0].mass == 1);

  // atom at a dyadic point lands in the half-open arc starting there
  DyadicMeasure b = atom_measure(Rational(1, 4));
  CHECK(b.mass(DyadicArc(2, 1)) == 1);
  CHECK(b.mass(DyadicArc(2, 0)) == 0);
}

TEST_CASE("lebesgue atomization") {
  AtomList atoms = lebesgue_measure().to_atoms(2);
  REQUIRE(atoms.atoms.size() == 4);
  CHECK(atoms.atoms[0].theta == Rational(1, 8));
  CHECK(atoms.atoms[1].theta == Rational(3, 8));
  CHECK(atoms.atoms[2].theta == Rational(5, 8));
  CHECK(atoms.atoms[3].theta == Rational(7, 8));
  for (const auto& at : atoms.atoms) CHECK(at.mass == Rational(1, 4));
  CHECK(atoms.total() == 1);
}

TEST_CASE("atomization conserves mass exactly") {
  DyadicMeasure r = build_riesz(Rational(1, 2));
  for (int depth : {1, 4, 8}) CHECK(r.to_atoms(depth).total() == 1);
}

TEST_CASE("corrupted table shows a single violation at the leaf's parent") {
  std::map<std::pair<int, std::uint64_t>, Rational> table;
  for (int n = 1; n <= 3; ++n)
    for (std::uint64_t k = 0; k < (std::uint64_t(1) << n); ++k)
      table.emplace(std::make_pair(n, k), pow2_inv(n));
  table[{3, 5}] = Rational(1, 4);  // perturb one leaf
  DyadicMeasure bad(1, std::move(table), 3);
  auto report = bad.check_consistency(3);
  REQUIRE(report.size() == 1);
  CHECK(report[0].parent == DyadicArc(2, 2));
  CHECK(report[0].child_sum == Rational(3, 8));
}

TEST_CASE("beyond authoritative depth") {
  std::map<std::pair<int, std::uint64_t>, Rational> table{{{1, 0}, Rational(1, 2)},
                                                          {{1, 1}, Rational(1, 2)}};
  DyadicMeasure m(1, std::move(table), 1);
  CHECK(m.mass(DyadicArc(1, 0)) == Rational(1, 2));
  CHECK_THROWS_WITH(m.mass(DyadicArc(2, 0)), Catch::Matchers::ContainsSubstring("beyond authoritative depth"));
}

TEST_CASE("closed set nestedness and membership") {
  auto E = DyadicClosedSet::from_points({Rational(0), Rational(1, 3)}, 12);
  for (int n = 1; n <= 12; ++n)
    for (auto k : E.level(n)) CHECK(E.survives(n - 1, k / 2));
  // no wrap at the seam: the right root child misses {0, 1/3}
  CHECK_FALSE(E.survives(1, 1));
  CHECK(E.survives(1, 0));
  CHECK_FALSE(E.has_full_generation());
  CHECK_THROWS(DyadicClosedSet({{0}, {0, 1, 2}}));  // not nested / bad index
}

TEST_CASE("dyadic interior point survives twice per level") {
  auto E = DyadicClosedSet::from_points({Rational(1, 4)}, 10);
  for (int n = 2; n <= 10; ++n) CHECK(E.level(n).size() == 2);
}

TEST_CASE("adaptive leaves at the origin refine uniformly") {
  auto leaves = adaptive_leaves(0.0, 1.0, 0.25);
  for (const auto& J : leaves) {
    CHECK(J.level == 2);
  }
  CHECK(leaves.size() == 4);
}

TEST_CASE("adaptive leaves refine toward the projection") {
  // z = 0.875 on the positive real axis, ratio 1/4
  auto leaves = adaptive_leaves(0.0, 0.125, 0.25);
  int near_level = 0, far_level = 99;
  for (const auto& J : leaves) {
    if (J.closed_contains(0)) near_level = std::max(near_level, J.level);
    if (J.closed_contains(Rational(1, 2))) far_level = std::min(far_level, J.level);
  }
  CHECK(near_level >= 5);
  CHECK(far_level <= 4);
}

TEST_CASE("adaptive leaves form an exact partition") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double theta = uni(rng);
    double one_minus_r = std::pow(2.0, -1.0 - 20.0 * uni(rng));
    double ratio = 0.05 + 0.9 * uni(rng);
    auto leaves = adaptive_leaves(theta, one_minus_r, ratio);
    REQUIRE_FALSE(leaves.empty());
    Rational cursor = 0;
    for (const auto& J : leaves) {
      REQUIRE(J.low() == cursor);
      cursor = J.high();
    }
    CHECK(cursor == 1);
  }
}

TEST_CASE("measure copies share one memo cache") {
  DyadicMeasure r = build_riesz(Rational(1, 3));
  DyadicMeasure copy = r;
  CHECK(copy.mass(DyadicArc(2, 3)) == r.mass(DyadicArc(2, 3)));
  CHECK(copy.mass_d(DyadicArc(2, 3)) == to_double(r.mass(DyadicArc(2, 3))));
}
