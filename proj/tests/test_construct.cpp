#include "blochlab/construct.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace blochlab;
using Catch::Matchers::WithinAbs;

TEST_CASE("generation levels for w(t)=sqrt(t)") {
  auto w = Majorant::power(Rational(1, 2));
  CHECK(choose_generation(w, 0) == 6);
  CHECK(choose_generation(w, 1) == 8);
  CHECK(choose_generation(w, 2) == 10);
  CHECK(choose_generation(w, 3) == 12);
  // strict increase across construction calls
  CHECK(choose_generation(w, 1, 8) == 9);
}

TEST_CASE("ineligible majorant") {
  CHECK_THROWS_WITH(choose_generation(Majorant::power(1), 1),
                    Catch::Matchers::ContainsSubstring("ineligible"));
}

TEST_CASE("nomoc level-8 pattern for L=1") {
  auto nm = build_nomoc(Majorant::power(Rational(1, 2)), 1);
  REQUIRE(nm.generation_levels == std::vector<int>{8});
  int carriers = 0;
  nm.measure.enumerate(8, [&](const DyadicArc& I, const Rational& m) {
    if (I.index % 2 == 0) {
      CHECK(m == Rational(1, 128));
      ++carriers;
    } else {
      CHECK(m == 0);
    }
  });
  CHECK(carriers == 128);
  CHECK(nm.measure.total_mass() == 1);
}

TEST_CASE("nomoc level-10 pattern for L=2") {
  auto nm = build_nomoc(Majorant::power(Rational(1, 2)), 2);
  REQUIRE(nm.generation_levels == std::vector<int>{8, 10});
  // inside each G1 arc, 2 of the 4 level-10 subarcs carry 2^-8 each
  for (std::uint64_t g1 : {std::uint64_t(0), std::uint64_t(2), std::uint64_t(126)}) {
    Rational sum = 0;
    int carriers = 0;
    for (std::uint64_t off = 0; off < 4; ++off) {
      Rational m = nm.measure.mass(DyadicArc(10, 4 * g1 + off));
      if (m != 0) {
        CHECK(m == Rational(1, 256));
        ++carriers;
      }
      sum += m;
    }
    CHECK(carriers == 2);
    CHECK(sum == nm.measure.mass(DyadicArc(8, g1)));
  }
  CHECK(nm.measure.check_consistency(12).empty());
}

TEST_CASE("moc bound verification") {
  auto w = Majorant::power(Rational(1, 2));
  auto nm = build_nomoc(w, 2);
  auto res = verify_moc_bound(nm.measure, w, 10);
  CHECK(res.pass);
  CHECK(res.worst_ratio <= 1.0 / 3.0 + 1e-15);

  CHECK(verify_moc_bound(lebesgue_measure(), w, 1).pass);

  auto bad = verify_moc_bound(atom_measure(0), w, 4);
  CHECK_FALSE(bad.pass);
  CHECK(bad.failing_arc.index == 0);
}

TEST_CASE("nosupp on the two-point set {0, 1/3}") {
  auto E = DyadicClosedSet::from_points({Rational(0), Rational(1, 3)}, 12);
  auto ns = build_nosupp(E, 12);
  CHECK(ns.measure.mass(DyadicArc(1, 0)) == 1);
  CHECK(ns.measure.mass(DyadicArc(1, 1)) == 0);
  CHECK(ns.measure.mass(DyadicArc(3, 0)) == Rational(1, 2));
  CHECK(ns.measure.mass(DyadicArc(3, 2)) == Rational(1, 2));

  REQUIRE(ns.coverings.size() >= 3);
  CHECK(ns.coverings[1] == std::vector<DyadicArc>{DyadicArc(1, 0)});
  CHECK(ns.coverings[2] == std::vector<DyadicArc>{DyadicArc(3, 0), DyadicArc(3, 2)});

  // packing identity and density 2^k on every covering
  for (std::size_t k = 0; k + 1 < ns.coverings.size(); ++k) {
    for (const DyadicArc& I : ns.coverings[k]) {
      Rational len = 0;
      for (const DyadicArc& J : ns.coverings[k + 1])
        if (I.contains_arc(J)) len += J.length();
      CHECK(len == I.length() / 2);
    }
  }
  for (std::size_t k = 0; k < ns.coverings.size(); ++k)
    for (const DyadicArc& J : ns.coverings[k])
      CHECK(ns.measure.mass(J) >= (Int(1) << k) * J.length());
}

TEST_CASE("nosupp on a single point is the unit atom") {
  auto E = DyadicClosedSet::from_points({Rational(1, 3)}, 12);
  auto ns = build_nosupp(E, 12);
  DyadicMeasure atom = atom_measure(Rational(1, 3));
  for (int n : {4, 8, 12}) {
    bool same = true;
    ns.measure.enumerate(n, [&](const DyadicArc& I, const Rational& m) {
      if (m != atom.mass(I)) same = false;
    });
    CHECK(same);
  }
}

TEST_CASE("nosupp rejects a full generation") {
  auto E = DyadicClosedSet::from_predicate([](const DyadicArc&) { return true; }, 4);
  CHECK_THROWS(build_nosupp(E, 4));
}

TEST_CASE("riesz masses") {
  DyadicMeasure nu = build_riesz(Rational(1, 2));
  CHECK(nu.mass(DyadicArc(1, 0)) == Rational(1, 4));
  CHECK(nu.mass(DyadicArc(1, 1)) == Rational(3, 4));
  CHECK(nu.mass(DyadicArc(4, 15)) == Rational(81, 256));
  // Lemma-5.3-style conclusion at the root: nu(J) >= |J|^{1/2}
  CHECK(Rational(81, 256) * Rational(81, 256) >= Rational(1, 16));
  CHECK_THROWS(build_riesz(Rational(3, 2)));

  // density equals (1+eta)^r (1-eta)^s for r right and s left steps
  CHECK(nu.mass(DyadicArc(3, 5)) * 8 == Rational(3, 2) * Rational(1, 2) * Rational(3, 2));
}

TEST_CASE("clark evaluators") {
  auto atom = clark_function(atom_measure(0));
  Complex b = atom.b(Complex(0.5, 0.0));
  CHECK_THAT(std::abs(b - Complex(0.5, 0.0)), WithinAbs(0.0, 1e-7));
  Complex f = atom.f(Complex(0.5, 0.0));
  CHECK_THAT(std::abs(f - (1.0 - std::log(Complex(0.5, 0.0)))), WithinAbs(0.0, 1e-6));

  auto leb = clark_function(lebesgue_measure());
  CHECK_THAT(std::abs(leb.b(Complex(0.3, 0.4))), WithinAbs(0.0, 1e-7));
  CHECK_THAT(std::abs(leb.f(Complex(0.3, 0.4)) - 1.0), WithinAbs(0.0, 1e-6));
  CHECK_THAT(std::abs(leb.b(Complex(0.0, 0.0))), WithinAbs(0.0, 1e-9));

  CHECK_THROWS(clark_function(atom_measure(0, Rational(1, 2))));
}
