#include "blochlab/majorant.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace blochlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("majorant evaluation") {
  CHECK_THAT(eval_majorant(Majorant::power(Rational(1, 2)), Rational(1, 4)), WithinAbs(0.5, 1e-15));
  CHECK_THAT(eval_majorant(Majorant::tlog(), Rational(1)), WithinAbs(1.0, 1e-15));
  // loginv alpha=2 at t = e^-2: log^-2(e * e^2) = 1/9
  double t = std::exp(-2.0);
  CHECK_THAT(Majorant::loginv(2).eval(t), WithinAbs(1.0 / 9.0, 1e-14));
  CHECK(Majorant::power(Rational(1, 2)).eval(0.0) == 0.0);
  CHECK_THROWS(Majorant::power(Rational(1, 2)).eval(1.5));
  CHECK_THROWS(eval_majorant(Majorant::tlog(), Rational(3, 2)));
}

TEST_CASE("majorant parsing round-trip") {
  CHECK(Majorant::parse("power:1/2").kind() == Majorant::Kind::power);
  CHECK(Majorant::parse("power:1/2").alpha() == Rational(1, 2));
  CHECK(Majorant::parse("tlog").kind() == Majorant::Kind::tlog);
  CHECK(Majorant::parse("loginv:2").spec_string() == "loginv:2");
  CHECK_THROWS(Majorant::parse("gauss:3"));
}

TEST_CASE("structure checks pass for the analytic kinds") {
  CHECK_NOTHROW(Majorant::power(Rational(1, 2)).check_structure());
  CHECK_NOTHROW(Majorant::power(Rational(1, 4)).check_structure());
  CHECK_NOTHROW(Majorant::tlog().check_structure());
  CHECK_NOTHROW(Majorant::loginv(2).check_structure());
}

TEST_CASE("dini integral closed forms") {
  auto r = dini_integral(Majorant::power(Rational(1, 2)), 1e-9);
  REQUIRE(r.verdict == Verdict::converging);
  CHECK_THAT(r.value, WithinAbs(2.0, 1e-7));

  for (auto [num, expect] : {std::pair{1, 4.0}, {3, 4.0 / 3.0}}) {
    auto ri = dini_integral(Majorant::power(Rational(num, 4)), 1e-9);
    REQUIRE(ri.verdict == Verdict::converging);
    CHECK_THAT(ri.value, WithinRel(expect, 1e-6));
  }

  auto l2 = dini_integral(Majorant::loginv(2), 1e-9);
  REQUIRE(l2.verdict == Verdict::converging);
  CHECK_THAT(l2.value, WithinAbs(1.0, 1e-6));

  auto tl = dini_integral(Majorant::tlog(), 1e-9);
  REQUIRE(tl.verdict == Verdict::converging);
  CHECK_THAT(tl.value, WithinAbs(2.0, 1e-6));

  CHECK(dini_integral(Majorant::loginv(1)).verdict == Verdict::diverging);
}

TEST_CASE("dini integral of a coarse table is inconclusive") {
  auto w = Majorant::tabulated({{0.25, 0.5}, {1.0, 1.0}});
  CHECK(dini_integral(w).verdict == Verdict::inconclusive);
}

TEST_CASE("aa exponent check on power majorants") {
  auto w = Majorant::power(Rational(1, 2));
  CHECK(aa_exponent_check(w, Rational(3, 5)).pass);
  CHECK(aa_exponent_check(w, Rational(1, 2)).pass);  // boundary: constant
  auto fail = aa_exponent_check(w, Rational(2, 5));
  CHECK_FALSE(fail.pass);
  CHECK(fail.witness_s < fail.witness_t);
}

TEST_CASE("aa exponent check for tlog at gamma 1/2") {
  // sqrt(t) log(e/t) is increasing near t=1 (e.g. t=1/4 vs t=1/2), so the
  // faithful non-increasing check fails with that witness pair
  auto res = aa_exponent_check(Majorant::tlog(), Rational(1, 2));
  CHECK_FALSE(res.pass);
  CHECK(res.witness_t <= 1.0);
  double f_s = Majorant::tlog().eval(res.witness_s) / std::sqrt(res.witness_s);
  double f_t = Majorant::tlog().eval(res.witness_t) / std::sqrt(res.witness_t);
  CHECK(f_t > f_s);
}

TEST_CASE("w-entropy of a single point for w(t)=t") {
  auto E = DyadicClosedSet::from_points({Rational(1, 3)}, 20);
  auto rep = w_entropy(E, Majorant::power(1), 20);
  REQUIRE(rep.verdict == Verdict::converging);
  // closed form: 2 * int_0^{1/2} log t dt = log(1/2) - 1
  CHECK_THAT(rep.per_level.back().contribution, WithinAbs(std::log(0.5) - 1.0, 1e-4));
  // monotone decreasing refinement values
  for (std::size_t i = 1; i < rep.per_level.size(); ++i)
    CHECK(rep.per_level[i].contribution <= rep.per_level[i - 1].contribution + 1e-12);
}

TEST_CASE("w-entropy of two antipodal points for w(t)=t") {
  auto E = DyadicClosedSet::from_points({Rational(1, 3), Rational(5, 6)}, 20);
  auto rep = w_entropy(E, Majorant::power(1), 20);
  REQUIRE(rep.verdict == Verdict::converging);
  // closed form: 4 * int_0^{1/4} log t dt = log(1/4) - 1
  CHECK_THAT(rep.per_level.back().contribution, WithinAbs(std::log(0.25) - 1.0, 1e-4));
}

TEST_CASE("w-entropy flags a depth-0 approximation") {
  auto E = DyadicClosedSet::from_predicate([](const DyadicArc&) { return true; }, 0);
  auto rep = w_entropy(E, Majorant::power(1), 0);
  CHECK_FALSE(rep.note.empty());
}

TEST_CASE("w-entropy rejects a vanishing majorant") {
  auto w = Majorant::tabulated({{0.5, 0.0}, {1.0, 1.0}});
  auto E = DyadicClosedSet::from_points({Rational(0)}, 6);
  CHECK_THROWS(w_entropy(E, w, 6));
}
