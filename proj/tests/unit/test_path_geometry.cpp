#include <filesystem>
#include <random>

#include "doctest.h"
#include "hapc/path_geometry.hpp"
#include "test_support.hpp"

using namespace hapc;

namespace {

ReferencePath diagonal() {
  // Thin closed loop whose first segment is the (0,0)-(1,1) diagonal.
  return ReferencePath({{0.0, {0.0, 0.0}}, {0.4, {1.0, 1.0}}, {0.7, {1.0, 1.0 + 1e-3}}});
}

}  // namespace

TEST_CASE("projection onto a 45 degree segment") {
  const auto p = nearest_reference(diagonal(), {1.0, 0.0});
  CHECK(p.q_ref[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.q_ref[1] == doctest::Approx(0.5).epsilon(1e-12));
  const auto b = banded_error(diagonal(), {1.0, 0.0}, 0.0, 0.0);
  CHECK(b.raw_error[0] == doctest::Approx(-0.5));
  CHECK(b.raw_error[1] == doctest::Approx(0.5));
  CHECK(p.phase == doctest::Approx(0.2));
}

TEST_CASE("point on the path has zero error") {
  const auto path = default_reference_path();
  for (double ph : {0.0, 0.13, 0.5, 0.77}) {
    const JointVec q = path.at_phase(ph);
    const auto b = banded_error(path, q, deg2rad(2), deg2rad(6));
    CHECK(std::abs(b.raw_error[0]) < 1e-12);
    CHECK(std::abs(b.raw_error[1]) < 1e-12);
  }
}

TEST_CASE("dead band soft threshold") {
  const double r = deg2rad(2.0);
  CHECK(dead_band(deg2rad(3.0), r) == doctest::Approx(deg2rad(1.0)));
  CHECK(dead_band(deg2rad(-1.5), r) == 0.0);
  CHECK(dead_band(deg2rad(-3.0), r) == doctest::Approx(deg2rad(-1.0)));
}

TEST_CASE("dead band is odd and monotone in the radius") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5), rr(0.0, 0.2);
  for (int i = 0; i < 2000; ++i) {
    const double e = u(rng), r1 = rr(rng), r2 = r1 + rr(rng);
    CHECK(dead_band(-e, r1) == -dead_band(e, r1));
    CHECK(std::abs(dead_band(e, r2)) <= std::abs(dead_band(e, r1)));
  }
}

TEST_CASE("band nesting") {
  const auto path = default_reference_path();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> hip(-0.4, 0.6), knee(0.0, 1.2), rad(0.0, 0.1);
  for (int i = 0; i < 500; ++i) {
    const double r_db = rad(rng), r_fesb = r_db + rad(rng);
    const auto b = banded_error(path, {hip(rng), knee(rng)}, r_db, r_fesb);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      CHECK(std::abs(b.exo_error[j]) <= std::abs(b.fes_error[j]));
      CHECK(std::abs(b.fes_error[j]) <= std::abs(b.raw_error[j]));
      CHECK(std::abs(b.fes_error[j]) == doctest::Approx(std::max(std::abs(b.raw_error[j]) - r_db, 0.0)));
    }
  }
}

TEST_CASE("nearest reference matches an exhaustive scan on random paths") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto path = test::random_path(rng, 200);
    for (int i = 0; i < 200; ++i) {
      const JointVec q{u(rng), u(rng)};
      CHECK(nearest_reference(path, q).distance ==
            doctest::Approx(test::brute_force_distance(path, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("projection is invariant to rotating the sample order") {
  const auto path = default_reference_path();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> hip(-0.3, 0.5), knee(0.0, 1.1);
  for (std::size_t shift : {1u, 57u, 199u}) {
    const auto rot = path.rotated(shift);
    for (int i = 0; i < 100; ++i) {
      const JointVec q{hip(rng), knee(rng)};
      const auto a = nearest_reference(path, q), b = nearest_reference(rot, q);
      CHECK(std::abs(a.q_ref[0] - b.q_ref[0]) < 1e-9);
      CHECK(std::abs(a.q_ref[1] - b.q_ref[1]) < 1e-9);
    }
  }
}

TEST_CASE("ties resolve toward the phase just ahead of the previous one") {
  // Square loop: the centre is equidistant from all four sides.
  const ReferencePath sq({{0.0, {0, 0}}, {0.25, {1, 0}}, {0.5, {1, 1}}, {0.75, {0, 1}}});
  const JointVec c{0.5, 0.5};
  CHECK(nearest_reference(sq, c, 0.3).phase == doctest::Approx(0.375));
  CHECK(nearest_reference(sq, c, 0.6).phase == doctest::Approx(0.625));
  CHECK(nearest_reference(sq, c, 0.9).phase == doctest::Approx(0.125));
}

TEST_CASE("path validation") {
  CHECK_THROWS_AS(ReferencePath({{0.0, {0, 0}}, {0.5, {1, 0}}}), ConfigError);
  CHECK_THROWS_AS(ReferencePath({{0.0, {0, 0}}, {0.3, {0, 0}}, {0.6, {1, 1}}}), ConfigError);
  CHECK_THROWS_AS(ReferencePath({{0.0, {0, 0}}, {0.6, {1, 0}}, {0.3, {1, 1}}, {0.8, {0, 1}}}), ConfigError);
  CHECK_THROWS_AS(banded_error(default_reference_path(), {0, 0}, -0.1, 0.1), ConfigError);
}

TEST_CASE("default path file round trip") {
  const auto path = default_reference_path();
  const auto file = std::filesystem::temp_directory_path() / "hapc_path_roundtrip.csv";
  path.save(file.string());
  const auto back = ReferencePath::load(file.string());
  REQUIRE(back.size() == path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    CHECK(back.samples()[i].phase == path.samples()[i].phase);
    CHECK(back.samples()[i].q[0] == doctest::Approx(path.samples()[i].q[0]).epsilon(1e-14));
  }
  std::filesystem::remove(file);
}
