#include <vector>

#include "doctest.h"
#include "hapc/fes_controller.hpp"

using namespace hapc;

namespace {

std::vector<MuscleChannel> knee_pair() {
  return {{Joint::Knee, Side::Right, Action::Extensor, table1::right_quadriceps(), {}},
          {Joint::Knee, Side::Right, Action::Flexor, table1::right_hamstrings(), {}}};
}

}  // namespace

TEST_CASE("stiffness spans the stimulation range over twice the band") {
  const double k = fes_stiffness(table1::right_quadriceps(), deg2rad(6.0));
  CHECK(k * deg2rad(1.0) == doctest::Approx(50.0));
  const auto gains = make_fes_gains(knee_pair(), deg2rad(6.0), 0.95);
  REQUIRE(gains.channels.size() == 2);
  CHECK(gains.channels[0].gamma_st == 1.0);
  CHECK(gains.channels[0].k_f == doctest::Approx(k));
}

TEST_CASE("muscle error sign gating") {
  CHECK(muscle_error(0.05, Action::Flexor) == 0.05);
  CHECK(muscle_error(0.05, Action::Extensor) == 0.0);
  CHECK(muscle_error(-0.03, Action::Extensor) == 0.03);
  CHECK(muscle_error(-0.03, Action::Flexor) == 0.0);
  CHECK(muscle_error(0.0, Action::Flexor) == 0.0);
  CHECK(muscle_error(0.0, Action::Extensor) == 0.0);
}

TEST_CASE("antagonists are never stimulated together") {
  auto ch = knee_pair();
  const auto gains = make_fes_gains(ch, deg2rad(6.0), 0.95);
  for (double e = -0.3; e <= 0.3; e += 0.001) {
    const double u0 = stimulation(ch[0], gains.channels[0], GaitPhase::Stance, muscle_error(e, ch[0].action));
    const double u1 = stimulation(ch[1], gains.channels[1], GaitPhase::Stance, muscle_error(e, ch[1].action));
    CHECK((u0 == 0.0 || u1 == 0.0));
  }
}

TEST_CASE("stimulation arithmetic and clamp") {
  MuscleChannel ch = knee_pair()[0];
  ch.state.mu = 0.5;
  ChannelGains g;
  g.gamma_st = 0.5;
  g.k_f = 50.0 / deg2rad(1.0);
  CHECK(stimulation(ch, g, GaitPhase::Stance, deg2rad(6.0)) == doctest::Approx(75.0));
  CHECK(stimulation(ch, g, GaitPhase::Stance, 0.0) == 0.0);
  CHECK(stimulation(ch, g, GaitPhase::Stance, 10.0) == ch.params.u_sat);
  g.gamma_sw = 0.0;
  CHECK(stimulation(ch, g, GaitPhase::Swing, deg2rad(6.0)) == 0.0);
}

TEST_CASE("gamma update") {
  auto gains = make_fes_gains(knee_pair(), deg2rad(6.0), 0.95, 0.8);
  const std::vector<double> err{2.0, 0.0};
  gains = update_gamma(gains, GaitPhase::Stance, err);
  CHECK(gains.channels[0].gamma_st == doctest::Approx(0.86));
  CHECK(gains.channels[1].gamma_st == doctest::Approx(0.76));
  CHECK(gains.channels[0].gamma_sw == 0.8);
  CHECK_THROWS_AS(update_gamma(gains, GaitPhase::Swing, std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("gamma converges to a constant error") {
  for (double c : {0.0, 0.3, 1.0}) {
    auto gains = make_fes_gains(knee_pair(), deg2rad(6.0), 0.95);
    const std::vector<double> err{c, c};
    for (int z = 0; z < 200; ++z) gains = update_gamma(gains, GaitPhase::Swing, err);
    CHECK(std::abs(gains.channels[0].gamma_sw - c) <= 1e-3 * std::max(c, 1.0));
  }
}

TEST_CASE("band radius scales with mean fitness") {
  const double r0 = deg2rad(6.0), r_db = deg2rad(2.0);
  std::vector<MuscleState> s(2);
  CHECK(fes_band_radius(r0, r_db, s) == doctest::Approx(deg2rad(6.0)));
  s[0].mu = 0.3;
  s[1].mu = 0.7;
  CHECK(fes_band_radius(r0, r_db, s) == doctest::Approx(deg2rad(3.0)));
  s[0].mu = s[1].mu = 0.2;
  CHECK(fes_band_radius(r0, r_db, s) == doctest::Approx(deg2rad(2.0)));
  CHECK_THROWS_AS(fes_band_radius(r0, r_db, std::vector<MuscleState>{}), ConfigError);
}
