// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "nfsense/coordinator.hpp"
#include "nfsense/rng.hpp"

using namespace nfsense;

namespace {

RadioConfig no_ambient() {
  RadioConfig cfg;
  cfg.b = 0.0;
  return cfg;
}

Registration user(const std::string& id, Point2D ue, Point2D subject, MotionKind motion = MotionKind::respiration) {
  Registration r;
  r.user_id = id;
  r.ue = ue;
  r.subject = subject;
  r.motion = motion;
  return r;
}

/// UEs on the corners of a 2 m square around the AP, subjects 0.15 m further out.
std::vector<Registration> corner_layout() {
  const double s = 1.0 + 0.15 / std::sqrt(2.0);
  return {user("a", {1, 1}, {s, s}), user("b", {-1, 1}, {-s, s}), user("c", {-1, -1}, {-s, -s}),
          user("d", {1, -1}, {s, -s})};
}

}  // namespace

TEST_CASE("first user is admitted") {
  Registry reg(no_ambient(), {0, 0}, 50.0);
  const Decision d = reg.register_user(user("a", {2, 0.5}, {2.2, 0.55}));
  CHECK(d.admitted);
  CHECK(d.reason.empty());
  CHECK(reg.admitted().size() == 1);
  CHECK(reg.invariant_holds());
}

TEST_CASE("candidate next to an admitted UE is rejected pairwise") {
  Registry reg(no_ambient(), {0, 0}, 50.0);
  REQUIRE(reg.register_user(corner_layout()[0]).admitted);
  const Decision d = reg.register_user(user("intruder", {1.01, 1.0}, {1.2, 1.1}));
  CHECK_FALSE(d.admitted);
  CHECK(d.reason.rfind("pairwise VIR", 0) == 0);
  CHECK(reg.admitted().size() == 1);
}

TEST_CASE("four-corner layout admits every user") {
  Registry reg(no_ambient(), {0, 0}, 50.0);
  for (const Registration& r : corner_layout()) {
    const Decision d = reg.register_user(r);
    CHECK_MESSAGE(d.admitted, d.reason);
  }
  CHECK(reg.admitted().size() == 4);
  CHECK(reg.invariant_holds());
}

TEST_CASE("register then deregister restores the registry") {
  Registry reg(no_ambient(), {0, 0}, 50.0);
  const auto layout = corner_layout();
  REQUIRE(reg.register_user(layout[0]).admitted);
  REQUIRE(reg.register_user(layout[1]).admitted);
  const Registry before = reg;
  REQUIRE(reg.register_user(layout[2]).admitted);
  CHECK_FALSE(reg == before);
  reg.deregister("c");
  CHECK(reg == before);
  CHECK_THROWS_WITH_AS(reg.deregister("nobody"), "unknown user_id: nobody", std::invalid_argument);
}

TEST_CASE("duplicate and malformed registrations throw") {
  Registry reg(no_ambient(), {0, 0}, 50.0);
  REQUIRE(reg.register_user(corner_layout()[0]).admitted);
  CHECK_THROWS_AS(reg.register_user(corner_layout()[0]), std::invalid_argument);
  Registration unnamed = corner_layout()[1];
  unnamed.user_id.clear();
  CHECK_THROWS_AS(reg.register_user(unnamed), std::invalid_argument);
  Registration still = corner_layout()[1];
  still.intensity = 0.0;
  CHECK_THROWS_AS(reg.register_user(still), std::invalid_argument);
  CHECK_THROWS_AS(Registry(no_ambient(), {0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("a rejected candidate is admitted once the blocker leaves") {
  Registry reg(no_ambient(), {0, 0}, 50.0);
  const auto layout = corner_layout();
  for (const Registration& r : layout) REQUIRE(reg.register_user(r).admitted);
  const Registration intruder = user("intruder", {1.01, 1.0}, {1.2, 1.1}, MotionKind::activity_like);
  CHECK_FALSE(reg.register_user(intruder).admitted);
  reg.deregister("a");
  const Decision d = reg.register_user(intruder);
  CHECK_MESSAGE(d.admitted, d.reason);
  CHECK(reg.invariant_holds());
}

TEST_CASE("capacity envelope caps rings of three or more") {
  CapacityQuery q;
  q.r = 0.2;
  Registry reg(no_ambient(), {0, 0}, 50.0, q);
  REQUIRE(reg.capacity_limit().has_value());
  CHECK(*reg.capacity_limit() == 0);
  const auto layout = corner_layout();
  CHECK(reg.register_user(layout[0]).admitted);
  CHECK(reg.register_user(layout[1]).admitted);
  const Decision d = reg.register_user(layout[2]);
  CHECK_FALSE(d.admitted);
  CHECK(d.reason == "capacity: 3 users exceed n_max 0");

  Registry open(no_ambient(), {0, 0}, 50.0);
  CHECK_FALSE(open.capacity_limit().has_value());
}

TEST_CASE("random admission and removal keeps the invariant") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Registry reg(no_ambient(), {0, 0}, 50.0);
    int next_id = 0;
    for (int step = 0; step < 60; ++step) {
      if (!reg.admitted().empty() && uniform01(rng) < 0.3) {
        const auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(reg.admitted().size()));
        reg.deregister(reg.admitted()[std::min(k, reg.admitted().size() - 1)].user_id);
      } else {
        const Point2D ue{-3.0 + 6.0 * uniform01(rng), -3.0 + 6.0 * uniform01(rng)};
        const double off = 0.05 + 0.25 * uniform01(rng);
        const double ang = 2.0 * std::numbers::pi * uniform01(rng);
        const Point2D subject{ue.x + off * std::cos(ang), ue.y + off * std::sin(ang)};
        reg.register_user(user("u" + std::to_string(next_id++), ue, subject));
      }
      REQUIRE(reg.invariant_holds());
    }
  }
}

TEST_CASE("a mutually feasible set is admitted in every order") {
  std::vector<Registration> layout = corner_layout();
  std::sort(layout.begin(), layout.end(), [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  int orders = 0;
  do {
    Registry reg(no_ambient(), {0, 0}, 50.0);
    for (const Registration& r : layout) CHECK(reg.register_user(r).admitted);
    ++orders;
  } while (std::next_permutation(layout.begin(), layout.end(),
                                 [](const auto& a, const auto& b) { return a.user_id < b.user_id; }));
  CHECK(orders == 24);
}

TEST_CASE("cutoff per motion type and registry csv") {
  CHECK(cutoff_for(MotionKind::respiration) == 1.0);
  CHECK(cutoff_for(MotionKind::still) == 1.0);
  CHECK(cutoff_for(MotionKind::gesture_like) == 20.0);
  CHECK(cutoff_for(MotionKind::activity_like) == 20.0);

  Registry reg(no_ambient(), {0, 0}, 50.0);
  Registration g = corner_layout()[0];
  g.motion = MotionKind::gesture_like;
  g.strategy = TrafficKind::ul_bfi;
  REQUIRE(reg.register_user(g).admitted);
  std::ostringstream os;
  write_registry_csv(os, reg);
  const std::string expected_head = "user_id,ue_x,ue_y,subject_x,subject_y,motion,strategy,f_cut_hz\na,1,1,";
  CHECK(os.str().rfind(expected_head, 0) == 0);
  CHECK(os.str().find(",gesture_like,ul-bfi,20\n") != std::string::npos);
}
