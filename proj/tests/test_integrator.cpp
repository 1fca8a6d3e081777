#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "vbd/integrator.hpp"
#include "vbd/trajectory.hpp"

using namespace vbd;

namespace {

void decay(double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; }

double max_rel_diff(const SystemState& a, const SystemState& b) {
  const auto x = a.to_array(), y = b.to_array();
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    m = std::max(m, std::abs(x[i] - y[i]) / std::max(1.0, std::abs(y[i])));
  return m;
}

}  // namespace

TEST_CASE("exponential decay at t = 1") {
  const std::vector<double> y0{1.0}, t_eval{0.5, 1.0};
  const auto sol = solve_ivp(decay, y0, 0.0, 1.0, t_eval, IntegratorConfig{}, true);
  REQUIRE(sol.y.size() == 2);
  CHECK(sol.y[1][0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(std::abs(sol.y[1][0] - 0.3678794) < 1e-6);
  CHECK(std::abs(sol.y[0][0] - 0.6065307) < 1e-5);
  CHECK(std::abs(sol.dense(0.25)[0] - std::exp(-0.25)) < 1e-8);
  CHECK_THROWS_AS(sol.dense(1.5), std::out_of_range);
}

TEST_CASE("harmonic oscillator over ten periods") {
  const auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const std::vector<double> y0{1.0, 0.0};
  const double T = 20.0 * std::numbers::pi;
  const std::vector<double> t_eval{T};
  IntegratorConfig cfg;
  cfg.rel_tol = cfg.abs_tol = 1e-10;
  const auto sol = solve_ivp(rhs, y0, 0.0, T, t_eval, cfg);
  CHECK(std::abs(sol.y[0][0] - 1.0) < 1e-7);
  CHECK(std::abs(sol.y[0][1]) < 1e-7);
}

TEST_CASE("step-size underflow reports the last good time") {
  // y' = y^2 blows up at t = 1
  const auto rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  const std::vector<double> y0{1.0};
  try {
    solve_ivp(rhs, y0, 0.0, 2.0, {}, IntegratorConfig{});
    FAIL("expected an integration failure");
  } catch (const IntegrationError& e) {
    // the blow-up time itself is the last representable progress
    CHECK(e.last_good_time() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("configuration validation") {
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.max_step = -1.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  CHECK_NOTHROW(validate(IntegratorConfig{}));
}

TEST_CASE("zero dynamics give a constant trajectory") {
  ModelParams p;
  p.a_mean = 0.0;
  const SystemState s0 = disease_free_state(p);
  const Trajectory traj = integrate(p, s0, 0.0, 100.0);
  REQUIRE(traj.size() == 101);
  for (const auto& s : traj.states()) CHECK(s == s0);
}

TEST_CASE("daily sampling and conservation over 1080 days") {
  const ModelParams p;
  const Trajectory traj = integrate(p, initial_state(p), 0.0, 1080.0);
  REQUIRE(traj.size() == 1081);
  CHECK(traj.t_begin() == 0.0);
  CHECK(traj.t_end() == 1080.0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(traj.times()[i] == static_cast<double>(i));
    const auto& s = traj[i];
    CHECK(std::abs(s.s_d + s.i_md - 80000.0) <= 0.08);
    CHECK(conservation_error(s, p) <= 1e-6);
  }
}

TEST_CASE("integrating in two legs matches one leg") {
  const ModelParams p;
  const IntegratorConfig cfg;
  const double T = 360.0;
  const Trajectory whole = integrate(p, initial_state(p), 0.0, T, cfg);
  const Trajectory first = integrate(p, initial_state(p), 0.0, T / 2, cfg);
  const Trajectory second = integrate(p, first[first.size() - 1], T / 2, T, cfg);
  CHECK(max_rel_diff(second[second.size() - 1], whole[whole.size() - 1]) <= 10.0 * cfg.rel_tol);
}

TEST_CASE("halving tolerances never increases the final-state error") {
  // The one-day step cap keeps the default run far below any tolerance of
  // interest, so the cap is lifted to let the tolerance drive the step size.
  const ModelParams p;
  const std::vector<double> end{360.0};
  IntegratorConfig tight;
  tight.rel_tol = tight.abs_tol = 1e-13;
  tight.max_step = 1e9;
  const SystemState ref = integrate_at(p, initial_state(p), 0.0, end, tight)[0];

  double prev = std::numeric_limits<double>::infinity();
  for (double tol = 1e-3; tol >= 1e-10; tol /= 2.0) {
    IntegratorConfig cfg;
    cfg.rel_tol = cfg.abs_tol = tol;
    cfg.max_step = 1e9;
    const double err = max_rel_diff(integrate_at(p, initial_state(p), 0.0, end, cfg)[0], ref);
    INFO("tol = " << tol);
    CHECK(err <= prev);
    prev = err;
  }
}

TEST_CASE("the step cap alone bounds the error at default settings") {
  const ModelParams p;
  const std::vector<double> end{360.0};
  IntegratorConfig tight;
  tight.rel_tol = tight.abs_tol = 1e-13;
  const SystemState ref = integrate_at(p, initial_state(p), 0.0, end, tight)[0];
  for (double tol : {1e-3, 1e-6, 1e-8}) {
    IntegratorConfig cfg;
    cfg.rel_tol = cfg.abs_tol = tol;
    CHECK(max_rel_diff(integrate_at(p, initial_state(p), 0.0, end, cfg)[0], ref) < 1e-9);
  }
}

TEST_CASE("sampling a trajectory") {
  const ModelParams p;
  const Trajectory traj = integrate(p, initial_state(p), 0.0, 30.0);
  SUBCASE("grid points are returned verbatim") {
    const std::vector<double> times{0.0, 7.0, 30.0};
    const auto s = sample_at(traj, times);
    CHECK(s[0] == traj[0]);
    CHECK(s[1] == traj[7]);
    CHECK(s[2] == traj[30]);
  }
  SUBCASE("off-grid queries use the continuous extension") {
    const SystemState mid = traj.at(12.5);
    const SystemState direct = integrate(p, initial_state(p), 0.0, 12.5)[13];
    CHECK(max_rel_diff(mid, direct) < 1e-7);
  }
  SUBCASE("queries outside the span throw") {
    const std::vector<double> bad{31.0};
    CHECK_THROWS_AS(sample_at(traj, bad), std::out_of_range);
    CHECK_THROWS_AS(traj.at(-0.1), std::out_of_range);
  }
}

TEST_CASE("hermite fallback without a continuous extension") {
  std::vector<double> times;
  std::vector<SystemState> states;
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.1 * i;
    const double v = std::exp(-t);
    times.push_back(t);
    states.push_back({v, v, v, v, v, v});
  }
  const Trajectory traj(times, states);
  REQUIRE_FALSE(traj.has_dense_output());
  CHECK(std::abs(traj.at(0.5).s_d - 0.6065307) < 1e-5);
  CHECK(std::abs(traj.at(0.55).i_v - std::exp(-0.55)) < 1e-5);

  const SystemState c{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  const Trajectory flat({0.0, 1.0, 2.0}, {c, c, c});
  CHECK(flat.at(0.5) == c);
  CHECK(flat.at(1.5) == c);
}

TEST_CASE("trajectory rejects unordered times") {
  const SystemState s;
  CHECK_THROWS_AS(Trajectory({0.0, 0.0}, {s, s}), std::invalid_argument);
  CHECK_THROWS_AS(Trajectory({0.0, 1.0}, {s}), std::invalid_argument);
}

TEST_CASE("trajectory CSV layout") {
  const ModelParams p;
  const Trajectory traj = integrate(p, initial_state(p), 0.0, 3.0);
  std::ostringstream out;
  write_trajectory_csv(traj, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,S_D,I_MD,S_ND,I_M,S_V,I_V");
  std::getline(in, line);
  CHECK(line == "0,78000,2000,897000,23000,1980000,20000");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("fractional horizon appends the end time") {
  const auto grid = daily_grid(0.0, 2.5);
  REQUIRE(grid.size() == 4);
  CHECK(grid.back() == 2.5);
}
