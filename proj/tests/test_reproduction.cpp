#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vbd/reproduction.hpp"

using namespace vbd;

namespace {

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Power iteration on K^2: the block structure gives K eigenvalues {rho, -rho, 0},
// so K itself oscillates while K^2 converges to rho^2.
double power_iteration_radius(const Matrix3& k) {
  const Matrix3 k2 = multiply(k, k);
  std::array<double, 3> v{1.0, 1.0, 1.0};
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) w[i] += k2[i][j] * v[j];
    const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    if (n == 0.0) return 0.0;
    double rayleigh = 0.0;
    for (int i = 0; i < 3; ++i) rayleigh += v[i] * w[i];
    const double vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    lambda = rayleigh / vv;
    for (int i = 0; i < 3; ++i) v[i] = w[i] / n;
  }
  return std::sqrt(lambda);
}

// Largest |root| of the characteristic polynomial lambda^3 + c2 lambda^2 + c1 lambda + c0
// computed from the matrix invariants, with roots found by bisection on the real axis.
double characteristic_radius(const Matrix3& k) {
  const double tr = k[0][0] + k[1][1] + k[2][2];
  const double minors = k[0][0] * k[1][1] - k[0][1] * k[1][0] + k[0][0] * k[2][2] - k[0][2] * k[2][0] +
                        k[1][1] * k[2][2] - k[1][2] * k[2][1];
  const double det = k[0][0] * (k[1][1] * k[2][2] - k[1][2] * k[2][1]) -
                     k[0][1] * (k[1][0] * k[2][2] - k[1][2] * k[2][0]) +
                     k[0][2] * (k[1][0] * k[2][1] - k[1][1] * k[2][0]);
  const auto p = [&](double x) { return ((x - tr) * x + minors) * x - det; };
  double hi = 1.0;
  while (p(hi) <= 0.0) hi *= 2.0;
  double lo = 0.0;
  if (p(lo) > 0.0) return 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (p(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

ModelParams homogeneous() {
  ModelParams p;
  p.b_d = p.b_nd = 0.55;
  p.c_d = p.c_nd = 0.6;
  p.gamma_md = p.gamma_nd = 1.0 / 75.0;
  return p;
}

}  // namespace

TEST_CASE("effective parameters are population-weighted means") {
  const auto e = effective_params(ModelParams{});
  CHECK(e.b_eff == doctest::Approx(0.512).epsilon(1e-12));
  CHECK(e.c_eff == doctest::Approx(0.52).epsilon(1e-12));
  CHECK(e.gamma_eff == doctest::Approx(0.016).epsilon(1e-12));

  ModelParams p;
  p.b_d = p.b_nd = 0.5;
  CHECK(effective_params(p).b_eff == 0.5);
}

TEST_CASE("effective parameters lie between the group values") {
  for (double b_d : {0.1, 0.4, 0.9}) {
    ModelParams p;
    p.b_d = b_d;
    p.gamma_md = 1.0 / 200.0;
    const auto e = effective_params(p);
    CHECK(e.b_eff >= std::min(p.b_d, p.b_nd));
    CHECK(e.b_eff <= std::max(p.b_d, p.b_nd));
    CHECK(e.c_eff >= std::min(p.c_d, p.c_nd));
    CHECK(e.c_eff <= std::max(p.c_d, p.c_nd));
    CHECK(e.gamma_eff >= std::min(p.gamma_md, p.gamma_nd));
    CHECK(e.gamma_eff <= std::max(p.gamma_md, p.gamma_nd));
  }
}

TEST_CASE("closed-form reproduction number") {
  const ModelParams p;
  CHECK(std::abs(r0_effective(p, 0.1) - 1.526) <= 0.001);
  CHECK(std::abs(r0_effective(p, 0.18) - 2.747) <= 0.002);
  CHECK(r0_effective(p, 0.0) == 0.0);
  const auto d = r0_effective_detail(p, 0.1);
  CHECK(std::sqrt(d.host_to_vector * d.vector_to_host) == doctest::Approx(d.value).epsilon(1e-14));
  // independent arithmetic: 0.1 * sqrt(0.512 * 0.52 / (0.016 / 14))
  CHECK(d.value == doctest::Approx(0.1 * std::sqrt(0.512 * 0.52 * 14.0 / 0.016)).epsilon(1e-12));
}

TEST_CASE("next-generation matrix structure") {
  const ModelParams p;
  const auto m = ngm_matrices(p, 0.1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(m.f[i][j] == 0.0);
  CHECK(m.f[2][2] == 0.0);
  CHECK(m.v[0][0] == p.gamma_md);
  CHECK(m.v[1][1] == p.gamma_nd);
  CHECK(m.v[2][2] == p.mu_v);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(m.v[i][j] == 0.0);
}

TEST_CASE("spectral radius against two independent computations") {
  const ModelParams p;
  const Matrix3 k = next_generation_matrix(p, 0.1);
  const double closed = r0_ngm(p, 0.1);
  CHECK(std::abs(closed - 1.6085) <= 0.001);
  CHECK(std::abs(power_iteration_radius(k) - closed) / closed <= 1e-10);
  CHECK(std::abs(characteristic_radius(k) - closed) / closed <= 1e-10);
  // q = rho^2 from hand arithmetic
  const double q = 0.01 / (p.mu_v * 1e6) * (0.65 * 0.75 * 80000.0 * 120.0 + 0.5 * 0.5 * 920000.0 * 60.0);
  CHECK(closed * closed == doctest::Approx(q).epsilon(1e-12));
  CHECK(q == doctest::Approx(2.5872).epsilon(1e-4));
}

TEST_CASE("both variants are linear in the biting rate") {
  const ModelParams p;
  for (double a : {0.02, 0.1, 0.3}) {
    CHECK(r0_ngm(p, 2.0 * a) == doctest::Approx(2.0 * r0_ngm(p, a)).epsilon(1e-14));
    CHECK(r0_effective(p, 2.0 * a) == doctest::Approx(2.0 * r0_effective(p, a)).epsilon(1e-14));
  }
  CHECK(r0_ngm(p, 0.0) == 0.0);
}

TEST_CASE("variants agree on homogeneous populations") {
  const ModelParams h = homogeneous();
  for (double a : {0.01, 0.1, 0.25, 0.5}) {
    const double e = r0_effective(h, a), n = r0_ngm(h, a);
    CHECK(std::abs(e - n) / n <= 1e-12);
  }
  ModelParams single;
  single.n_d = 0.0;
  CHECK(r0_ngm(single, 0.1) == r0_effective(single, 0.1));
}

TEST_CASE("heterogeneity widens the gap") {
  const ModelParams p;
  for (double a : {0.02, 0.1, 0.18}) CHECK(r0_ngm(p, a) >= r0_effective(p, a));
}

TEST_CASE("seasonal series over one year") {
  const ModelParams p;
  const auto s = r0_seasonal_series(p, 0.0, 364.0, 1.0);
  REQUIRE(s.points.size() == 365);
  CHECK(std::abs(s.effective.min - 0.305) <= 0.005);
  CHECK(std::abs(s.effective.max - 2.747) <= 0.005);
  CHECK(std::abs(s.effective.mean - 1.526) <= 0.01);
  for (const auto& pt : s.points) CHECK(pt.r0_ngm >= pt.r0_effective);

  ModelParams flat = p;
  flat.a_amp = 0.0;
  const auto c = r0_seasonal_series(flat, 0.0, 364.0, 1.0);
  CHECK(c.effective.min == c.effective.max);
  CHECK(std::abs(c.effective.min - 1.526) <= 0.001);

  CHECK_THROWS_AS(r0_seasonal_series(p, 10.0, 10.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(r0_seasonal_series(p, 0.0, 10.0, 0.0), std::invalid_argument);
}

TEST_CASE("seasonal CSV header") {
  std::ostringstream out;
  write_seasonal_csv(r0_seasonal_series(ModelParams{}, 0.0, 2.0, 1.0), out);
  const std::string text = out.str();
  CHECK(text.substr(0, text.find('\n')) == "time,a_t,r0_effective,r0_ngm");
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
