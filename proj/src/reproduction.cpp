#include "vbd/reproduction.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "vbd/csv.hpp"

namespace vbd {

EffectiveParams effective_params(const ModelParams& p) {
  const double w_d = p.n_d / p.n_h_total(), w_nd = p.n_nd / p.n_h_total();
  return {
      w_d * p.b_d + w_nd * p.b_nd,
      w_d * p.c_d + w_nd * p.c_nd,
      w_d * p.gamma_md + w_nd * p.gamma_nd,
  };
}

R0Effective r0_effective_detail(const ModelParams& p, double a) {
  const EffectiveParams eff = effective_params(p);
  const double n_h = p.n_h_total();
  R0Effective r;
  r.host_to_vector = a * eff.c_eff * p.n_v / (p.mu_v * n_h);
  r.vector_to_host = a * eff.b_eff * n_h / (eff.gamma_eff * p.n_v);
  // Written as a * sqrt(...) so the result is exactly linear in a.
  r.value = a * std::sqrt(eff.b_eff * eff.c_eff / (p.mu_v * eff.gamma_eff));
  return r;
}

double r0_effective(const ModelParams& p, double a) { return r0_effective_detail(p, a).value; }

NgmMatrices ngm_matrices(const ModelParams& p, double a) {
  // Disease-free equilibrium: S_D = N_D, S_ND = N_ND, S_v = N_v.
  const double n_h = p.n_h_total();
  NgmMatrices m;
  m.f[0][2] = a * p.b_d * p.n_d / p.n_v;
  m.f[1][2] = a * p.b_nd * p.n_nd / p.n_v;
  m.f[2][0] = a * p.c_d * p.n_v / n_h;
  m.f[2][1] = a * p.c_nd * p.n_v / n_h;
  m.v[0][0] = p.gamma_md;
  m.v[1][1] = p.gamma_nd;
  m.v[2][2] = p.mu_v;
  return m;
}

Matrix3 next_generation_matrix(const ModelParams& p, double a) {
  const NgmMatrices m = ngm_matrices(p, a);
  Matrix3 k{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) k[i][j] = m.f[i][j] / m.v[j][j];
  return k;
}

double r0_ngm(const ModelParams& p, double a) {
  // Same operation order as r0_effective, so a single host group gives
  // bit-identical results.
  const double w_d = p.n_d / p.n_h_total(), w_nd = p.n_nd / p.n_h_total();
  const double q = w_d * (p.b_d * p.c_d) / (p.mu_v * p.gamma_md) +
                   w_nd * (p.b_nd * p.c_nd) / (p.mu_v * p.gamma_nd);
  return a * std::sqrt(q);
}

SeasonalR0Series r0_seasonal_series(const ModelParams& p, double t0, double t_end, double step) {
  if (!(t_end > t0)) throw std::invalid_argument("t_end must exceed t0");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");

  SeasonalR0Series series;
  const auto count = static_cast<std::size_t>(std::floor((t_end - t0) / step + 1e-9)) + 1;
  series.points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) * step;
    const double a = biting_rate(t, p);
    series.points.push_back({t, a, r0_effective(p, a), r0_ngm(p, a)});
  }

  const auto summarize = [&](auto member) {
    SeriesSummary s{series.points.front().*member, series.points.front().*member, 0.0};
    for (const auto& pt : series.points) {
      s.min = std::min(s.min, pt.*member);
      s.max = std::max(s.max, pt.*member);
      s.mean += pt.*member;
    }
    s.mean /= static_cast<double>(series.points.size());
    return s;
  };
  series.effective = summarize(&SeasonalR0Point::r0_effective);
  series.ngm = summarize(&SeasonalR0Point::r0_ngm);
  return series;
}

void write_seasonal_csv(const SeasonalR0Series& series, std::ostream& out) {
  out << "time,a_t,r0_effective,r0_ngm\n";
  for (const auto& pt : series.points) {
    csv::write_row(out, {csv::format_number(pt.t), csv::format_number(pt.a_t),
                         csv::format_number(pt.r0_effective), csv::format_number(pt.r0_ngm)});
  }
}

}  // namespace vbd
