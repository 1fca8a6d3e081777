#include "vbd/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vbd {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size controller (Hairer-Wanner DOPRI5 defaults).
constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 5.0;   // h_new >= h / 5
constexpr double kMaxGrowth = 10.0;  // h_new <= 10 h
constexpr double kBeta = 0.04;
constexpr double kOrder = 5.0;

constexpr double kUround = std::numeric_limits<double>::epsilon();

double initial_step(const OdeRhs& rhs, double t0, std::span<const double> y0,
                    std::span<const double> f0, double direction_span,
                    const IntegratorConfig& cfg, std::size_t& evals) {
  const std::size_t n = y0.size();
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min({h, cfg.max_step, direction_span});

  std::vector<double> y1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h * f0[i];
  rhs(t0 + h, y1, f1);
  ++evals;

  double der2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / kOrder);
  return std::min({100.0 * h, h1, cfg.max_step, direction_span});
}

}  // namespace

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(cfg.abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be positive");
  if (!(cfg.max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  if (cfg.max_steps == 0) throw std::invalid_argument("max_steps must be positive");
}

void DenseOutput::push_segment(double t_start, double t_stop, std::span<const double> coeffs) {
  steps_.push_back(t_stop - t_start);
  ends_.push_back(t_stop);
  coeffs_.insert(coeffs_.end(), coeffs.begin(), coeffs.end());
}

void DenseOutput::evaluate(double t, std::span<double> out) const {
  if (ends_.empty() || t < t0_ || t > ends_.back())
    throw std::out_of_range("dense output queried outside its span");
  const auto it = std::lower_bound(ends_.begin(), ends_.end(), t);
  const auto seg = static_cast<std::size_t>(it - ends_.begin());
  const double h = steps_[seg];
  const double start = seg == 0 ? t0_ : ends_[seg - 1];
  const double s = (t - start) / h;
  const double s1 = 1.0 - s;
  const double* r = coeffs_.data() + seg * 5 * dim_;
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = r[i] + s * (r[dim_ + i] +
                         s1 * (r[2 * dim_ + i] + s * (r[3 * dim_ + i] + s1 * r[4 * dim_ + i])));
  }
}

std::vector<double> DenseOutput::operator()(double t) const {
  std::vector<double> out(dim_);
  evaluate(t, out);
  return out;
}

OdeSolution solve_ivp(const OdeRhs& rhs, std::span<const double> y0, double t0, double t_end,
                      std::span<const double> t_eval, const IntegratorConfig& cfg,
                      bool keep_dense) {
  validate(cfg);
  if (!(t_end > t0)) throw std::invalid_argument("t_end must exceed t0");
  for (std::size_t i = 0; i < t_eval.size(); ++i) {
    if (t_eval[i] < t0 || t_eval[i] > t_end)
      throw std::invalid_argument("t_eval entry outside [t0, t_end]");
    if (i > 0 && t_eval[i] < t_eval[i - 1]) throw std::invalid_argument("t_eval must be sorted");
  }

  const std::size_t n = y0.size();
  OdeSolution sol;
  sol.t.reserve(t_eval.size());
  sol.y.reserve(t_eval.size());
  if (keep_dense) sol.dense = DenseOutput(n, t0);

  std::vector<double> y(y0.begin(), y0.end()), y1(n), ytmp(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> cont(5 * n);

  std::size_t next_out = 0;
  while (next_out < t_eval.size() && t_eval[next_out] == t0) {
    sol.t.push_back(t0);
    sol.y.push_back(y);
    ++next_out;
  }

  double t = t0;
  rhs(t, y, k1);
  sol.rhs_evaluations = 1;
  double h = initial_step(rhs, t, y, k1, t_end - t0, cfg, sol.rhs_evaluations);
  double facold = 1e-4;
  bool last_rejected = false;

  while (t < t_end) {
    if (sol.accepted_steps + sol.rejected_steps >= cfg.max_steps)
      throw IntegrationError("step budget exhausted", t);
    if (0.1 * h <= std::abs(t) * kUround || h <= std::numeric_limits<double>::min())
      throw IntegrationError("step size underflow", t);

    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = last ? t_end : t + h;
    rhs(t_new, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t_new, y1, k7);
    sol.rhs_evaluations += 6;

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (e / sk) * (e / sk);
    }
    err = std::sqrt(err / static_cast<double>(n));
    if (!std::isfinite(err)) {
      // Treat a blown-up trial step as a rejection with maximal shrink.
      ++sol.rejected_steps;
      h /= kMaxShrink;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, 1.0 / kOrder - kBeta * 0.75);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxGrowth, kMaxShrink);
      double h_new = h / fac;
      facold = std::max(err, 1e-4);
      ++sol.accepted_steps;

      const bool need_dense = keep_dense ||
                              (next_out < t_eval.size() && t_eval[next_out] < t_new);
      if (need_dense) {
        for (std::size_t i = 0; i < n; ++i) {
          const double dy = y1[i] - y[i];
          const double bspl = h * k1[i] - dy;
          cont[i] = y[i];
          cont[n + i] = dy;
          cont[2 * n + i] = bspl;
          cont[3 * n + i] = dy - h * k7[i] - bspl;
          cont[4 * n + i] =
              h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
      }
      while (next_out < t_eval.size() && t_eval[next_out] <= t_new) {
        const double te = t_eval[next_out];
        if (te == t_new) {
          sol.y.push_back(y1);
        } else {
          const double s = (te - t) / h;
          const double s1 = 1.0 - s;
          std::vector<double> out(n);
          for (std::size_t i = 0; i < n; ++i)
            out[i] = cont[i] +
                     s * (cont[n + i] + s1 * (cont[2 * n + i] + s * (cont[3 * n + i] + s1 * cont[4 * n + i])));
          sol.y.push_back(std::move(out));
        }
        sol.t.push_back(te);
        ++next_out;
      }
      if (keep_dense) sol.dense.push_segment(t, t_new, cont);

      t = t_new;
      std::swap(y, y1);
      std::swap(k1, k7);
      if (last_rejected) h_new = std::min(h_new, h);
      h = std::min(h_new, cfg.max_step);
      last_rejected = false;
    } else {
      h /= std::min(kMaxShrink, fac11 / kSafety);
      ++sol.rejected_steps;
      last_rejected = true;
    }
  }
  return sol;
}

}  // namespace vbd
