#pragma once

// Embedded Dormand-Prince 5(4) stepping with adaptive step control and
// bisection-based event location.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

namespace pgeod::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-9;
};

struct StepControl {
  Tolerance tol;
  double h_init = 0.0;  // 0 selects an initial step automatically
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  double max_growth = 5.0;
};

template <std::size_t N>
inline bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

template <std::size_t N>
struct Trial {
  Vec<N> y{};
  double error = 0.0;  // scaled max-norm; <= 1 means acceptable
  bool finite = true;
};

/// One Dormand-Prince step of size h from (s, y).
template <std::size_t N, class F>
Trial<N> dopri_step(F& f, double s, const Vec<N>& y, double h, const Tolerance& tol) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trial<N> out;
  Vec<N> k1 = f(s, y), k2, k3, k4, k5, k6, k7, tmp;
  auto stage = [&](auto&& combine) {
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
  };
  stage([&](std::size_t i) { return a21 * k1[i]; });
  k2 = f(s + c2 * h, tmp);
  stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
  k3 = f(s + c3 * h, tmp);
  stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
  k4 = f(s + c4 * h, tmp);
  stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
  k5 = f(s + c5 * h, tmp);
  stage([&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });
  k6 = f(s + h, tmp);
  for (std::size_t i = 0; i < N; ++i) {
    out.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  }
  k7 = f(s + h, out.y);

  out.finite = all_finite(out.y) && all_finite(k7);
  if (!out.finite) {
    out.error = std::numeric_limits<double>::infinity();
    return out;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(out.y[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  out.error = err;
  return out;
}

template <std::size_t N>
struct Step {
  double s = 0.0;
  Vec<N> y{};
  double h = 0.0;
};

/// Adaptive driver around dopri_step. The right-hand side may return
/// non-finite values; such trials are rejected and the step shrinks.
template <std::size_t N, class F>
class Stepper {
 public:
  Stepper(F f, StepControl ctl) : f_(std::move(f)), ctl_(ctl) {}

  /// Advances from (s, y) by at most h_cap. Returns nullopt when the step
  /// size falls below h_min.
  std::optional<Step<N>> advance(double s, const Vec<N>& y, double h_cap = std::numeric_limits<double>::infinity()) {
    if (h_ <= 0.0) h_ = ctl_.h_init > 0.0 ? ctl_.h_init : initial_step(s, y);
    double h = std::min({h_, h_cap, ctl_.h_max});
    for (;;) {
      if (h < ctl_.h_min) return std::nullopt;
      const Trial<N> tr = dopri_step<N>(f_, s, y, h, ctl_.tol);
      if (tr.finite && tr.error <= 1.0) {
        const double fac = tr.error == 0.0 ? ctl_.max_growth
                                           : std::clamp(0.9 * std::pow(tr.error, -0.2), 0.2, ctl_.max_growth);
        // Steps clipped by h_cap keep the previous proposal.
        h_ = h < std::min(h_cap, ctl_.h_max) ? h * fac : std::max(h_, h * fac);
        return Step<N>{s + h, tr.y, h};
      }
      h *= tr.finite ? std::clamp(0.9 * std::pow(tr.error, -0.2), 0.1, 0.5) : 0.25;
    }
  }

  /// Single unchecked step, used to locate events inside an accepted step.
  Vec<N> trial(double s, const Vec<N>& y, double h) { return dopri_step<N>(f_, s, y, h, ctl_.tol).y; }

  /// Bisects on the step length in [0, h] for the first sign change of g.
  /// Returns the largest step that keeps g on its starting side.
  template <class G>
  Step<N> locate(double s, const Vec<N>& y, double h, G&& g, double width = 1e-12) {
    const bool start_sign = g(y) > 0.0;
    double lo = 0.0;
    double hi = h;
    Vec<N> y_lo = y;
    while (hi - lo > width * std::max(1.0, std::abs(h))) {
      const double mid = 0.5 * (lo + hi);
      const Vec<N> ym = trial(s, y, mid);
      if (all_finite(ym) && (g(ym) > 0.0) == start_sign) {
        lo = mid;
        y_lo = ym;
      } else {
        hi = mid;
      }
    }
    return Step<N>{s + lo, y_lo, lo};
  }

  F& rhs() { return f_; }
  void reset_step() { h_ = 0.0; }

 private:
  double initial_step(double s, const Vec<N>& y) {
    const Vec<N> f0 = f_(s, y);
    auto norm = [&](const Vec<N>& v) {
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = ctl_.tol.abs + ctl_.tol.rel * std::abs(y[i]);
        acc = std::max(acc, std::abs(v[i]) / sc);
      }
      return acc;
    };
    const double d0 = norm(y);
    const double d1 = norm(f0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (!std::isfinite(h0) || h0 <= 0.0) h0 = 1e-6;
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * f0[i];
    const Vec<N> f1 = f_(s + h0, y1);
    Vec<N> df;
    for (std::size_t i = 0; i < N; ++i) df[i] = (f1[i] - f0[i]) / h0;
    const double d2 = all_finite(df) ? norm(df) : std::numeric_limits<double>::infinity();
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, ctl_.h_max});
  }

  F f_;
  StepControl ctl_;
  double h_ = 0.0;
};

template <std::size_t N, class F>
Stepper<N, F> make_stepper(F f, StepControl ctl) {
  return Stepper<N, F>(std::move(f), ctl);
}

}  // namespace pgeod::ode
