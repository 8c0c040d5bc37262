#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>

#include "soskit/error.hpp"

namespace soskit {

/// Per channel c: p_c(N) = b_c + sum_h a_ch sin(f_ch (N - s_ch)), with N
/// the frame offset from the sequence centre.
struct PeriodicParams {
  int harmonics = 1;
  Eigen::VectorXd offset;       // b, P
  Eigen::MatrixXd amplitude;    // a, P x H
  Eigen::MatrixXd frequency;    // f, rad/frame, P x H
  Eigen::MatrixXd phase_shift;  // s, frames, P x H

  int channels() const { return static_cast<int>(offset.size()); }
  int stride() const { return 1 + 3 * harmonics; }
  int size() const { return channels() * stride(); }

  /// Flattened as [b, a_0, f_0, s_0, a_1, ...] per channel.
  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd v(size());
    for (int c = 0; c < channels(); ++c) {
      const int base = c * stride();
      v[base] = offset[c];
      for (int h = 0; h < harmonics; ++h) {
        v[base + 1 + 3 * h] = amplitude(c, h);
        v[base + 2 + 3 * h] = frequency(c, h);
        v[base + 3 + 3 * h] = phase_shift(c, h);
      }
    }
    return v;
  }

  void assign(const Eigen::VectorXd& v) {
    for (int c = 0; c < channels(); ++c) {
      const int base = c * stride();
      offset[c] = v[base];
      for (int h = 0; h < harmonics; ++h) {
        amplitude(c, h) = v[base + 1 + 3 * h];
        frequency(c, h) = v[base + 2 + 3 * h];
        phase_shift(c, h) = v[base + 3 + 3 * h];
      }
    }
  }

  static PeriodicParams zeros(int channels, int harmonics) {
    PeriodicParams p;
    p.harmonics = harmonics;
    p.offset = Eigen::VectorXd::Zero(channels);
    p.amplitude = Eigen::MatrixXd::Zero(channels, harmonics);
    p.frequency = Eigen::MatrixXd::Zero(channels, harmonics);
    p.phase_shift = Eigen::MatrixXd::Zero(channels, harmonics);
    return p;
  }
};

inline double frame_offset(int t, int num_frames) { return t - (num_frames - 1) / 2.0; }

inline Eigen::MatrixXd reconstruct_periodic(const PeriodicParams& p, int num_frames) {
  Eigen::MatrixXd out(num_frames, p.channels());
  for (int c = 0; c < p.channels(); ++c) {
    for (int t = 0; t < num_frames; ++t) {
      const double n = frame_offset(t, num_frames);
      double v = p.offset[c];
      for (int h = 0; h < p.harmonics; ++h)
        v += p.amplitude(c, h) * std::sin(p.frequency(c, h) * (n - p.phase_shift(c, h)));
      out(t, c) = v;
    }
  }
  return out;
}

/// Gradient w.r.t. the flattened parameters of sum(upstream .* reconstruct(p)).
inline Eigen::VectorXd reconstruct_periodic_vjp(const PeriodicParams& p, int num_frames,
                                                const Eigen::MatrixXd& upstream) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p.size());
  for (int c = 0; c < p.channels(); ++c) {
    const int base = c * p.stride();
    for (int t = 0; t < num_frames; ++t) {
      const double u = upstream(t, c);
      if (u == 0.0) continue;
      const double n = frame_offset(t, num_frames);
      g[base] += u;
      for (int h = 0; h < p.harmonics; ++h) {
        const double a = p.amplitude(c, h);
        const double f = p.frequency(c, h);
        const double shift = n - p.phase_shift(c, h);
        const double phase = f * shift;
        const double cs = std::cos(phase);
        g[base + 1 + 3 * h] += u * std::sin(phase);
        g[base + 2 + 3 * h] += u * a * cs * shift;
        g[base + 3 + 3 * h] -= u * a * f * cs;
      }
    }
  }
  return g;
}

namespace detail {

struct SinusoidResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Eigen::VectorXd* signal;
  int harmonics;

  int inputs() const { return 1 + 3 * harmonics; }
  int values() const { return static_cast<int>(signal->size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    const int n = values();
    for (int t = 0; t < n; ++t) {
      const double off = frame_offset(t, n);
      double v = x[0];
      for (int h = 0; h < harmonics; ++h) v += x[1 + 3 * h] * std::sin(x[2 + 3 * h] * (off - x[3 + 3 * h]));
      fvec[t] = v - (*signal)[t];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    const int n = values();
    for (int t = 0; t < n; ++t) {
      const double off = frame_offset(t, n);
      jac(t, 0) = 1.0;
      for (int h = 0; h < harmonics; ++h) {
        const double a = x[1 + 3 * h];
        const double f = x[2 + 3 * h];
        const double shift = off - x[3 + 3 * h];
        const double cs = std::cos(f * shift);
        jac(t, 1 + 3 * h) = std::sin(f * shift);
        jac(t, 2 + 3 * h) = a * cs * shift;
        jac(t, 3 + 3 * h) = -a * f * cs;
      }
    }
    return 0;
  }
};

}  // namespace detail

/// Fits each column: mean offset, the H strongest Fourier bins as the
/// initial guess, then joint Levenberg-Marquardt refinement of all
/// amplitudes, frequencies and shifts.
inline PeriodicParams fit_periodic(const Eigen::MatrixXd& signal, int harmonics) {
  const int n = static_cast<int>(signal.rows());
  if (n < 4) throw ValidationError("periodic fit needs at least 4 frames");
  if (harmonics < 1) throw ValidationError("harmonics must be at least 1");
  const int max_bin = n / 2;
  const int usable = std::min({harmonics, max_bin, (n - 1) / 3});
  PeriodicParams p = PeriodicParams::zeros(static_cast<int>(signal.cols()), harmonics);
  const double centre = (n - 1) / 2.0;

  for (int c = 0; c < signal.cols(); ++c) {
    const Eigen::VectorXd x = signal.col(c);
    const double mean = x.mean();
    p.offset[c] = mean;
    const Eigen::VectorXd centred = x.array() - mean;
    if (centred.squaredNorm() <= 1e-24 * std::max(1.0, mean * mean) * n) continue;

    std::vector<std::pair<double, int>> bins;  // (-magnitude, k)
    std::vector<std::complex<double>> coeff(max_bin + 1);
    for (int k = 1; k <= max_bin; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (int t = 0; t < n; ++t) acc += centred[t] * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n);
      coeff[k] = acc;
      bins.emplace_back(-std::abs(acc), k);
    }
    std::stable_sort(bins.begin(), bins.end());

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1 + 3 * usable);
    x0[0] = mean;
    for (int h = 0; h < usable; ++h) {
      const int k = bins[h].second;
      const double omega = 2.0 * std::numbers::pi * k / n;
      const bool nyquist = (2 * k == n);
      const double amp = std::abs(coeff[k]) * (nyquist ? 1.0 : 2.0) / n;
      const double phi = std::arg(coeff[k]);
      x0[1 + 3 * h] = amp;
      x0[2 + 3 * h] = omega;
      x0[3 + 3 * h] = -(phi + std::numbers::pi / 2.0) / omega - centre;
    }

    detail::SinusoidResidual functor{&x, usable};
    Eigen::LevenbergMarquardt<detail::SinusoidResidual> lm(functor);
    lm.parameters.ftol = 1e-15;
    lm.parameters.xtol = 1e-15;
    lm.parameters.maxfev = 400 * (1 + 3 * usable);
    Eigen::VectorXd refined = x0;
    lm.minimize(refined);
    Eigen::VectorXd r0(n), r1(n);
    functor(x0, r0);
    functor(refined, r1);
    // Long-wavelength, huge-amplitude pairs can cancel into a near-linear
    // trend; keep the refinement only inside the resolvable band.
    const double max_amp = 10.0 * centred.cwiseAbs().maxCoeff();
    bool sane = refined.allFinite();
    for (int h = 0; sane && h < usable; ++h) {
      const double f = std::abs(refined[2 + 3 * h]);
      sane = f >= std::numbers::pi / n && f <= std::numbers::pi && std::abs(refined[1 + 3 * h]) <= max_amp;
    }
    if (!sane || r1.squaredNorm() > r0.squaredNorm()) refined = x0;

    p.offset[c] = refined[0];
    for (int h = 0; h < usable; ++h) {
      double a = refined[1 + 3 * h];
      double f = refined[2 + 3 * h];
      double s = refined[3 + 3 * h];
      if (f < 0.0) {  // a sin(f (N - s)) == -a sin(-f (N - s))
        f = -f;
        a = -a;
      }
      if (f > 1e-12) {
        const double period = 2.0 * std::numbers::pi / f;
        if (a < 0.0) {
          a = -a;
          s += period / 2.0;
        }
        s = std::fmod(s, period);
        if (s < 0.0) s += period;
      }
      p.amplitude(c, h) = a;
      p.frequency(c, h) = f;
      p.phase_shift(c, h) = s;
    }
  }
  return p;
}

}  // namespace soskit
