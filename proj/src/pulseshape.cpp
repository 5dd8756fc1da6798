// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/pulseshape.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace paragate {

namespace {

// Continuous step response of the model at time t >= 0.
double step_value(const DistortionModel& model, double t) {
  double s = 1.0 + model.undershoot * std::exp(-t / model.tau);
  if (model.ringing) {
    const RingingSpec& r = *model.ringing;
    s += r.amplitude * std::exp(-t / r.decay_time) * std::sin(two_pi * r.frequency * t);
  }
  return s;
}

void check_uniform_grid(const std::vector<double>& taus) {
  require(taus.size() >= 4, "trace needs at least four durations");
  const double dt = taus[1] - taus[0];
  require(dt > 0.0, "durations must be strictly increasing");
  for (size_t k = 1; k < taus.size(); ++k) {
    const double step = taus[k] - taus[k - 1];
    require(std::abs(step - dt) <= 1e-9 * dt,
            "analysis requires uniformly spaced durations");
  }
}

void check_monotone_map(const std::function<double(double)>& map, double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  const int probes = 64;
  double prev = map(lo);
  double direction = 0.0;
  for (int k = 1; k <= probes; ++k) {
    const double v = map(lo + (hi - lo) * k / probes);
    const double d = v - prev;
    if (direction == 0.0 && d != 0.0) direction = d;
    require(d * direction >= 0.0, "flux-to-frequency map is not monotone over the pulse range");
    prev = v;
  }
}

// Composite Simpson of f over [t0, t1] with a fixed even panel count.
double simpson(const std::function<double(double)>& f, double t0, double t1, int panels) {
  const double h = (t1 - t0) / panels;
  double acc = f(t0) + f(t1);
  for (int k = 1; k < panels; ++k) acc += f(t0 + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

CryoscopeTrace synthesize_common(double amplitude, const std::vector<double>& durations,
                                 const std::function<double(double)>& flux_of_t,
                                 const std::function<double(double)>& freq_map) {
  require(!durations.empty(), "no durations given");
  for (size_t k = 0; k < durations.size(); ++k) {
    require(durations[k] >= 0.0, "durations must be non-negative");
    if (k > 0) require(durations[k] > durations[k - 1], "durations must be strictly increasing");
  }
  CryoscopeTrace trace;
  trace.amplitude = amplitude;
  trace.durations = durations;
  trace.qx.resize(durations.size());
  trace.qy.resize(durations.size());
  auto integrand = [&](double t) { return freq_map(flux_of_t(t)); };
  double phi = 0.0;
  double t_prev = 0.0;
  for (size_t k = 0; k < durations.size(); ++k) {
    if (durations[k] > t_prev) phi += simpson(integrand, t_prev, durations[k], 64);
    t_prev = durations[k];
    trace.qx[k] = std::cos(phi);
    trace.qy[k] = std::sin(phi);
  }
  return trace;
}

}  // namespace

void FilterCoefficients::validate() const {
  require(!a.empty() && !b.empty(), "filter needs feedback and feedforward taps");
  require(a.front() != 0.0, "leading feedback tap must be nonzero");
  for (double v : a) require(std::isfinite(v), "non-finite feedback tap");
  for (double v : b) require(std::isfinite(v), "non-finite feedforward tap");
  require(sample_rate > 0.0, "filter needs a positive sample rate");
}

void DistortionModel::validate() const {
  require(std::abs(undershoot) < 1.0, "undershoot magnitude must be below 1");
  require(tau > 0.0, "distortion time constant must be positive");
  if (ringing) {
    require(ringing->decay_time > 0.0, "ringing decay time must be positive");
    require(ringing->frequency > 0.0, "ringing frequency must be positive");
  }
}

std::vector<double> apply_filter(const std::vector<double>& x,
                                 const FilterCoefficients& coeffs) {
  coeffs.validate();
  require(!x.empty(), "empty input waveform");
  const double a0 = coeffs.a.front();
  std::vector<double> y(x.size(), 0.0);
  for (size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (size_t i = 0; i < coeffs.b.size(); ++i)
      if (n >= i) acc += coeffs.b[i] * x[n - i];
    for (size_t j = 1; j < coeffs.a.size(); ++j)
      if (n >= j) acc -= coeffs.a[j] * y[n - j];
    y[n] = acc / a0;
  }
  return y;
}

FilterCoefficients distortion_filter(double undershoot, double tau, double f_s) {
  DistortionModel model;
  model.undershoot = undershoot;
  model.tau = tau;
  model.validate();
  require(f_s > 0.0, "sample rate must be positive");
  const double r = std::exp(-1.0 / (f_s * tau));
  FilterCoefficients coeffs;
  coeffs.sample_rate = f_s;
  coeffs.a = {1.0, -r};
  coeffs.b = {1.0 + undershoot, -((1.0 + undershoot) * r + undershoot * (1.0 - r))};
  return coeffs;
}

FilterCoefficients iir_invert_exponential(double undershoot, double tau, double f_s) {
  DistortionModel model;
  model.undershoot = undershoot;
  model.tau = tau;
  model.validate();
  require(f_s > 0.0, "sample rate must be positive");
  FilterCoefficients coeffs;
  coeffs.sample_rate = f_s;
  if (undershoot == 0.0) {
    coeffs.a = {1.0};
    coeffs.b = {1.0};
    return coeffs;
  }
  const double alpha = 1.0 - std::exp(-1.0 / (f_s * tau * (undershoot + 1.0)));
  const double pole = 1.0 - alpha;
  const double zero = std::exp(-1.0 / (f_s * tau));
  const double gain = (1.0 - pole) / (1.0 - zero);  // unit DC gain
  coeffs.a = {1.0, alpha - 1.0};
  coeffs.b = {gain, -gain * zero};
  return coeffs;
}

std::vector<double> step_response(const DistortionModel& model, int n_samples, double f_s) {
  model.validate();
  require(n_samples >= 1 && f_s > 0.0, "invalid sampling request");
  std::vector<double> s(static_cast<size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) s[static_cast<size_t>(k)] = step_value(model, k / f_s);
  return s;
}

std::vector<double> apply_distortion(const DistortionModel& model,
                                     const std::vector<double>& x, double f_s) {
  require(!x.empty(), "empty input waveform");
  const std::vector<double> s = step_response(model, static_cast<int>(x.size()), f_s);
  std::vector<double> h(s.size());
  h[0] = s[0];
  for (size_t k = 1; k < s.size(); ++k) h[k] = s[k] - s[k - 1];
  std::vector<double> y(x.size(), 0.0);
  for (size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (size_t m = 0; m <= n; ++m) acc += h[m] * x[n - m];
    y[n] = acc;
  }
  return y;
}

std::vector<double> savgol_derivative(const std::vector<double>& y, int window, int order,
                                      double dt) {
  require(window % 2 == 1, "window must be odd");
  require(order >= 1 && window >= order + 2, "window must be at least order + 2");
  require(dt > 0.0, "sample spacing must be positive");
  const int n = static_cast<int>(y.size());
  require(n >= window, "fewer samples than the window");
  const int half = window / 2;

  std::vector<double> dy(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Window pinned inside the data; at the edges the fit is asymmetric and
    // still evaluated at sample i.
    const int start = std::clamp(i - half, 0, n - window);
    Eigen::MatrixXd v(window, order + 1);
    Eigen::VectorXd rhs(window);
    for (int j = 0; j < window; ++j) {
      const double t = static_cast<double>(start + j - i);
      double p = 1.0;
      for (int c = 0; c <= order; ++c) {
        v(j, c) = p;
        p *= t;
      }
      rhs(j) = y[static_cast<size_t>(start + j)];
    }
    const Eigen::VectorXd coeff = v.colPivHouseholderQr().solve(rhs);
    dy[static_cast<size_t>(i)] = coeff(1) / dt;
  }
  return dy;
}

CryoscopeTrace cryoscope_synthesize(const DistortionModel& model, double amplitude,
                                    const std::vector<double>& durations,
                                    const std::function<double(double)>& freq_map) {
  model.validate();
  const double hi = amplitude * (1.0 + std::abs(model.undershoot) +
                                 (model.ringing ? std::abs(model.ringing->amplitude) : 0.0));
  check_monotone_map(freq_map, std::min(0.0, hi), std::max(0.0, hi));
  auto flux_of_t = [&](double t) { return amplitude * step_value(model, t); };
  return synthesize_common(amplitude, durations, flux_of_t, freq_map);
}

CryoscopeTrace cryoscope_synthesize_waveform(const DistortionModel& model,
                                             const std::vector<double>& waveform, double f_s,
                                             const std::vector<double>& durations,
                                             const std::function<double(double)>& freq_map) {
  model.validate();
  require(f_s > 0.0, "sample rate must be positive");
  require(waveform.size() >= 2, "waveform too short");
  const std::vector<double> distorted = apply_distortion(model, waveform, f_s);
  require(durations.back() <= (waveform.size() - 1) / f_s + 1e-12,
          "durations extend beyond the waveform");
  const auto [lo_it, hi_it] = std::minmax_element(distorted.begin(), distorted.end());
  check_monotone_map(freq_map, *lo_it, *hi_it);
  auto flux_of_t = [&](double t) {
    // Linear interpolation between samples.
    const double pos = std::clamp(t * f_s, 0.0, static_cast<double>(distorted.size() - 1));
    const size_t k = static_cast<size_t>(pos);
    if (k + 1 >= distorted.size()) return distorted.back();
    const double frac = pos - static_cast<double>(k);
    return distorted[k] * (1.0 - frac) + distorted[k + 1] * frac;
  };
  const double amp = *std::max_element(waveform.begin(), waveform.end(),
                                       [](double a, double b) {
                                         return std::abs(a) < std::abs(b);
                                       });
  return synthesize_common(amp, durations, flux_of_t, freq_map);
}

std::vector<double> cryoscope_analyze(const CryoscopeTrace& trace,
                                      const std::function<double(double)>& inverse_freq_map,
                                      int savgol_window) {
  check_uniform_grid(trace.durations);
  require(trace.qx.size() == trace.durations.size() &&
              trace.qy.size() == trace.durations.size(),
          "trace quadratures mismatch the duration grid");
  for (size_t k = 0; k < trace.qx.size(); ++k)
    require(std::abs(trace.qx[k]) <= 1.0 + 1e-9 && std::abs(trace.qy[k]) <= 1.0 + 1e-9,
            "quadratures must lie in [-1, 1]");
  const size_t n = trace.durations.size();
  const double dt = trace.durations[1] - trace.durations[0];

  // Dominant-frequency demodulation: largest nonzero DFT bin of e^{i phi},
  // ties toward the lower |frequency|.
  std::vector<std::complex<double>> z(n);
  for (size_t k = 0; k < n; ++k) z[k] = {trace.qx[k], trace.qy[k]};
  double best_mag = -1.0;
  double omega0 = 0.0;
  for (size_t m = 1; m < n; ++m) {
    std::complex<double> acc = 0.0;
    for (size_t k = 0; k < n; ++k)
      acc += z[k] * std::exp(std::complex<double>(0.0, -two_pi * static_cast<double>(m) *
                                                           static_cast<double>(k) /
                                                           static_cast<double>(n)));
    const double mag = std::abs(acc);
    const double freq = (m <= n / 2 ? static_cast<double>(m)
                                    : static_cast<double>(m) - static_cast<double>(n)) /
                        (static_cast<double>(n) * dt);
    const bool better =
        mag > best_mag * (1.0 + 1e-12) ||
        (std::abs(mag - best_mag) <= 1e-12 * best_mag && std::abs(freq) < std::abs(omega0) / two_pi);
    if (better) {
      best_mag = mag;
      omega0 = two_pi * freq;
    }
  }
  require(best_mag > 0.0, "demodulation failed: no dominant frequency");

  // Unwrap the slow residual phase, restore the carrier, differentiate.
  std::vector<double> phi(n);
  double prev = 0.0, offset = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const std::complex<double> w =
        z[k] * std::exp(std::complex<double>(0.0, -omega0 * trace.durations[k]));
    double raw = std::arg(w);
    if (k > 0) {
      while (raw + offset - prev > pi) offset -= two_pi;
      while (raw + offset - prev < -pi) offset += two_pi;
    }
    prev = raw + offset;
    phi[k] = prev + omega0 * trace.durations[k];
  }
  const std::vector<double> dphi = savgol_derivative(phi, savgol_window, 2, dt);

  std::vector<double> flux(n);
  for (size_t k = 0; k < n; ++k) flux[k] = inverse_freq_map(dphi[k]);
  return flux;
}

std::function<double(double)> invert_monotone_map(const std::function<double(double)>& map,
                                                  double lo, double hi) {
  require(lo < hi, "inversion interval is empty");
  const bool increasing = map(hi) >= map(lo);
  return [map, lo, hi, increasing](double target) {
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      const double v = map(mid);
      if ((v < target) == increasing)
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  };
}

UndershootFit fit_exponential_undershoot(const std::vector<double>& waveform, double dt,
                                         double amplitude, int skip) {
  require(amplitude != 0.0, "fit needs a nonzero amplitude");
  require(skip >= 0 && waveform.size() > static_cast<size_t>(2 * skip) + 8,
          "waveform too short for the requested edge skip");
  // Relative settling deviation; keep samples above 5% of its peak so the
  // log-linear fit sees the exponential and not the noise floor.
  std::vector<double> dev(waveform.size());
  double peak = 0.0;
  for (size_t k = 0; k < waveform.size(); ++k) {
    dev[k] = waveform[k] / amplitude - 1.0;
    if (k >= static_cast<size_t>(skip)) peak = std::max(peak, std::abs(dev[k]));
  }
  require(peak > 0.0, "waveform shows no settling deviation to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  double sign = 0.0;
  for (size_t k = static_cast<size_t>(skip); k < waveform.size() - static_cast<size_t>(skip);
       ++k) {
    if (std::abs(dev[k]) < 0.05 * peak) break;
    if (sign == 0.0) sign = dev[k] > 0.0 ? 1.0 : -1.0;
    if (dev[k] * sign <= 0.0) break;  // sign change: past the exponential tail
    const double x = static_cast<double>(k) * dt;
    const double y = std::log(std::abs(dev[k]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  require(count >= 4, "not enough settling samples for an exponential fit");
  const double denom = count * sxx - sx * sx;
  require(std::abs(denom) > 1e-30, "degenerate exponential fit");
  const double slope = (count * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / count;
  require(slope < 0.0, "settling tail does not decay");
  UndershootFit fit;
  fit.tau = -1.0 / slope;
  fit.undershoot = sign * std::exp(intercept);
  return fit;
}

CmaEsResult cma_es_minimize(const VectorFn& objective, const Eigen::VectorXd& x0,
                            double sigma0, long budget, std::uint64_t seed) {
  CmaEsOptions opts;
  opts.sigma0 = sigma0;
  opts.max_evals = budget;
  opts.seed = seed;
  return cma_es(objective, x0, opts);
}

FilterCoefficients fir_optimize(const std::vector<double>& measured_response,
                                const std::vector<double>& target, double f_s,
                                int n_taps, std::uint64_t seed) {
  require(measured_response.size() == target.size() && !target.empty(),
          "measured response and target must have equal length");
  require(n_taps >= 1 && static_cast<size_t>(n_taps) <= measured_response.size(),
          "invalid tap count");
  require(f_s > 0.0, "sample rate must be positive");

  auto normalized = [&](const Eigen::VectorXd& v) {
    std::vector<double> b(v.data(), v.data() + v.size());
    double total = 0.0;
    for (double t : b) total += t;
    if (std::abs(total) < 1e-6) return std::vector<double>{};
    for (double& t : b) t /= total;
    return b;
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    const std::vector<double> b = normalized(v);
    if (b.empty()) return 1e12;  // DC-gain collapse: reject
    FilterCoefficients fir{{1.0}, b, f_s};
    const std::vector<double> y = apply_filter(measured_response, fir);
    double mse = 0.0;
    for (size_t k = 0; k < y.size(); ++k) mse += (y[k] - target[k]) * (y[k] - target[k]);
    return mse / static_cast<double>(y.size());
  };

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n_taps);
  x0(0) = 1.0;
  const CmaEsResult best = cma_es_minimize(objective, x0, 0.1, 6000, seed);
  const std::vector<double> taps = normalized(best.x);
  require(!taps.empty(), "optimizer collapsed the DC gain");
  FilterCoefficients coeffs;
  coeffs.a = {1.0};
  coeffs.b = taps;
  coeffs.sample_rate = f_s;
  return coeffs;
}

}  // namespace paragate
