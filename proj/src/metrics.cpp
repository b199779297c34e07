// Copyright 2026 The scgossip Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "scg/metrics.hpp"

#include <cmath>

#include "scg/errors.hpp"

namespace scg {

double psi(const Matrix& x) {
  const auto mean = column_mean(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double dev = r[j] - mean[j];
      sum += dev * dev;
    }
  }
  return std::sqrt(sum);
}

std::string RunTrace::invariant_violation() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].t != static_cast<long>(i)) return "round index not consecutive from 0";
    if (!(rows[i].psi >= 0.0)) return "negative or NaN psi";
    if (i > 0 && rows[i].bits_cumulative < rows[i - 1].bits_cumulative)
      return "cumulative bits decreased";
  }
  if (converged && (rows.empty() || rows.back().psi > metadata.epsilon))
    return "converged flag set but final psi above epsilon";
  return {};
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "t,psi,bits_cumulative\n";
  for (const auto& row : trace.rows) {
    out += std::to_string(row.t);
    out += ',';
    out += format_double(row.psi);
    out += ',';
    out += std::to_string(row.bits_cumulative);
    out += '\n';
  }
  return out;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares needs >= 2 paired points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("least_squares: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

RateFit fit_linear_rate(std::span<const double> t, std::span<const double> psi_values,
                        double burn_in_fraction) {
  if (t.size() != psi_values.size()) throw InvalidArgument("fit_linear_rate: length mismatch");
  std::size_t positive = 0;
  for (double p : psi_values) positive += p > 0.0 ? 1 : 0;
  if (positive < 20) throw InvalidArgument("fit_linear_rate: need at least 20 rows with psi > 0");

  const auto burn_in = static_cast<std::size_t>(std::floor(burn_in_fraction * t.size()));
  std::vector<double> xs, ys;
  for (std::size_t i = burn_in; i < t.size(); ++i) {
    if (psi_values[i] > 0.0 && std::isfinite(psi_values[i])) {
      xs.push_back(t[i]);
      ys.push_back(std::log(psi_values[i]));
    }
  }
  if (xs.size() < 2) throw InvalidArgument("fit_linear_rate: not enough points after burn-in");
  const auto line = least_squares(xs, ys);
  return {std::exp(line.slope), line.r_squared, burn_in};
}

RateFit fit_linear_rate(const RunTrace& trace, double burn_in_fraction) {
  std::vector<double> t, p;
  t.reserve(trace.rows.size());
  p.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    t.push_back(static_cast<double>(row.t));
    p.push_back(row.psi);
  }
  return fit_linear_rate(t, p, burn_in_fraction);
}

double scaling_exponent(std::span<const ScalingPoint> points) {
  if (points.size() < 4) throw InvalidArgument("scaling_exponent: need at least 4 points");
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    if (!p.converged) {
      throw InvalidArgument("scaling_exponent: point n = " + format_double(p.n) +
                            " did not converge");
    }
    if (!(p.n > 0.0 && p.rounds > 0.0))
      throw InvalidArgument("scaling_exponent: n and rounds must be positive");
    xs.push_back(std::log(p.n));
    ys.push_back(std::log(p.rounds));
  }
  return least_squares(xs, ys).slope;
}

}  // namespace scg
