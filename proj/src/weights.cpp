#include "komatsu/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace komatsu {

namespace {

// Two-pass fit of g_k <= log A + k log H with A, H >= 1:
// log H from the worst secant through g_0, then log A from the residual.
void two_pass_fit(const std::vector<double>& g, double& log_A, double& log_H) {
  log_H = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k)
    log_H = std::max(log_H, (g[k] - g[0]) / static_cast<double>(k));
  log_A = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    log_A = std::max(log_A, g[k] - static_cast<double>(k) * log_H);
}

std::vector<double> increments(const std::vector<double>& v) {
  std::vector<double> d;
  d.reserve(v.size() > 0 ? v.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) d.push_back(v[i + 1] - v[i]);
  return d;
}

double mean_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi <= lo) return 0.0;
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo);
}

// Trailing-quarter mean increment must not exceed the third-quarter mean
// by more than slope_tol. Short lists pass.
bool increments_stable(const std::vector<double>& d, double slope_tol,
                       std::optional<long>* first_violation) {
  const std::size_t m = d.size();
  if (m < 4) return true;
  const std::size_t q3 = m / 2, q4 = 3 * m / 4;
  const double ref = mean_range(d, q3, q4) + slope_tol;
  if (mean_range(d, q4, m) <= ref) return true;
  if (first_violation) {
    for (std::size_t i = q4; i < m; ++i)
      if (d[i] > ref) {
        *first_violation = static_cast<long>(i);
        break;
      }
  }
  return false;
}

}  // namespace

WeightSequence WeightSequence::factorial_power(double s, Variant variant, long k_guard) {
  if (!(s > 0.0)) throw std::invalid_argument("factorial_power: s must be > 0");
  if (k_guard < 2) throw std::invalid_argument("factorial_power: k_guard must be >= 2");
  WeightSequence w;
  w.s_ = s;
  w.k_max_ = k_guard;
  w.variant_ = variant;
  w.fit_stability();
  return w;
}

WeightSequence WeightSequence::from_values(const std::vector<double>& values,
                                           Variant variant) {
  std::vector<double> lg(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw NonpositiveWeight("weight table entry " + std::to_string(i) +
                              " is not a finite positive value");
    lg[i] = std::log(values[i]);
  }
  return from_log_values(std::move(lg), variant);
}

WeightSequence WeightSequence::from_log_values(std::vector<double> log_values,
                                               Variant variant) {
  if (log_values.size() < 2)
    throw std::invalid_argument("weight table needs at least two entries");
  for (double v : log_values)
    if (!std::isfinite(v)) throw NonpositiveWeight("weight table entry is not finite");
  WeightSequence w;
  w.values_log_ = std::move(log_values);
  w.k_max_ = static_cast<long>(w.values_log_.size()) - 1;
  w.variant_ = variant;
  w.fit_stability();
  return w;
}

void WeightSequence::fit_stability() {
  const long horizon = tabulated() ? k_max_ - 1 : std::min<long>(k_max_, 128);
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(horizon) + 1);
  for (long k = 0; k <= horizon; ++k) g.push_back(log_weight(k + 1) - log_weight(k));
  double log_A, log_H;
  two_pass_fit(g, log_A, log_H);
  fit_A_ = std::exp(log_A);
  fit_H_ = std::exp(log_H);
}

double WeightSequence::log_weight(long k) const {
  if (k < 0) throw std::invalid_argument("log_weight: negative index");
  if (tabulated()) {
    if (k > k_max_)
      throw HorizonTooSmall("weight table ends at k = " + std::to_string(k_max_) +
                            ", index " + std::to_string(k) + " requested");
    return values_log_[static_cast<std::size_t>(k)];
  }
  return s_ * std::lgamma(static_cast<double>(k) + 1.0);
}

double WeightSequence::log_weight_interp(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("log_weight_interp: x must be >= 0");
  const double fl = std::floor(x);
  const long k0 = static_cast<long>(fl);
  const double frac = x - fl;
  if (frac == 0.0) return log_weight(k0);
  return (1.0 - frac) * log_weight(k0) + frac * log_weight(k0 + 1);
}

double WeightSequence::power() const {
  if (tabulated()) throw std::logic_error("power(): sequence is tabulated");
  return s_;
}

std::string WeightSequence::describe() const {
  std::ostringstream os;
  if (tabulated())
    os << "tabulated(n=" << values_log_.size() << ")";
  else
    os << "factorial_power(s=" << s_ << ")";
  os << (variant_ == Variant::roumieu ? " roumieu" : " beurling");
  return os.str();
}

ConditionReport verify_conditions(const WeightSequence& w, long k_max) {
  if (k_max < 2) throw std::invalid_argument("verify_conditions: k_max must be >= 2");
  const long K2 = 2 * k_max;
  if (w.tabulated() && w.k_max() < K2)
    throw HorizonTooSmall("verify_conditions: table must reach 2*k_max = " +
                          std::to_string(K2));

  ConditionReport rep;
  rep.horizon = k_max;

  rep.m0.passed = std::abs(w.log_weight(0)) <= 1e-12;
  if (!rep.m0.passed) rep.m0.first_violation = 0;

  {
    std::vector<double> g;
    for (long k = 0; k <= k_max; ++k) g.push_back(w.log_weight(k + 1) - w.log_weight(k));
    two_pass_fit(g, rep.m1.log_A, rep.m1.log_H);
    rep.m1.passed = increments_stable(increments(g), 0.05, &rep.m1.first_violation);
  }

  {
    std::vector<double> h;
    for (long k = 0; k <= k_max; ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (long q = 0; q <= k; ++q)
        best = std::min(best, w.log_weight(q) + w.log_weight(k - q));
      h.push_back(w.log_weight(2 * k) - best);
    }
    two_pass_fit(h, rep.m2.log_A, rep.m2.log_H);
    rep.m2.passed = std::isfinite(rep.m2.log_A) && std::isfinite(rep.m2.log_H);
  }

  std::vector<double> t;
  for (long k = 0; k <= K2; ++k)
    t.push_back(std::lgamma(static_cast<double>(k) + 1.0) - w.log_weight(k));
  {
    rep.m3.passed = increments_stable(increments(t), 0.05, &rep.m3.first_violation);
    double log_l = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < t.size(); ++k)
      log_l = std::max(log_l, (t[k] - t[0]) / static_cast<double>(k));
    double log_C = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t.size(); ++k)
      log_C = std::max(log_C, t[k] - static_cast<double>(k) * log_l);
    rep.m3.log_l = log_l;
    rep.m3.log_C = log_C;
  }

  {
    const double grid[] = {1.0, 0.6, 0.35, 0.2, 0.1};
    rep.m3_all_l_passed = true;
    for (double l : grid) {
      GridPointCheck gp;
      gp.l = l;
      std::vector<double> r(t.size());
      for (std::size_t k = 0; k < t.size(); ++k)
        r[k] = t[k] - static_cast<double>(k) * std::log(l);
      const std::size_t arg =
          static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
      gp.log_C = r[arg];
      if (arg + 8 <= r.size()) {
        gp.passed = true;
      } else {
        // Peak not bracketed by the horizon; accept when the tail is
        // already descending or still decelerating.
        const auto d = increments(r);
        const std::size_t m = d.size(), q3 = m / 2, q4 = 3 * m / 4;
        const double m3q = mean_range(d, q3, q4), m4q = mean_range(d, q4, m);
        gp.passed = (m4q <= 0.0) || (m4q <= m3q - 0.01);
        gp.extrapolated = true;
      }
      rep.m3_all_l_passed = rep.m3_all_l_passed && gp.passed;
      rep.m3_all_l.push_back(gp);
    }
  }

  return rep;
}

namespace {

// Upward scan for sup_k (nu k log r - log M_{nu k}). Terms are unimodal in k
// for log-convex tables, so eight consecutive non-increasing terms end the scan.
// k_start may skip the left flank when the caller knows the peak is beyond it.
struct ScanResult {
  double value;
  long argmax;
};

ScanResult scan_sup(const WeightSequence& w, double nu, double log_r, long k_start,
                    long k_guard) {
  const double table_end =
      w.tabulated() ? static_cast<double>(w.k_max()) : std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  long arg = k_start;
  int drops = 0;
  double prev = -std::numeric_limits<double>::infinity();
  for (long k = k_start;; ++k) {
    const double x = nu * static_cast<double>(k);
    if (x > table_end)
      throw DivergentSupremum("associated function: table horizon reached before "
                              "the supremum stabilized");
    if (k > k_guard)
      throw DivergentSupremum("associated function: scan guard reached at k = " +
                              std::to_string(k));
    const double term = x * log_r - w.log_weight_interp(x);
    if (term > best) {
      best = term;
      arg = k;
    }
    if (term <= prev) {
      if (++drops >= 8) break;
    } else {
      drops = 0;
    }
    prev = term;
  }
  return {best, arg};
}

}  // namespace

double associated_function(const WeightSequence& w, double nu, double r) {
  if (!(nu > 0.0)) throw std::invalid_argument("associated_function: nu must be > 0");
  if (!(r > 0.0)) throw std::invalid_argument("associated_function: r must be > 0");
  return scan_sup(w, nu, std::log(r), 0, w.k_max()).value;
}

std::vector<double> associated_function_profile(const WeightSequence& w, double nu,
                                                double L, const std::vector<double>& xs) {
  if (!(nu > 0.0) || !(L > 0.0))
    throw std::invalid_argument("associated_function_profile: nu and L must be > 0");
  std::vector<double> out;
  out.reserve(xs.size());
  long k_start = 0;
  double prev_x = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    if (x < prev_x)
      throw std::invalid_argument("associated_function_profile: xs must be nondecreasing");
    prev_x = x;
    const double r = L * x;
    if (!(r > 0.0)) {
      out.push_back(0.0);
      continue;
    }
    const ScanResult s = scan_sup(w, nu, std::log(r), k_start, w.k_max());
    k_start = s.argmax;
    out.push_back(s.value);
  }
  return out;
}

SlopeFit associated_slope(const WeightSequence& w, double nu, double r_min, double r_max,
                          int points) {
  if (!(r_min > 0.0) || !(r_max > r_min) || points < 2)
    throw std::invalid_argument("associated_slope: bad grid");
  std::vector<double> rs(points);
  for (int i = 0; i < points; ++i)
    rs[i] = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (points - 1));
  const std::vector<double> ms = associated_function_profile(w, nu, 1.0, rs);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (int i = 0; i < points; ++i) {
    if (ms[i] <= 0.0) continue;
    const double x = std::log(rs[i]);
    const double y = std::log(ms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::runtime_error("associated_slope: too few positive samples");
  SlopeFit fit;
  const double dn = static_cast<double>(n);
  fit.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / dn;
  return fit;
}

BoundedRatioResult bounded_ratio_check(const WeightSequence& w, double nu, double q,
                                       double delta, double L,
                                       const std::vector<double>& lambdas) {
  std::vector<double> xs(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0))
      throw std::invalid_argument("bounded_ratio_check: eigenvalues must be >= 0");
    if (i > 0 && lambdas[i] < lambdas[i - 1])
      throw std::invalid_argument("bounded_ratio_check: eigenvalues must be sorted");
    xs[i] = std::pow(lambdas[i], 1.0 / nu);
  }
  const std::vector<double> ms = associated_function_profile(w, nu, L, xs);
  BoundedRatioResult res;
  double best = -std::numeric_limits<double>::infinity();
  long last_new_max = -1;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    double lv;
    if (q == 0.0)
      lv = 0.0;
    else if (lambdas[i] == 0.0)
      continue;
    else
      lv = q * std::log(lambdas[i]);
    const double val = lv - delta * ms[i];
    if (val > best) {
      best = val;
      res.argmax = static_cast<long>(i);
      last_new_max = static_cast<long>(i);
    }
  }
  res.sup = std::exp(best);
  const long cutoff = static_cast<long>(3 * lambdas.size() / 4);
  res.stabilized = last_new_max >= 0 && last_new_max < cutoff;
  return res;
}

DoublingFit fit_doubling(const WeightSequence& w, double nu, double r_min, double r_max,
                         int points) {
  std::vector<double> rs(points);
  for (int i = 0; i < points; ++i)
    rs[i] = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (points - 1));
  const std::vector<double> m1 = associated_function_profile(w, nu, 1.0, rs);
  const double candidates[] = {1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0};
  DoublingFit fit;
  for (double c : candidates) {
    const std::vector<double> mc = associated_function_profile(w, nu, c, rs);
    double sup = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (int i = 0; i < points; ++i) {
      const double d = 2.0 * m1[i] - mc[i];
      if (d > sup) {
        sup = d;
        arg = static_cast<std::size_t>(i);
      }
    }
    fit.c = c;
    fit.log_A2 = std::max(0.0, sup);
    if (arg < static_cast<std::size_t>(3 * points / 4)) {
      fit.stable = true;
      return fit;
    }
  }
  fit.stable = false;
  return fit;
}

}  // namespace komatsu
