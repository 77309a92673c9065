#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace komatsu {

// Thrown when a check needs table entries past the stored horizon.
struct HorizonTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on construction from a table containing a value <= 0 or non-finite.
struct NonpositiveWeight : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when the associated-function scan hits the horizon while terms are
// still rising, i.e. the supremum has not been bracketed.
struct DivergentSupremum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Variant { roumieu, beurling };

// Positive sequence M_0 = 1, M_1, ... handled in log space throughout.
// Factorial-power sequences evaluate lazily; tabulated ones carry their table.
class WeightSequence {
 public:
  // M_k = (k!)^s, s > 0. k_guard bounds how far scans may walk.
  static WeightSequence factorial_power(double s, Variant variant = Variant::roumieu,
                                        long k_guard = 2000000);
  // Table of M_k values starting at k = 0. Values must be finite and > 0.
  static WeightSequence from_values(const std::vector<double>& values,
                                    Variant variant = Variant::roumieu);
  // Table of log M_k values starting at k = 0.
  static WeightSequence from_log_values(std::vector<double> log_values,
                                        Variant variant = Variant::roumieu);

  // log M_k. Throws HorizonTooSmall past the table (tabulated only).
  double log_weight(long k) const;
  // log M_x for real x >= 0, linear in k between integer nodes.
  double log_weight_interp(double x) const;

  long k_max() const { return k_max_; }
  Variant variant() const { return variant_; }
  bool tabulated() const { return !values_log_.empty(); }
  double power() const;  // s for factorial_power kind; throws otherwise

  // Stability constants from the two-pass fit of M_{k+1} <= A H^k M_k
  // over the construction horizon. Both >= 1.
  double stability_A() const { return fit_A_; }
  double stability_H() const { return fit_H_; }

  std::string describe() const;

 private:
  WeightSequence() = default;
  void fit_stability();

  double s_ = 0.0;  // exponent when not tabulated
  std::vector<double> values_log_;
  long k_max_ = 0;
  Variant variant_ = Variant::roumieu;
  double fit_A_ = 1.0, fit_H_ = 1.0;
};

struct ConditionCheck {
  bool passed = false;
  double log_A = 0.0, log_H = 0.0;  // growth conditions
  double log_C = 0.0, log_l = 0.0;  // factorial domination
  std::optional<long> first_violation;
};

struct GridPointCheck {
  double l = 0.0;
  bool passed = false;
  double log_C = 0.0;
  // Verdict rests on the trend at the horizon edge rather than an
  // interior turning point.
  bool extrapolated = false;
};

struct ConditionReport {
  long horizon = 0;
  ConditionCheck m0;       // M_0 == 1
  ConditionCheck m1;       // M_{k+1} <= A H^k M_k, increments must stabilize
  ConditionCheck m2;       // M_{2k} <= A H^k min_q M_q M_{k-q}, fit only
  ConditionCheck m3;       // k! <= C l^k M_k for some l
  std::vector<GridPointCheck> m3_all_l;  // same bound for every l in a decreasing grid
  bool m3_all_l_passed = false;
};

// Checks the sequence conditions over k <= 2*k_max (the table horizon).
// Requires k_max >= 2; tabulated sequences must cover 2*k_max.
ConditionReport verify_conditions(const WeightSequence& w, long k_max);

// M(r) = sup_k (nu k log r - log M_{nu k}), scan upward in k until eight
// consecutive non-increasing terms, always >= 0 (k = 0 term).
double associated_function(const WeightSequence& w, double nu, double r);

// M(L x_i) for nondecreasing x. Reuses the scan position across entries;
// valid because the maximizing k is nondecreasing in r for log-convex M.
std::vector<double> associated_function_profile(const WeightSequence& w, double nu,
                                                double L,
                                                const std::vector<double>& xs);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares slope of log M(r) against log r over a log-spaced grid,
// points with M(r) <= 0 dropped. For (k!)^s the slope approaches 1/s.
SlopeFit associated_slope(const WeightSequence& w, double nu, double r_min,
                          double r_max, int points);

struct BoundedRatioResult {
  double sup = 0.0;
  long argmax = -1;
  // No new running maximum inside the trailing quarter of the list.
  bool stabilized = false;
};

// sup over the given eigenvalues of lambda^q exp(-delta M(L lambda^{1/nu})).
BoundedRatioResult bounded_ratio_check(const WeightSequence& w, double nu, double q,
                                       double delta, double L,
                                       const std::vector<double>& lambdas);

struct DoublingFit {
  double c = 0.0;      // smallest factor with 2 M(r) <= M(c r) + log A2
  double log_A2 = 0.0;
  bool stable = false;  // sup of the defect attained before the grid tail
};

// Scans candidate factors over a log-spaced r grid.
DoublingFit fit_doubling(const WeightSequence& w, double nu, double r_min = 0.1,
                         double r_max = 10000.0, int points = 120);

}  // namespace komatsu
