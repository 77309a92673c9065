#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "komatsu/spectral_model.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

// Block coefficient array over the first J() distinct eigenvalues of a model.
// Block l has the model's multiplicity d_l. Immutable by convention.
struct CoeffArray {
  std::shared_ptr<const SpectralModel> model;
  std::vector<std::vector<cplx>> blocks;

  long J() const { return static_cast<long>(blocks.size()); }

  // Validates block lengths against the model and entry finiteness.
  static CoeffArray create(std::shared_ptr<const SpectralModel> model,
                           std::vector<std::vector<cplx>> blocks);
};

// Coefficients of f against the first J retained blocks (J < 0: all).
CoeffArray analyze(std::shared_ptr<const SpectralModel> model, const Samples& f,
                   long J = -1);

// Truncated expansion at a point (closed-form basis evaluation).
cplx synthesize_at(const CoeffArray& u, const Point& x);

// Truncated expansion sampled on the quadrature nodes.
Samples synthesize(const CoeffArray& u);

// | quadrature norm^2 of f  -  sum of squared block norms |.
double plancherel_residual(const std::shared_ptr<const SpectralModel>& model,
                           const Samples& f);

// l^p norm of block l; p >= 1, infinity allowed. p = 2 is the HS norm.
double block_norm(const CoeffArray& u, long l, double p);
double hs_norm(const std::vector<cplx>& block);

struct NormIneqReport {
  double worst_slack = 0.0;  // min over trials of (bound - norm); >= 0 when valid
  long violations = 0;
};

// Randomized check of ||a||_q <= d^{2/q} ||a||_p and
// ||a||_p <= d^{2(1/p-1/q)} ||a||_q for 1 <= p < q <= infinity
// over complex vectors of length d.
NormIneqReport norm_inequality_check(int d, double p, double q, int trials,
                                     std::uint64_t seed = 12345);

enum class DecayClass {
  smooth,
  analytic,
  gevrey_roumieu,
  gevrey_beurling,
  alpha_dual_roumieu,
  alpha_dual_beurling,
  none,
};

std::string decay_class_name(DecayClass c);
DecayClass decay_class_from_name(const std::string& name);

// Geometric grid of envelope scales, increasing. Default: 3 decades at
// 24 points per decade.
struct LGrid {
  double min = 0.05;
  double max = 50.0;
  int points = 73;
  std::vector<double> values() const;
};

struct GridVerdict {
  double L = 0.0;
  bool feasible = false;
  double log_C = 0.0;    // Chebyshev level: max residual over usable blocks
  double violation = 0.0;  // trailing-quarter max minus leading-quarter max
};

struct DecayEnvelope {
  DecayClass cls = DecayClass::none;
  double C = 1.0;
  double L = 1.0;
  double residual = 0.0;  // violation at the decisive grid point
  long horizon = 0;
  bool trivial = false;  // all-zero input, class granted vacuously
  std::vector<GridVerdict> grid;
  std::vector<double> window_N;  // local decay exponents (smooth probe)
};

// Membership test of u against the target class.
// Envelopes use blocks l >= 1 with nonzero norm; per grid scale L the level
// log C is the max residual and feasibility requires the trailing-quarter
// residual max to exceed the leading-quarter max by at most tol.
// Decay classes bound log||u_l|| by log C - M(L lambda_l^{1/nu}); growth
// classes bound it by log K + M(L lambda_l^{1/nu}). Existential classes
// report the sharpest feasible scale (largest L for decay, smallest for
// growth); universal classes require every grid scale to be feasible.
// smooth fits local exponents over block windows and requires them to grow.
DecayEnvelope classify(const CoeffArray& u, const WeightSequence& w, DecayClass target,
                       const LGrid& grid, double tol = 0.5);

// Sharpest passing class among gevrey_roumieu, smooth, alpha_dual_roumieu.
DecayClass classify_best(const CoeffArray& u, const WeightSequence& w,
                         const LGrid& grid, double tol = 0.5);

struct PairingReport {
  cplx value = 0.0;  // bilinear: sum of u*v without conjugation
  std::vector<double> abs_partial_sums;  // per block, nondecreasing
  bool converged = false;  // last-quarter increment < 1e-9 relative
};

PairingReport pairing(const CoeffArray& u, const CoeffArray& v);

struct DualityProbe {
  double hs_sum = 0.0;             // sum of ||v_l|| ||w_l||
  double componentwise_sum = 0.0;  // sum of |v_l(i)| |w_l(i)|
  bool hs_converged = false;
  bool componentwise_converged = false;
  bool agree = false;
  double min_cs_slack = 0.0;  // blockwise Cauchy-Schwarz slack, >= 0
  bool hypothesis_warning_v = false;  // v fails its decay class
  bool hypothesis_warning_w = false;  // w fails its growth class
};

// Compares convergence of the blockwise-norm sum against the componentwise
// sum over l < J. Hypotheses: v decay-class member, w growth-class member
// (checked, violations flagged, probe still runs).
DualityProbe duality_equivalence_probe(const CoeffArray& v, const CoeffArray& w, long J,
                                       const WeightSequence& weight, const LGrid& grid,
                                       double tol = 0.5);

struct BidualResult {
  bool found = false;
  double L = 0.0;  // largest grid scale with converging weighted sums
  bool trivial = false;
  std::vector<GridVerdict> grid;
};

// Convergence of sum_l exp(M(L lambda^{1/nu})) ||w_l|| over the grid:
// converging at L when the trailing-quarter max of the log terms sits at
// least tol below the leading-quarter max.
BidualResult bidual_membership(const CoeffArray& w, const WeightSequence& weight,
                               const LGrid& grid, double tol = 0.5);

}  // namespace komatsu
