#pragma once

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace komatsu {

using cplx = std::complex<double>;
// Function values on the quadrature nodes, in node order.
using Samples = std::vector<cplx>;

// Thrown when an explicit quadrature size cannot integrate products of two
// retained basis functions exactly.
struct QuadratureUnderresolved : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when an operation needs quadrature on a model built without one.
struct NoQuadrature : std::logic_error {
  using std::logic_error::logic_error;
};

enum class Manifold { circle, torus2, sphere2 };

std::string manifold_name(Manifold m);
Manifold manifold_from_name(const std::string& name);

// Coordinates: circle {theta,0,0}; torus2 {t1,t2,0}; sphere2 unit vector.
struct Point {
  std::array<double, 3> x{0.0, 0.0, 0.0};
};

// Laplace eigenstructure truncated to the first J distinct eigenvalues,
// with a quadrature exact on products of retained basis functions.
// Immutable after build; evaluations are pure and thread-safe.
class SpectralModel {
 public:
  Manifold manifold() const { return manifold_; }
  int dim() const { return n_; }
  double order() const { return 2.0; }  // Laplacian
  long J() const { return J_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<int>& mults() const { return mults_; }
  long total_dim() const { return offsets_.back(); }
  long block_offset(long l) const { return offsets_[static_cast<std::size_t>(l)]; }

  // True when built for spectral data only; quadrature calls throw.
  bool data_only() const { return nodes_.empty(); }
  long quadrature_size() const { return quad_size_; }
  const std::vector<Point>& nodes() const;
  const std::vector<double>& weights() const;

  // k is the 1-based position inside eigenspace l.
  double eval_basis(long l, int k, const Point& p) const;
  std::string basis_label(long l, int k) const;

  // Row of sampled basis values over the nodes, i 0-based inside block l.
  // Built lazily on first use, shared across threads afterwards.
  const std::vector<double>& basis_row(long l, int i) const;

  // torus2 only: representative lattice points of block l, one per +/- pair.
  const std::vector<std::pair<int, int>>& lattice_reps(long l) const;

  static std::shared_ptr<const SpectralModel> build(Manifold m, long J,
                                                    long quadrature_size);

 private:
  SpectralModel() = default;
  void ensure_table() const;

  Manifold manifold_ = Manifold::circle;
  int n_ = 1;
  long J_ = 0;
  std::vector<double> lambdas_;
  std::vector<int> mults_;
  std::vector<long> offsets_;
  std::vector<std::vector<std::pair<int, int>>> reps_;  // torus2
  long quad_size_ = 0;
  std::vector<Point> nodes_;
  std::vector<double> weights_;

  mutable std::once_flag table_once_;
  mutable std::vector<std::vector<double>> table_;
};

// quadrature_size: 0 chooses the minimal exact size, kNoQuadrature builds a
// data-only model (eigenvalues, multiplicities, closed-form evaluation, no
// nodes). Explicit sizes below the exactness minimum throw
// QuadratureUnderresolved. For torus2 the size is per dimension; for sphere2
// it is the Gauss node count in colatitude (azimuthal count is twice that).
inline constexpr long kNoQuadrature = -1;
std::shared_ptr<const SpectralModel> build_model(Manifold m, long J,
                                                 long quadrature_size = 0);

Samples sample_function(const SpectralModel& model,
                        const std::function<cplx(const Point&)>& f);

// Sum of w * f * conj(g) over the nodes.
cplx inner_product(const SpectralModel& model, const Samples& f, const Samples& g);

// max |<e_a, e_b> - delta_ab| over all retained basis pairs.
double gram_residual(const SpectralModel& model);

struct WeylReport {
  double sup = 0.0;
  long argmax = 0;
  // Running sup gained no new maximum over the trailing half of the range.
  bool stable = false;
};

// sup over j of d_j / (1+lambda_j)^{n/nu}.
WeylReport weyl_multiplicity_check(const SpectralModel& model);

struct SummabilityReport {
  double sum = 0.0;
  double decay_slope = 0.0;  // log-increment vs log-index, trailing half
  bool diverging = false;    // slope >= -1.05: increments c/j or slower
  bool tight_tail = false;   // last-quarter increment below 1e-6 of the sum
};

// Partial sums of d_j (1+lambda_j)^{-q} over j < J (J clamped to the model).
SummabilityReport summability_probe(const SpectralModel& model, double q, long J);

struct SupnormReport {
  double sup = 0.0;
  long argmax = 1;
};

// sup over l >= 1 of max_k ||e_l^k||_inf / lambda_l^{(n-1)/(2 nu)},
// sup norms taken over the quadrature grid.
SupnormReport supnorm_ratio_check(const SpectralModel& model);

}  // namespace komatsu
