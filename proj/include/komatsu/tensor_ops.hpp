#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "komatsu/coeff_space.hpp"
#include "komatsu/spectral_model.hpp"

namespace komatsu {

// Maps sampled functions to sampled functions on the same quadrature.
// Must be pure; tensor construction calls it concurrently.
using SampleOp = std::function<Samples(const Samples&)>;

// Block tensor of a linear map: block (k, j) is the d_k x d_j matrix sending
// input coefficients of eigenvalue block j to output block k. Row-major.
struct TensorRep {
  std::shared_ptr<const SpectralModel> in_model, out_model;
  long K = 0, J = 0;
  std::vector<std::vector<std::vector<cplx>>> blocks;  // [k][j], d_k*d_j entries

  // Energy in the top output band originating from lower input blocks
  // exceeded 1% of those columns' total.
  bool aliasing_warning = false;
  double aliasing_fraction = 0.0;

  const std::vector<cplx>& block(long k, long j) const {
    return blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
  }
  cplx entry(long k, long j, int i, int l) const;

  static TensorRep create(std::shared_ptr<const SpectralModel> in_model,
                          std::shared_ptr<const SpectralModel> out_model, long K, long J,
                          std::vector<std::vector<std::vector<cplx>>> blocks);
};

// Column (j, l) holds the first K coefficient blocks of op(e_j^l).
TensorRep from_basis_action(const SampleOp& op,
                            std::shared_ptr<const SpectralModel> model, long K, long J);

// Output block k = sum_j f_{kj} u(j) over j < min(J, u.J()).
CoeffArray apply(const TensorRep& T, const CoeffArray& u);

// S_{jk} = (f_{kj})^t, plain transpose without conjugation. Involution.
TensorRep adjoint_transpose(const TensorRep& T);

struct AdjointnessReport {
  double residual = 0.0;        // |<Tu, v> - <u, T^t v>| at matched truncation
  double roundoff_scale = 0.0;  // expected round-off for the sums involved
  double truncation_estimate = 0.0;  // bound on the mass ignored beyond (K, J)
  bool truncation_dominated = false;
};

AdjointnessReport adjointness_residual(const TensorRep& T, const CoeffArray& u,
                                       const CoeffArray& v);

struct SequentialityReport {
  bool rows_stabilized = false;      // every row's absolute sum saturates
  bool weighted_stabilized = false;  // the v-weighted double sum saturates
  double weighted_value = 0.0;
  long rows_checked = 0;
  std::vector<double> row_sums;  // final absolute row sums, flat over (k, i)
};

// Absolute row sums sum_j sum_l |f_{kjli}| |u(j,l)| per output row (k,i) and
// the v-weighted aggregate, tracked over increasing input truncations.
// Stabilized: relative growth over the trailing quarter below 1e-9.
SequentialityReport sequentiality_probe(const TensorRep& T, const CoeffArray& u,
                                        const CoeffArray& v);

struct MultiplierResult {
  bool accepted = false;
  double off_diag_ratio = 0.0;  // off-diagonal Frobenius mass / total
  std::vector<std::vector<cplx>> sigma;  // diagonal blocks when accepted
};

// Accepts when off-diagonal Frobenius mass is at most off_diag_tol of the
// total, returning sigma(l) = f_{ll}. Requires K == J on one model.
MultiplierResult multiplier_extract(const TensorRep& T, double off_diag_tol = 1e-10);

// Catalog operators. laplacian: any manifold; derivative: circle only;
// multiply: by cos(theta) on the circle, cos(t1) on the torus, z on the
// sphere.
SampleOp op_laplacian(std::shared_ptr<const SpectralModel> model);
SampleOp op_derivative(std::shared_ptr<const SpectralModel> model);
SampleOp op_multiply(std::shared_ptr<const SpectralModel> model);

}  // namespace komatsu
