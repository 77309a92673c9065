#include "komatsu/tensor_ops.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "komatsu/parallel.hpp"

namespace komatsu {

namespace {

double frob_sq(const std::vector<cplx>& m) {
  double s = 0.0;
  for (const cplx& z : m) s += std::norm(z);
  return s;
}

double l2(const std::vector<cplx>& v) { return std::sqrt(frob_sq(v)); }

void require_prefix_match(const SpectralModel& a, const SpectralModel& b, long n,
                          const char* what) {
  if (a.manifold() != b.manifold())
    throw std::invalid_argument(std::string(what) + ": manifold mismatch");
  if (a.J() < n || b.J() < n)
    throw std::invalid_argument(std::string(what) + ": truncation exceeds model");
  for (long l = 0; l < n; ++l) {
    if (a.lambdas()[static_cast<std::size_t>(l)] != b.lambdas()[static_cast<std::size_t>(l)])
      throw std::invalid_argument(std::string(what) + ": eigenvalue mismatch");
  }
}

// Saturation of a nondecreasing partial-sum sequence: the trailing quarter
// adds less than 1e-9 of the final value. Sums at or below the floor carry
// no signal and count as settled.
bool saturated(const std::vector<double>& partial, double floor) {
  const long n = static_cast<long>(partial.size());
  if (n < 2) return true;
  const double total = partial[static_cast<std::size_t>(n - 1)];
  if (total <= floor) return true;
  const long q = std::max<long>(1, n / 4);
  const double before = partial[static_cast<std::size_t>(n - 1 - q)];
  return (total - before) < 1e-9 * total;
}

}  // namespace

cplx TensorRep::entry(long k, long j, int i, int l) const {
  const auto& b = block(k, j);
  const int dj = in_model->mults()[static_cast<std::size_t>(j)];
  return b[static_cast<std::size_t>(i) * static_cast<std::size_t>(dj) +
           static_cast<std::size_t>(l)];
}

TensorRep TensorRep::create(std::shared_ptr<const SpectralModel> in_model,
                            std::shared_ptr<const SpectralModel> out_model, long K, long J,
                            std::vector<std::vector<std::vector<cplx>>> blocks) {
  if (!in_model || !out_model) throw std::invalid_argument("tensor: null model");
  if (K < 1 || J < 1) throw std::invalid_argument("tensor: K and J must be positive");
  require_prefix_match(*in_model, *out_model, std::min(K, J), "tensor");
  if (in_model->J() < J) throw std::invalid_argument("tensor: J exceeds input model");
  if (out_model->J() < K) throw std::invalid_argument("tensor: K exceeds output model");
  if (static_cast<long>(blocks.size()) != K)
    throw std::invalid_argument("tensor: wrong outer block count");
  for (long k = 0; k < K; ++k) {
    const auto& row = blocks[static_cast<std::size_t>(k)];
    if (static_cast<long>(row.size()) != J)
      throw std::invalid_argument("tensor: wrong inner block count");
    const long dk = out_model->mults()[static_cast<std::size_t>(k)];
    for (long j = 0; j < J; ++j) {
      const long dj = in_model->mults()[static_cast<std::size_t>(j)];
      const auto& m = row[static_cast<std::size_t>(j)];
      if (static_cast<long>(m.size()) != dk * dj)
        throw std::invalid_argument("tensor: block shape mismatch");
      for (const cplx& z : m) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
          throw std::invalid_argument("tensor: non-finite entry");
      }
    }
  }

  TensorRep t;
  t.in_model = std::move(in_model);
  t.out_model = std::move(out_model);
  t.K = K;
  t.J = J;
  t.blocks = std::move(blocks);

  // Aliasing guard: columns whose input block sits below the top tenth of
  // the output range should not push mass into that band. Spectral
  // operators keep it clean; band-limited multipliers sampled too close to
  // the truncation edge do not.
  const long k_cut = K - std::max<long>(1, K / 10);
  if (k_cut > 0) {
    const long j_cut = std::min(k_cut, J);
    double top = 0.0, tot = 0.0;
    for (long j = 0; j < j_cut; ++j) {
      for (long k = 0; k < K; ++k) {
        const double m = frob_sq(t.block(k, j));
        tot += m;
        if (k >= k_cut) top += m;
      }
    }
    t.aliasing_fraction = tot > 0.0 ? top / tot : 0.0;
    t.aliasing_warning = t.aliasing_fraction > 0.01;
  }
  return t;
}

TensorRep from_basis_action(const SampleOp& op,
                            std::shared_ptr<const SpectralModel> model, long K, long J) {
  if (!model) throw std::invalid_argument("from_basis_action: null model");
  if (model->data_only()) throw NoQuadrature("from_basis_action: model has no quadrature");
  if (K < 1 || K > model->J() || J < 1 || J > model->J())
    throw std::invalid_argument("from_basis_action: truncation out of range");

  const long N = static_cast<long>(model->nodes().size());
  std::vector<std::vector<std::vector<cplx>>> blocks(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) {
    const long dk = model->mults()[static_cast<std::size_t>(k)];
    blocks[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(J));
    for (long j = 0; j < J; ++j) {
      const long dj = model->mults()[static_cast<std::size_t>(j)];
      blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]
          .assign(static_cast<std::size_t>(dk * dj), cplx(0.0, 0.0));
    }
  }

  std::vector<std::pair<long, int>> columns;
  for (long j = 0; j < J; ++j) {
    for (int l = 0; l < model->mults()[static_cast<std::size_t>(j)]; ++l)
      columns.emplace_back(j, l);
  }

  std::atomic<bool> failed{false};
  parallel_for(static_cast<long>(columns.size()), [&](long lo, long hi) {
    Samples in(static_cast<std::size_t>(N));
    for (long c = lo; c < hi; ++c) {
      if (failed.load(std::memory_order_relaxed)) return;
      const auto [j, l] = columns[static_cast<std::size_t>(c)];
      const std::vector<double>& row = model->basis_row(j, l);
      for (long t = 0; t < N; ++t)
        in[static_cast<std::size_t>(t)] = row[static_cast<std::size_t>(t)];
      Samples out = op(in);
      if (static_cast<long>(out.size()) != N) {
        failed.store(true, std::memory_order_relaxed);
        return;
      }
      const CoeffArray coeffs = analyze(model, out, K);
      const long dj = model->mults()[static_cast<std::size_t>(j)];
      for (long k = 0; k < K; ++k) {
        const long dk = model->mults()[static_cast<std::size_t>(k)];
        auto& target = blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        for (long i = 0; i < dk; ++i)
          target[static_cast<std::size_t>(i * dj + l)] =
              coeffs.blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      }
    }
  });
  if (failed.load())
    throw std::invalid_argument("from_basis_action: op returned wrong sample count");

  return TensorRep::create(model, model, K, J, std::move(blocks));
}

CoeffArray apply(const TensorRep& T, const CoeffArray& u) {
  if (!u.model) throw std::invalid_argument("apply: coefficient array without model");
  const long Jp = std::min(T.J, u.J());
  require_prefix_match(*T.in_model, *u.model, Jp, "apply");

  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(T.K));
  for (long k = 0; k < T.K; ++k) {
    const long dk = T.out_model->mults()[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(dk), cplx(0.0, 0.0));
    for (long j = 0; j < Jp; ++j) {
      const auto& ub = u.blocks[static_cast<std::size_t>(j)];
      const long dj = static_cast<long>(ub.size());
      const auto& m = T.block(k, j);
      for (long i = 0; i < dk; ++i) {
        cplx acc(0.0, 0.0);
        for (long l = 0; l < dj; ++l)
          acc += m[static_cast<std::size_t>(i * dj + l)] * ub[static_cast<std::size_t>(l)];
        out[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] += acc;
      }
    }
  }
  return CoeffArray::create(T.out_model, std::move(out));
}

TensorRep adjoint_transpose(const TensorRep& T) {
  std::vector<std::vector<std::vector<cplx>>> blocks(static_cast<std::size_t>(T.J));
  for (long j = 0; j < T.J; ++j) {
    const long dj = T.in_model->mults()[static_cast<std::size_t>(j)];
    blocks[static_cast<std::size_t>(j)].resize(static_cast<std::size_t>(T.K));
    for (long k = 0; k < T.K; ++k) {
      const long dk = T.out_model->mults()[static_cast<std::size_t>(k)];
      std::vector<cplx> m(static_cast<std::size_t>(dj * dk));
      const auto& src = T.block(k, j);
      for (long i = 0; i < dk; ++i)
        for (long l = 0; l < dj; ++l)
          m[static_cast<std::size_t>(l * dk + i)] = src[static_cast<std::size_t>(i * dj + l)];
      blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = std::move(m);
    }
  }
  return TensorRep::create(T.out_model, T.in_model, T.J, T.K, std::move(blocks));
}

AdjointnessReport adjointness_residual(const TensorRep& T, const CoeffArray& u,
                                       const CoeffArray& v) {
  const TensorRep S = adjoint_transpose(T);
  const PairingReport left = pairing(apply(T, u), v);
  const PairingReport right = pairing(u, apply(S, v));

  AdjointnessReport rep;
  rep.residual = std::abs(left.value - right.value);

  const long Jp = std::min(T.J, u.J());
  const long Kp = std::min(T.K, v.J());
  double mag = 0.0, norm_u = 0.0, norm_v = 0.0, op_f = 0.0;
  std::vector<double> un(static_cast<std::size_t>(u.J()), 0.0);
  std::vector<double> vn(static_cast<std::size_t>(v.J()), 0.0);
  for (long j = 0; j < u.J(); ++j) un[static_cast<std::size_t>(j)] = l2(u.blocks[static_cast<std::size_t>(j)]);
  for (long k = 0; k < v.J(); ++k) vn[static_cast<std::size_t>(k)] = l2(v.blocks[static_cast<std::size_t>(k)]);
  for (long j = 0; j < Jp; ++j) norm_u += un[static_cast<std::size_t>(j)] * un[static_cast<std::size_t>(j)];
  for (long k = 0; k < Kp; ++k) norm_v += vn[static_cast<std::size_t>(k)] * vn[static_cast<std::size_t>(k)];
  norm_u = std::sqrt(norm_u);
  norm_v = std::sqrt(norm_v);
  for (long k = 0; k < T.K; ++k) {
    for (long j = 0; j < T.J; ++j) {
      const double f = std::sqrt(frob_sq(T.block(k, j)));
      op_f += f * f;
      if (k < Kp && j < Jp)
        mag += f * un[static_cast<std::size_t>(j)] * vn[static_cast<std::size_t>(k)];
    }
  }
  op_f = std::sqrt(op_f);
  rep.roundoff_scale = 1e-14 * std::max(1.0, mag);

  double tail_u = 0.0, tail_v = 0.0;
  for (long j = T.J; j < u.J(); ++j) tail_u += un[static_cast<std::size_t>(j)];
  for (long k = T.K; k < v.J(); ++k) tail_v += vn[static_cast<std::size_t>(k)];
  rep.truncation_estimate = op_f * (tail_u * norm_v + tail_v * norm_u + tail_u * tail_v);
  rep.truncation_dominated = rep.truncation_estimate > rep.roundoff_scale;
  return rep;
}

SequentialityReport sequentiality_probe(const TensorRep& T, const CoeffArray& u,
                                        const CoeffArray& v) {
  if (!u.model || !v.model) throw std::invalid_argument("sequentiality: missing model");
  const long Jp = std::min(T.J, u.J());
  const long Kp = std::min(T.K, v.J());
  require_prefix_match(*T.in_model, *u.model, Jp, "sequentiality");
  require_prefix_match(*T.out_model, *v.model, Kp, "sequentiality");

  SequentialityReport rep;
  std::vector<std::vector<double>> row_partials;  // [row][n]
  std::vector<double> row_weight;                 // |v_{ki}| per row
  for (long k = 0; k < Kp; ++k) {
    const long dk = T.out_model->mults()[static_cast<std::size_t>(k)];
    for (long i = 0; i < dk; ++i) {
      row_partials.emplace_back(static_cast<std::size_t>(Jp), 0.0);
      row_weight.push_back(
          std::abs(v.blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]));
    }
  }

  std::size_t row0 = 0;
  for (long k = 0; k < Kp; ++k) {
    const long dk = T.out_model->mults()[static_cast<std::size_t>(k)];
    for (long i = 0; i < dk; ++i) {
      auto& partial = row_partials[row0 + static_cast<std::size_t>(i)];
      double acc = 0.0;
      for (long j = 0; j < Jp; ++j) {
        const auto& m = T.block(k, j);
        const auto& ub = u.blocks[static_cast<std::size_t>(j)];
        const long dj = static_cast<long>(ub.size());
        for (long l = 0; l < dj; ++l)
          acc += std::abs(m[static_cast<std::size_t>(i * dj + l)]) *
                 std::abs(ub[static_cast<std::size_t>(l)]);
        partial[static_cast<std::size_t>(j)] = acc;
      }
    }
    row0 += static_cast<std::size_t>(dk);
  }

  rep.rows_checked = static_cast<long>(row_partials.size());
  double scale = 0.0;
  for (const auto& partial : row_partials)
    if (!partial.empty()) scale = std::max(scale, partial.back());
  const double floor = 1e-12 * scale;
  rep.rows_stabilized = true;
  rep.row_sums.reserve(row_partials.size());
  std::vector<double> weighted(static_cast<std::size_t>(Jp), 0.0);
  for (std::size_t r = 0; r < row_partials.size(); ++r) {
    const auto& partial = row_partials[r];
    if (!saturated(partial, floor)) rep.rows_stabilized = false;
    rep.row_sums.push_back(partial.empty() ? 0.0 : partial.back());
    for (long n = 0; n < Jp; ++n)
      weighted[static_cast<std::size_t>(n)] += row_weight[r] * partial[static_cast<std::size_t>(n)];
  }
  rep.weighted_stabilized = saturated(weighted, 0.0);
  rep.weighted_value = weighted.empty() ? 0.0 : weighted.back();
  return rep;
}

MultiplierResult multiplier_extract(const TensorRep& T, double off_diag_tol) {
  if (T.K != T.J)
    throw std::invalid_argument("multiplier_extract: square truncation required");
  require_prefix_match(*T.in_model, *T.out_model, T.K, "multiplier_extract");

  double off = 0.0, tot = 0.0;
  for (long k = 0; k < T.K; ++k) {
    for (long j = 0; j < T.J; ++j) {
      const double m = frob_sq(T.block(k, j));
      tot += m;
      if (k != j) off += m;
    }
  }

  MultiplierResult res;
  res.off_diag_ratio = tot > 0.0 ? off / tot : 0.0;
  res.accepted = res.off_diag_ratio <= off_diag_tol;
  if (res.accepted) {
    res.sigma.reserve(static_cast<std::size_t>(T.K));
    for (long l = 0; l < T.K; ++l) res.sigma.push_back(T.block(l, l));
  }
  return res;
}

SampleOp op_laplacian(std::shared_ptr<const SpectralModel> model) {
  if (!model) throw std::invalid_argument("op_laplacian: null model");
  if (model->data_only()) throw NoQuadrature("op_laplacian: model has no quadrature");
  return [model](const Samples& f) {
    CoeffArray u = analyze(model, f);
    for (long l = 0; l < u.J(); ++l) {
      const double lam = model->lambdas()[static_cast<std::size_t>(l)];
      for (cplx& c : u.blocks[static_cast<std::size_t>(l)]) c *= lam;
    }
    return synthesize(u);
  };
}

SampleOp op_derivative(std::shared_ptr<const SpectralModel> model) {
  if (!model) throw std::invalid_argument("op_derivative: null model");
  if (model->manifold() != Manifold::circle)
    throw std::invalid_argument("op_derivative: circle only");
  if (model->data_only()) throw NoQuadrature("op_derivative: model has no quadrature");
  return [model](const Samples& f) {
    CoeffArray u = analyze(model, f);
    for (long l = 1; l < u.J(); ++l) {
      auto& b = u.blocks[static_cast<std::size_t>(l)];
      const cplx c = b[0], s = b[1];
      const double freq = static_cast<double>(l);
      b[0] = freq * s;
      b[1] = -freq * c;
    }
    if (u.J() > 0) u.blocks[0][0] = 0.0;
    return synthesize(u);
  };
}

SampleOp op_multiply(std::shared_ptr<const SpectralModel> model) {
  if (!model) throw std::invalid_argument("op_multiply: null model");
  if (model->data_only()) throw NoQuadrature("op_multiply: model has no quadrature");
  std::vector<double> g(model->nodes().size());
  for (std::size_t t = 0; t < g.size(); ++t) {
    const Point& p = model->nodes()[t];
    switch (model->manifold()) {
      case Manifold::circle:
      case Manifold::torus2:
        g[t] = std::cos(p.x[0]);
        break;
      case Manifold::sphere2:
        g[t] = p.x[2];
        break;
    }
  }
  return [g = std::move(g)](const Samples& f) {
    if (f.size() != g.size())
      throw std::invalid_argument("op_multiply: sample count mismatch");
    Samples out(f.size());
    for (std::size_t t = 0; t < f.size(); ++t) out[t] = f[t] * g[t];
    return out;
  };
}

}  // namespace komatsu
