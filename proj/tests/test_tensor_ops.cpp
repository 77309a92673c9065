#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "komatsu/builtins.hpp"
#include "komatsu/coeff_space.hpp"
#include "komatsu/spectral_model.hpp"
#include "komatsu/tensor_ops.hpp"

using namespace komatsu;

namespace {

CoeffArray random_coeffs(std::shared_ptr<const SpectralModel> model, long J,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<cplx>> blocks(static_cast<std::size_t>(J));
  for (long l = 0; l < J; ++l) {
    blocks[static_cast<std::size_t>(l)].resize(
        static_cast<std::size_t>(model->mults()[static_cast<std::size_t>(l)]));
    for (auto& z : blocks[static_cast<std::size_t>(l)]) z = cplx(gauss(rng), gauss(rng));
  }
  return CoeffArray::create(std::move(model), std::move(blocks));
}

TensorRep random_tensor(std::shared_ptr<const SpectralModel> model, long K, long J,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<std::vector<cplx>>> blocks(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) {
    blocks[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(J));
    for (long j = 0; j < J; ++j) {
      const long n = model->mults()[static_cast<std::size_t>(k)] *
                     model->mults()[static_cast<std::size_t>(j)];
      auto& b = blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      b.resize(static_cast<std::size_t>(n));
      for (auto& z : b) z = cplx(gauss(rng), gauss(rng));
    }
  }
  return TensorRep::create(model, model, K, J, std::move(blocks));
}

double block_frob(const std::vector<cplx>& m) {
  double s = 0.0;
  for (const cplx& z : m) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("tensor creation validates structure") {
  auto model = build_model(Manifold::circle, 4, kNoQuadrature);
  CHECK_THROWS_AS(TensorRep::create(nullptr, model, 1, 1, {{{cplx(1.0)}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TensorRep::create(model, model, 0, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(TensorRep::create(model, model, 5, 4, {}), std::invalid_argument);
  // Outer dimension must equal K.
  CHECK_THROWS_AS(TensorRep::create(model, model, 2, 1, {{{cplx(1.0)}}}),
                  std::invalid_argument);
  // Block (1,0) must be 2x1 on the circle.
  CHECK_THROWS_AS(
      TensorRep::create(model, model, 2, 1, {{{cplx(1.0)}}, {{cplx(1.0)}}}),
      std::invalid_argument);
  auto sphere = build_model(Manifold::sphere2, 4, kNoQuadrature);
  CHECK_THROWS_AS(TensorRep::create(model, sphere, 2, 2, {}), std::invalid_argument);

  const auto t = TensorRep::create(
      model, model, 2, 2,
      {{{cplx(2.0)}, {cplx(0.0), cplx(1.0)}},
       {{cplx(3.0), cplx(0.0)}, {cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0)}}});
  CHECK(t.K == 2);
  CHECK(t.entry(1, 1, 0, 1) == cplx(1.0));
}

TEST_CASE("apply contracts blocks against coefficients") {
  auto model = build_model(Manifold::circle, 2, kNoQuadrature);
  const auto t = TensorRep::create(
      model, model, 2, 2,
      {{{cplx(2.0)}, {cplx(0.0), cplx(1.0)}},
       {{cplx(3.0), cplx(0.0)}, {cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0)}}});
  const auto u = CoeffArray::create(model, {{1.0}, {4.0, cplx(0.0, 5.0)}});
  const auto out = apply(t, u);
  REQUIRE(out.J() == 2);
  CHECK(std::abs(out.blocks[0][0] - cplx(2.0, 5.0)) < 1e-14);
  CHECK(std::abs(out.blocks[1][0] - cplx(3.0, 5.0)) < 1e-14);
  CHECK(std::abs(out.blocks[1][1] - cplx(4.0)) < 1e-14);

  // Shorter inputs use only the blocks they carry.
  const auto u0 = CoeffArray::create(model, {{1.0}});
  const auto out0 = apply(t, u0);
  CHECK(std::abs(out0.blocks[0][0] - cplx(2.0)) < 1e-14);
  CHECK(std::abs(out0.blocks[1][0] - cplx(3.0)) < 1e-14);

  auto sphere = build_model(Manifold::sphere2, 2, kNoQuadrature);
  const auto s = random_coeffs(sphere, 2, 1);
  CHECK_THROWS_AS(apply(t, s), std::invalid_argument);
}

TEST_CASE("apply is linear in the coefficients") {
  auto model = build_model(Manifold::circle, 8, kNoQuadrature);
  const auto t = random_tensor(model, 8, 8, 42);
  const auto u = random_coeffs(model, 8, 1);
  const auto v = random_coeffs(model, 8, 2);
  CoeffArray lin = u;
  for (long l = 0; l < 8; ++l)
    for (std::size_t i = 0; i < lin.blocks[static_cast<std::size_t>(l)].size(); ++i)
      lin.blocks[static_cast<std::size_t>(l)][i] =
          cplx(2.0, -1.0) * u.blocks[static_cast<std::size_t>(l)][i] +
          cplx(0.0, 3.0) * v.blocks[static_cast<std::size_t>(l)][i];
  const auto a = apply(t, lin);
  const auto b1 = apply(t, u), b2 = apply(t, v);
  for (long k = 0; k < 8; ++k)
    for (std::size_t i = 0; i < a.blocks[static_cast<std::size_t>(k)].size(); ++i) {
      const cplx want = cplx(2.0, -1.0) * b1.blocks[static_cast<std::size_t>(k)][i] +
                        cplx(0.0, 3.0) * b2.blocks[static_cast<std::size_t>(k)][i];
      CHECK(std::abs(a.blocks[static_cast<std::size_t>(k)][i] - want) < 1e-12);
    }
}

TEST_CASE("transpose adjoint is an exact involution") {
  auto model = build_model(Manifold::circle, 8, kNoQuadrature);
  const auto t = random_tensor(model, 6, 8, 7);
  const auto s = adjoint_transpose(t);
  CHECK(s.K == 8);
  CHECK(s.J == 6);
  CHECK(s.entry(3, 2, 1, 0) == t.entry(2, 3, 0, 1));
  const auto tt = adjoint_transpose(s);
  for (long k = 0; k < t.K; ++k)
    for (long j = 0; j < t.J; ++j)
      CHECK(t.block(k, j) == tt.block(k, j));
}

TEST_CASE("adjointness identity holds at matched truncation") {
  auto model = build_model(Manifold::circle, 8, kNoQuadrature);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = random_tensor(model, 8, 8, 1000 + seed);
    const auto u = random_coeffs(model, 8, 2000 + seed);
    const auto v = random_coeffs(model, 8, 3000 + seed);
    const auto rep = adjointness_residual(t, u, v);
    CHECK(rep.residual < 1e-12);
    CHECK(rep.truncation_estimate == 0.0);
    CHECK_FALSE(rep.truncation_dominated);
  }
}

TEST_CASE("operand energy beyond the truncation is flagged") {
  auto model = build_model(Manifold::circle, 16, kNoQuadrature);
  const auto t = random_tensor(model, 8, 8, 5);
  const auto u = random_coeffs(model, 16, 6);
  const auto v = random_coeffs(model, 16, 7);
  const auto rep = adjointness_residual(t, u, v);
  CHECK(rep.residual < 1e-12);  // the finite identity itself still holds
  CHECK(rep.truncation_estimate > 0.0);
  CHECK(rep.truncation_dominated);
}

TEST_CASE("laplacian tensor is diagonal with eigenvalue blocks") {
  auto model = build_model(Manifold::circle, 6);
  const auto t = from_basis_action(op_laplacian(model), model, 6, 6);
  CHECK_FALSE(t.aliasing_warning);
  for (long k = 0; k < 6; ++k) {
    for (long j = 0; j < 6; ++j) {
      const auto& b = t.block(k, j);
      if (k != j) {
        CHECK(block_frob(b) < 1e-12);
        continue;
      }
      const double lam = model->lambdas()[static_cast<std::size_t>(k)];
      const long d = model->mults()[static_cast<std::size_t>(k)];
      for (long i = 0; i < d; ++i)
        for (long l = 0; l < d; ++l) {
          const cplx want = i == l ? cplx(lam) : cplx(0.0);
          CHECK(std::abs(b[static_cast<std::size_t>(i * d + l)] - want) < 1e-11);
        }
    }
  }
  const auto mult = multiplier_extract(t);
  CHECK(mult.accepted);
  REQUIRE(mult.sigma.size() == 6);
  CHECK(std::abs(mult.sigma[4][0] - cplx(16.0)) < 1e-11);
}

TEST_CASE("derivative tensor rotates each frequency pair") {
  auto model = build_model(Manifold::circle, 6);
  const auto t = from_basis_action(op_derivative(model), model, 6, 6);
  CHECK_FALSE(t.aliasing_warning);
  for (long k = 0; k < 6; ++k)
    for (long j = 0; j < 6; ++j)
      if (k != j) CHECK(block_frob(t.block(k, j)) < 1e-12);
  CHECK(block_frob(t.block(0, 0)) < 1e-12);
  for (long l = 1; l < 6; ++l) {
    const auto& b = t.block(l, l);
    const double f = static_cast<double>(l);
    // Columns are images of (cos, sin): cos' = -f sin, sin' = f cos.
    CHECK(std::abs(b[0] - cplx(0.0)) < 1e-12);
    CHECK(std::abs(b[1] - cplx(f)) < 1e-12);
    CHECK(std::abs(b[2] - cplx(-f)) < 1e-12);
    CHECK(std::abs(b[3] - cplx(0.0)) < 1e-12);
  }
  const auto mult = multiplier_extract(t);
  CHECK(mult.accepted);
  CHECK(std::abs(mult.sigma[1][1] - cplx(1.0)) < 1e-12);
  CHECK(std::abs(mult.sigma[1][2] - cplx(-1.0)) < 1e-12);

  // Applying twice negates the laplacian action.
  const auto u = random_coeffs(model, 6, 9);
  const auto ddu = apply(t, apply(t, u));
  for (long l = 0; l < 6; ++l) {
    const double lam = model->lambdas()[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < ddu.blocks[static_cast<std::size_t>(l)].size(); ++i)
      CHECK(std::abs(ddu.blocks[static_cast<std::size_t>(l)][i] +
                     lam * u.blocks[static_cast<std::size_t>(l)][i]) < 1e-10);
  }
}

TEST_CASE("derivative agrees with the sampled operator") {
  auto model = build_model(Manifold::circle, 8);
  const auto op = op_derivative(model);
  Samples f(static_cast<std::size_t>(model->quadrature_size()));
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double th = model->nodes()[n].x[0];
    f[n] = std::sin(3.0 * th) + 0.2 * std::cos(5.0 * th);
  }
  const auto t = from_basis_action(op, model, 8, 8);
  const auto direct = analyze(model, op(f), 8);
  const auto via = apply(t, analyze(model, f, 8));
  for (long l = 0; l < 8; ++l)
    for (std::size_t i = 0; i < direct.blocks[static_cast<std::size_t>(l)].size(); ++i)
      CHECK(std::abs(direct.blocks[static_cast<std::size_t>(l)][i] -
                     via.blocks[static_cast<std::size_t>(l)][i]) < 1e-8);
}

TEST_CASE("multiplication by cos is banded and rejected as a multiplier") {
  auto model = build_model(Manifold::circle, 10);
  const auto t = from_basis_action(op_multiply(model), model, 8, 8);
  CHECK(t.aliasing_warning);  // the band crosses the truncation edge
  for (long k = 0; k < 8; ++k)
    for (long j = 0; j < 8; ++j) {
      const double gap = std::abs(std::sqrt(model->lambdas()[static_cast<std::size_t>(k)]) -
                                  std::sqrt(model->lambdas()[static_cast<std::size_t>(j)]));
      if (gap != 1.0) CHECK(block_frob(t.block(k, j)) < 1e-13);
    }
  // Interior coupling weight is exactly one half.
  CHECK(std::abs(t.entry(3, 2, 0, 0) - cplx(0.5)) < 1e-13);
  CHECK(std::abs(t.entry(3, 2, 1, 1) - cplx(0.5)) < 1e-13);
  CHECK(std::abs(t.entry(2, 3, 0, 0) - cplx(0.5)) < 1e-13);
  CHECK(std::abs(t.entry(3, 2, 0, 1)) < 1e-13);
  // Constant-to-fundamental coupling carries the normalization mismatch.
  CHECK(std::abs(t.entry(1, 0, 0, 0) - cplx(1.0 / std::sqrt(2.0))) < 1e-13);
  CHECK(std::abs(t.entry(0, 1, 0, 0) - cplx(1.0 / std::sqrt(2.0))) < 1e-13);

  const auto mult = multiplier_extract(t);
  CHECK_FALSE(mult.accepted);
  CHECK(mult.off_diag_ratio > 0.9);
  CHECK(mult.sigma.empty());

  // Real multiplier, real basis: blocks transpose across the diagonal.
  for (long k = 0; k < 8; ++k)
    for (long j = 0; j < 8; ++j) {
      const auto& a = t.block(k, j);
      const auto& b = t.block(j, k);
      const long dk = model->mults()[static_cast<std::size_t>(k)];
      const long dj = model->mults()[static_cast<std::size_t>(j)];
      for (long i = 0; i < dk; ++i)
        for (long l = 0; l < dj; ++l)
          CHECK(std::abs(a[static_cast<std::size_t>(i * dj + l)] -
                         b[static_cast<std::size_t>(l * dk + i)]) < 1e-10);
    }
}

TEST_CASE("zonal multiplication on the sphere couples adjacent degrees") {
  auto model = build_model(Manifold::sphere2, 8);
  const auto t = from_basis_action(op_multiply(model), model, 6, 6);
  for (long k = 0; k < 6; ++k)
    for (long j = 0; j < 6; ++j)
      if (std::abs(k - j) != 1) CHECK(block_frob(t.block(k, j)) < 1e-12);
  // z * Y_0 = Y_1^0 / sqrt(3).
  CHECK(std::abs(t.entry(1, 0, 0, 0) - cplx(1.0 / std::sqrt(3.0))) < 1e-12);
  for (long k = 0; k < 6; ++k)
    for (long j = 0; j < 6; ++j) {
      const auto& a = t.block(k, j);
      const auto& b = t.block(j, k);
      const long dk = model->mults()[static_cast<std::size_t>(k)];
      const long dj = model->mults()[static_cast<std::size_t>(j)];
      for (long i = 0; i < dk; ++i)
        for (long l = 0; l < dj; ++l)
          CHECK(std::abs(a[static_cast<std::size_t>(i * dj + l)] -
                         b[static_cast<std::size_t>(l * dk + i)]) < 1e-10);
    }
}

TEST_CASE("laplacian tensor on the torus stays diagonal") {
  auto model = build_model(Manifold::torus2, 6);
  const auto t = from_basis_action(op_laplacian(model), model, 6, 6);
  CHECK_FALSE(t.aliasing_warning);
  const auto mult = multiplier_extract(t);
  CHECK(mult.accepted);
  for (long l = 0; l < 6; ++l) {
    const double lam = model->lambdas()[static_cast<std::size_t>(l)];
    const long d = model->mults()[static_cast<std::size_t>(l)];
    for (long i = 0; i < d; ++i)
      CHECK(std::abs(mult.sigma[static_cast<std::size_t>(l)]
                               [static_cast<std::size_t>(i * d + i)] -
                     cplx(lam)) < 1e-10);
  }
}

TEST_CASE("prescribed block-diagonal multipliers round-trip exactly") {
  auto model = build_model(Manifold::circle, 5, kNoQuadrature);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<std::vector<cplx>>> blocks(5);
  std::vector<std::vector<cplx>> sigma;
  for (long k = 0; k < 5; ++k) {
    blocks[static_cast<std::size_t>(k)].resize(5);
    for (long j = 0; j < 5; ++j) {
      const long n = model->mults()[static_cast<std::size_t>(k)] *
                     model->mults()[static_cast<std::size_t>(j)];
      blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]
          .assign(static_cast<std::size_t>(n), cplx(0.0));
    }
    auto& diag = blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
    for (auto& z : diag) z = cplx(gauss(rng), gauss(rng));
    sigma.push_back(diag);
  }
  const auto t = TensorRep::create(model, model, 5, 5, std::move(blocks));
  const auto mult = multiplier_extract(t);
  CHECK(mult.accepted);
  CHECK(mult.off_diag_ratio == 0.0);
  REQUIRE(mult.sigma.size() == 5);
  for (long k = 0; k < 5; ++k)
    CHECK(mult.sigma[static_cast<std::size_t>(k)] == sigma[static_cast<std::size_t>(k)]);

  const auto rect = random_tensor(build_model(Manifold::circle, 8, kNoQuadrature), 6, 8, 3);
  CHECK_THROWS_AS(multiplier_extract(rect), std::invalid_argument);
}

TEST_CASE("row sums of a banded tensor stabilize under strong decay") {
  auto model = build_model(Manifold::circle, 34);
  const auto t = from_basis_action(op_multiply(model), model, 8, 32);
  const auto u = builtin_coeffs("poisson", {{"a", 0.5}}, model, 32);
  const auto v = builtin_coeffs("poisson", {{"a", 0.3}}, model, 8);
  const auto rep = sequentiality_probe(t, u, v);
  CHECK(rep.rows_checked == 15);
  CHECK(rep.rows_stabilized);
  CHECK(rep.weighted_stabilized);
  CHECK(rep.weighted_value > 0.0);
  REQUIRE(rep.row_sums.size() == 15);
  for (double s : rep.row_sums) CHECK(s >= 0.0);
}

TEST_CASE("dense tensor with flat coefficients never stabilizes") {
  auto model = build_model(Manifold::circle, 40, kNoQuadrature);
  std::vector<std::vector<std::vector<cplx>>> blocks(40);
  for (long k = 0; k < 40; ++k) {
    blocks[static_cast<std::size_t>(k)].resize(40);
    for (long j = 0; j < 40; ++j)
      blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)].assign(
          static_cast<std::size_t>(model->mults()[static_cast<std::size_t>(k)] *
                                   model->mults()[static_cast<std::size_t>(j)]),
          cplx(1.0));
  }
  const auto t = TensorRep::create(model, model, 40, 40, std::move(blocks));
  std::vector<std::vector<cplx>> ones;
  for (long l = 0; l < 40; ++l)
    ones.emplace_back(static_cast<std::size_t>(model->mults()[static_cast<std::size_t>(l)]),
                      cplx(1.0));
  const auto u = CoeffArray::create(model, std::move(ones));
  const auto rep = sequentiality_probe(t, u, u);
  CHECK_FALSE(rep.rows_stabilized);
  CHECK_FALSE(rep.weighted_stabilized);

  std::vector<std::vector<cplx>> zs;
  for (long l = 0; l < 40; ++l)
    zs.emplace_back(static_cast<std::size_t>(model->mults()[static_cast<std::size_t>(l)]),
                    cplx(0.0));
  const auto zero = CoeffArray::create(model, std::move(zs));
  const auto repz = sequentiality_probe(t, u, zero);
  CHECK(repz.weighted_value == 0.0);
  CHECK(repz.weighted_stabilized);
}

TEST_CASE("construction rejects misuse") {
  auto data = build_model(Manifold::circle, 6, kNoQuadrature);
  CHECK_THROWS_AS(from_basis_action(op_multiply(data), data, 4, 4), NoQuadrature);
  auto model = build_model(Manifold::circle, 6);
  CHECK_THROWS_AS(from_basis_action(op_laplacian(model), model, 7, 6),
                  std::invalid_argument);
  CHECK_THROWS_AS(from_basis_action(op_laplacian(model), model, 6, 0),
                  std::invalid_argument);
  auto sphere = build_model(Manifold::sphere2, 4);
  CHECK_THROWS_AS(op_derivative(sphere), std::invalid_argument);
  // Ops that change the sample count are rejected.
  const SampleOp bad = [](const Samples& f) { return Samples(f.size() + 1); };
  CHECK_THROWS_AS(from_basis_action(bad, model, 4, 4), std::invalid_argument);
}
