#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "komatsu/spectral_model.hpp"

using namespace komatsu;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("circle spectrum") {
  const auto m = build_model(Manifold::circle, 4, 64);
  CHECK(m->lambdas() == std::vector<double>{0, 1, 4, 9});
  CHECK(m->mults() == std::vector<int>{1, 2, 2, 2});
  CHECK(m->dim() == 1);
  CHECK(m->total_dim() == 7);
  CHECK(m->quadrature_size() == 64);
  CHECK(m->nodes().size() == 64);
}

TEST_CASE("sphere spectrum") {
  const auto m = build_model(Manifold::sphere2, 3, 48);
  CHECK(m->lambdas() == std::vector<double>{0, 2, 6});
  CHECK(m->mults() == std::vector<int>{1, 3, 5});
  CHECK(m->nodes().size() == 48 * 96);
}

TEST_CASE("torus spectrum and lattice counts") {
  const auto m = build_model(Manifold::torus2, 4, 64);
  CHECK(m->lambdas() == std::vector<double>{0, 1, 2, 4});
  CHECK(m->mults() == std::vector<int>{1, 4, 4, 4});

  // Independent brute-force count over the enclosing square.
  const auto big = build_model(Manifold::torus2, 50, kNoQuadrature);
  const long R = static_cast<long>(std::sqrt(big->lambdas().back())) + 1;
  std::map<long, int> counts;
  for (long a = -R; a <= R; ++a)
    for (long b = -R; b <= R; ++b) counts[a * a + b * b]++;
  for (long l = 0; l < big->J(); ++l) {
    const long v = static_cast<long>(big->lambdas()[static_cast<std::size_t>(l)]);
    CHECK(big->mults()[static_cast<std::size_t>(l)] == counts.at(v));
  }
  // Representatives cover each +/- pair exactly once, in lexicographic order.
  const auto& reps = big->lattice_reps(3);  // lambda = 4: (0,2),(2,0)
  REQUIRE(reps.size() == 2);
  CHECK(reps[0] == std::pair<int, int>{0, 2});
  CHECK(reps[1] == std::pair<int, int>{2, 0});
}

TEST_CASE("underresolved quadrature is rejected") {
  CHECK_THROWS_AS(build_model(Manifold::circle, 4, 5), QuadratureUnderresolved);
  CHECK_NOTHROW(build_model(Manifold::circle, 4, 7));
  CHECK_THROWS_AS(build_model(Manifold::sphere2, 3, 2), QuadratureUnderresolved);
  CHECK_THROWS_AS(build_model(Manifold::torus2, 4, 3), QuadratureUnderresolved);
  CHECK_THROWS_AS(build_model(Manifold::circle, 0, 0), std::invalid_argument);
}

TEST_CASE("basis point evaluations") {
  const auto c = build_model(Manifold::circle, 4, 0);
  Point x;
  CHECK(c->eval_basis(0, 1, x) == doctest::Approx(1.0 / std::sqrt(2.0 * kPi)));
  CHECK(c->eval_basis(2, 1, x) == doctest::Approx(1.0 / std::sqrt(kPi)));
  x.x[0] = 0.3;
  CHECK(c->eval_basis(2, 1, x) == doctest::Approx(std::cos(0.6) / std::sqrt(kPi)));
  CHECK(c->eval_basis(2, 2, x) == doctest::Approx(std::sin(0.6) / std::sqrt(kPi)));
  CHECK_THROWS_AS(c->eval_basis(4, 1, x), std::out_of_range);
  CHECK_THROWS_AS(c->eval_basis(1, 3, x), std::out_of_range);

  const auto s = build_model(Manifold::sphere2, 3, 0);
  Point north;
  north.x = {0.0, 0.0, 1.0};
  CHECK(s->eval_basis(1, 1, north) == doctest::Approx(std::sqrt(3.0 / (4.0 * kPi))));
  CHECK(s->eval_basis(0, 1, north) == doctest::Approx(std::sqrt(1.0 / (4.0 * kPi))));
}

TEST_CASE("basis labels") {
  const auto c = build_model(Manifold::circle, 3, 0);
  CHECK(c->basis_label(0, 1) == "const");
  CHECK(c->basis_label(2, 1) == "cos:2");
  CHECK(c->basis_label(2, 2) == "sin:2");
  const auto t = build_model(Manifold::torus2, 2, 0);
  CHECK(t->basis_label(1, 1) == "cos:(0,1)");
  CHECK(t->basis_label(1, 2) == "sin:(0,1)");
  CHECK(t->basis_label(1, 3) == "cos:(1,0)");
  const auto s = build_model(Manifold::sphere2, 2, 0);
  CHECK(s->basis_label(1, 1) == "Y:1:0");
  CHECK(s->basis_label(1, 2) == "Y:1:1:cos");
  CHECK(s->basis_label(1, 3) == "Y:1:1:sin");
}

TEST_CASE("quadrature integrates retained products") {
  CHECK(gram_residual(*build_model(Manifold::circle, 16, 0)) < 1e-12);
  CHECK(gram_residual(*build_model(Manifold::torus2, 12, 0)) < 1e-12);
  CHECK(gram_residual(*build_model(Manifold::sphere2, 10, 0)) < 1e-11);
}

TEST_CASE("inner products on the circle") {
  const auto m = build_model(Manifold::circle, 4, 0);
  const auto cosx = sample_function(*m, [](const Point& p) { return cplx(std::cos(p.x[0])); });
  CHECK(inner_product(*m, cosx, cosx).real() == doctest::Approx(kPi).epsilon(1e-12));
  const auto e11 = sample_function(*m, [m](const Point& p) { return cplx(m->eval_basis(1, 1, p)); });
  const auto e21 = sample_function(*m, [m](const Point& p) { return cplx(m->eval_basis(2, 1, p)); });
  CHECK(std::abs(inner_product(*m, e11, e11) - cplx(1.0)) < 1e-12);
  CHECK(std::abs(inner_product(*m, e11, e21)) < 1e-12);
  Samples bad(3, 0.0);
  CHECK_THROWS_AS(inner_product(*m, bad, bad), std::invalid_argument);
}

TEST_CASE("data-only models skip quadrature") {
  const auto m = build_model(Manifold::sphere2, 2000, kNoQuadrature);
  CHECK(m->data_only());
  CHECK(m->J() == 2000);
  CHECK_THROWS_AS(m->nodes(), NoQuadrature);
  CHECK_THROWS_AS(m->basis_row(0, 0), NoQuadrature);
  Point north;
  north.x = {0.0, 0.0, 1.0};
  CHECK(m->eval_basis(1, 1, north) == doctest::Approx(std::sqrt(3.0 / (4.0 * kPi))));
}

TEST_CASE("multiplicity growth against eigenvalue power") {
  const auto c = build_model(Manifold::circle, 100, kNoQuadrature);
  auto rep = weyl_multiplicity_check(*c);
  CHECK(rep.sup == doctest::Approx(std::sqrt(2.0)));
  CHECK(rep.argmax == 1);
  CHECK(rep.stable);

  const auto s = build_model(Manifold::sphere2, 200, kNoQuadrature);
  rep = weyl_multiplicity_check(*s);
  CHECK(rep.sup == doctest::Approx(1.0));
  CHECK(rep.stable);

  const auto t200 = build_model(Manifold::torus2, 200, kNoQuadrature);
  rep = weyl_multiplicity_check(*t200);
  CHECK(rep.stable);
  const double sup200 = rep.sup;
  CHECK(sup200 == doctest::Approx(2.0));
  // Sup does not move once attained.
  for (long J : {50L, 100L}) {
    const auto t = build_model(Manifold::torus2, J, kNoQuadrature);
    CHECK(weyl_multiplicity_check(*t).sup == doctest::Approx(sup200));
  }
}

TEST_CASE("multiplicity series convergence detection") {
  const auto s = build_model(Manifold::sphere2, 2000, kNoQuadrature);
  auto rep = summability_probe(*s, 1.2, 2000);
  CHECK(rep.sum == doctest::Approx(5.211976).epsilon(1e-5));
  CHECK_FALSE(rep.diverging);
  CHECK(rep.decay_slope == doctest::Approx(-1.4).epsilon(0.02));

  rep = summability_probe(*s, 1.0, 2000);
  CHECK(rep.sum == doctest::Approx(15.631658).epsilon(1e-5));
  CHECK(rep.diverging);

  const auto c = build_model(Manifold::circle, 100000, kNoQuadrature);
  rep = summability_probe(*c, 0.6, 100000);
  CHECK(rep.sum == doctest::Approx(10.327990).epsilon(1e-5));
  CHECK_FALSE(rep.diverging);
  rep = summability_probe(*c, 0.5, 100000);
  CHECK(rep.sum == doctest::Approx(24.415807).epsilon(1e-5));
  CHECK(rep.diverging);
}

TEST_CASE("basis sup norms against the eigenvalue power") {
  const auto c = build_model(Manifold::circle, 32, 0);
  auto rep = supnorm_ratio_check(*c);
  CHECK(rep.sup == doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-12));

  const auto s40 = build_model(Manifold::sphere2, 40, 0);
  const auto s60 = build_model(Manifold::sphere2, 60, 0);
  const double r40 = supnorm_ratio_check(*s40).sup;
  const double r60 = supnorm_ratio_check(*s60).sup;
  CHECK(r60 < 0.5);
  CHECK(std::abs(r60 - r40) < 0.02);
}

TEST_CASE("manifold names round-trip") {
  for (Manifold m : {Manifold::circle, Manifold::torus2, Manifold::sphere2})
    CHECK(manifold_from_name(manifold_name(m)) == m);
  CHECK_THROWS_AS(manifold_from_name("klein"), std::invalid_argument);
}
