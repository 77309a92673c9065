#include "komatsu/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "komatsu/parallel.hpp"

namespace komatsu {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      // p0 = P_n(z), p1 = P_{n-1}(z)
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[n - 1 - i] = z;
    x[i] = -z;
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

// Fully normalized associated Legendre values: Q_j^m with
// integral of (Q_j^m)^2 over z in [-1,1] equal to 1/(2 pi), so that
// Q_j^0 and sqrt(2) Q_j^m {cos,sin}(m phi) are orthonormal on the sphere.
// No Condon-Shortley phase. Flat index j(j+1)/2 + m for 0 <= m <= j.
std::size_t leg_idx(int j, int m) {
  return static_cast<std::size_t>(j) * (j + 1) / 2 + static_cast<std::size_t>(m);
}

std::vector<double> legendre_table(int j_max, double z) {
  std::vector<double> t(leg_idx(j_max, j_max) + 1);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  t[leg_idx(0, 0)] = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 1; m <= j_max; ++m)
    t[leg_idx(m, m)] =
        t[leg_idx(m - 1, m - 1)] * std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
  for (int m = 0; m < j_max; ++m) {
    t[leg_idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * z * t[leg_idx(m, m)];
    for (int j = m + 2; j <= j_max; ++j) {
      const double a =
          std::sqrt((4.0 * j * j - 1.0) / (static_cast<double>(j) * j - m * m));
      const double b = std::sqrt(((2.0 * j + 1.0) * ((j - 1.0) * (j - 1.0) - m * m)) /
                                 ((2.0 * j - 3.0) * (static_cast<double>(j) * j - m * m)));
      t[leg_idx(j, m)] = a * z * t[leg_idx(j - 1, m)] - b * t[leg_idx(j - 2, m)];
    }
  }
  return t;
}

double legendre_single(int j, int m, double z) {
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int q = 1; q <= m; ++q) pmm *= std::sqrt((2.0 * q + 1.0) / (2.0 * q)) * s;
  if (j == m) return pmm;
  double prev = pmm;
  double cur = std::sqrt(2.0 * m + 3.0) * z * pmm;
  for (int jj = m + 2; jj <= j; ++jj) {
    const double a =
        std::sqrt((4.0 * jj * jj - 1.0) / (static_cast<double>(jj) * jj - m * m));
    const double b = std::sqrt(((2.0 * jj + 1.0) * ((jj - 1.0) * (jj - 1.0) - m * m)) /
                               ((2.0 * jj - 3.0) * (static_cast<double>(jj) * jj - m * m)));
    const double next = a * z * cur - b * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

std::string manifold_name(Manifold m) {
  switch (m) {
    case Manifold::circle: return "circle";
    case Manifold::torus2: return "torus2";
    case Manifold::sphere2: return "sphere2";
  }
  return "?";
}

Manifold manifold_from_name(const std::string& name) {
  if (name == "circle") return Manifold::circle;
  if (name == "torus2") return Manifold::torus2;
  if (name == "sphere2") return Manifold::sphere2;
  throw std::invalid_argument("unknown manifold: " + name);
}

const std::vector<Point>& SpectralModel::nodes() const {
  if (data_only()) throw NoQuadrature("model was built without quadrature");
  return nodes_;
}

const std::vector<double>& SpectralModel::weights() const {
  if (data_only()) throw NoQuadrature("model was built without quadrature");
  return weights_;
}

const std::vector<std::pair<int, int>>& SpectralModel::lattice_reps(long l) const {
  if (manifold_ != Manifold::torus2)
    throw std::logic_error("lattice_reps: torus2 only");
  return reps_[static_cast<std::size_t>(l)];
}

std::shared_ptr<const SpectralModel> SpectralModel::build(Manifold m, long J,
                                                          long quadrature_size) {
  if (J < 1) throw std::invalid_argument("build_model: J must be >= 1");
  auto model = std::shared_ptr<SpectralModel>(new SpectralModel());
  model->manifold_ = m;
  model->J_ = J;

  long m_max = 0;  // torus2 component bound for quadrature sizing
  switch (m) {
    case Manifold::circle: {
      model->n_ = 1;
      for (long j = 0; j < J; ++j) {
        model->lambdas_.push_back(static_cast<double>(j) * j);
        model->mults_.push_back(j == 0 ? 1 : 2);
      }
      break;
    }
    case Manifold::torus2: {
      model->n_ = 2;
      long R2 = 4 * J + 16;
      for (;;) {
        std::map<long, std::vector<std::pair<int, int>>> by_value;
        const long R = static_cast<long>(std::sqrt(static_cast<double>(R2))) + 1;
        for (long a = -R; a <= R; ++a)
          for (long b = -R; b <= R; ++b) {
            const long v = a * a + b * b;
            if (v > R2) continue;
            if (a > 0 || (a == 0 && b >= 0))  // one representative per +/- pair
              by_value[v].push_back({static_cast<int>(a), static_cast<int>(b)});
          }
        if (static_cast<long>(by_value.size()) < J) {
          R2 *= 2;
          continue;
        }
        long taken = 0;
        for (auto& [v, reps] : by_value) {
          if (taken == J) break;
          std::sort(reps.begin(), reps.end());
          model->lambdas_.push_back(static_cast<double>(v));
          model->mults_.push_back(v == 0 ? 1 : static_cast<int>(2 * reps.size()));
          model->reps_.push_back(reps);
          for (const auto& [m1, m2] : reps)
            m_max = std::max({m_max, static_cast<long>(std::abs(m1)),
                              static_cast<long>(std::abs(m2))});
          ++taken;
        }
        break;
      }
      break;
    }
    case Manifold::sphere2: {
      model->n_ = 2;
      for (long j = 0; j < J; ++j) {
        model->lambdas_.push_back(static_cast<double>(j) * (j + 1));
        model->mults_.push_back(static_cast<int>(2 * j + 1));
      }
      break;
    }
  }

  model->offsets_.assign(1, 0);
  for (int d : model->mults_) model->offsets_.push_back(model->offsets_.back() + d);

  if (quadrature_size == kNoQuadrature) {
    model->quad_size_ = 0;
    return model;
  }

  switch (m) {
    case Manifold::circle: {
      const long n_min = 2 * (J - 1) + 1;
      long N = quadrature_size == 0 ? 2 * J : quadrature_size;
      if (N < n_min)
        throw QuadratureUnderresolved("circle quadrature needs at least " +
                                      std::to_string(n_min) + " nodes, got " +
                                      std::to_string(N));
      model->quad_size_ = N;
      for (long i = 0; i < N; ++i) {
        Point p;
        p.x[0] = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(N);
        model->nodes_.push_back(p);
        model->weights_.push_back(2.0 * kPi / static_cast<double>(N));
      }
      break;
    }
    case Manifold::torus2: {
      const long n_min = 2 * m_max + 1;
      long N = quadrature_size == 0 ? 2 * m_max + 2 : quadrature_size;
      if (N < n_min)
        throw QuadratureUnderresolved("torus2 quadrature needs at least " +
                                      std::to_string(n_min) + " nodes per dimension, got " +
                                      std::to_string(N));
      model->quad_size_ = N;
      const double w = (2.0 * kPi / N) * (2.0 * kPi / N);
      for (long a = 0; a < N; ++a)
        for (long b = 0; b < N; ++b) {
          Point p;
          p.x[0] = 2.0 * kPi * static_cast<double>(a) / static_cast<double>(N);
          p.x[1] = 2.0 * kPi * static_cast<double>(b) / static_cast<double>(N);
          model->nodes_.push_back(p);
          model->weights_.push_back(w);
        }
      break;
    }
    case Manifold::sphere2: {
      long G = quadrature_size == 0 ? J : quadrature_size;
      if (G < J)
        throw QuadratureUnderresolved("sphere2 quadrature needs at least " +
                                      std::to_string(J) + " Gauss nodes, got " +
                                      std::to_string(G));
      model->quad_size_ = G;
      std::vector<double> z, wz;
      gauss_legendre(static_cast<int>(G), z, wz);
      const long P = 2 * G;
      for (long g = 0; g < G; ++g) {
        const double s = std::sqrt(std::max(0.0, 1.0 - z[g] * z[g]));
        for (long p = 0; p < P; ++p) {
          const double phi = 2.0 * kPi * static_cast<double>(p) / static_cast<double>(P);
          Point pt;
          pt.x[0] = s * std::cos(phi);
          pt.x[1] = s * std::sin(phi);
          pt.x[2] = z[g];
          model->nodes_.push_back(pt);
          model->weights_.push_back(wz[g] * 2.0 * kPi / static_cast<double>(P));
        }
      }
      break;
    }
  }
  return model;
}

std::shared_ptr<const SpectralModel> build_model(Manifold m, long J,
                                                 long quadrature_size) {
  return SpectralModel::build(m, J, quadrature_size);
}

double SpectralModel::eval_basis(long l, int k, const Point& p) const {
  if (l < 0 || l >= J_) throw std::out_of_range("eval_basis: block index");
  const int d = mults_[static_cast<std::size_t>(l)];
  if (k < 1 || k > d) throw std::out_of_range("eval_basis: position in eigenspace");
  const int i = k - 1;
  switch (manifold_) {
    case Manifold::circle: {
      if (l == 0) return 1.0 / std::sqrt(2.0 * kPi);
      const double a = static_cast<double>(l) * p.x[0];
      return (i == 0 ? std::cos(a) : std::sin(a)) / std::sqrt(kPi);
    }
    case Manifold::torus2: {
      if (l == 0) return 1.0 / (2.0 * kPi);
      const auto& [m1, m2] = reps_[static_cast<std::size_t>(l)][i / 2];
      const double a = m1 * p.x[0] + m2 * p.x[1];
      return (i % 2 == 0 ? std::cos(a) : std::sin(a)) / (std::sqrt(2.0) * kPi);
    }
    case Manifold::sphere2: {
      const double z = p.x[2];
      if (i == 0) return legendre_single(static_cast<int>(l), 0, z);
      const int m = (i + 1) / 2;
      const double phi = std::atan2(p.x[1], p.x[0]);
      const double leg = legendre_single(static_cast<int>(l), m, z);
      const double tr = (i % 2 == 1) ? std::cos(m * phi) : std::sin(m * phi);
      return std::sqrt(2.0) * leg * tr;
    }
  }
  return 0.0;
}

std::string SpectralModel::basis_label(long l, int k) const {
  if (l < 0 || l >= J_) throw std::out_of_range("basis_label: block index");
  const int d = mults_[static_cast<std::size_t>(l)];
  if (k < 1 || k > d) throw std::out_of_range("basis_label: position in eigenspace");
  const int i = k - 1;
  switch (manifold_) {
    case Manifold::circle:
      if (l == 0) return "const";
      return (i == 0 ? "cos:" : "sin:") + std::to_string(l);
    case Manifold::torus2: {
      if (l == 0) return "const";
      const auto& [m1, m2] = reps_[static_cast<std::size_t>(l)][i / 2];
      return std::string(i % 2 == 0 ? "cos:(" : "sin:(") + std::to_string(m1) + "," +
             std::to_string(m2) + ")";
    }
    case Manifold::sphere2: {
      if (i == 0) return "Y:" + std::to_string(l) + ":0";
      const int m = (i + 1) / 2;
      return "Y:" + std::to_string(l) + ":" + std::to_string(m) +
             (i % 2 == 1 ? ":cos" : ":sin");
    }
  }
  return "?";
}

void SpectralModel::ensure_table() const {
  std::call_once(table_once_, [this] {
    const long B = total_dim();
    const long N = static_cast<long>(nodes_.size());
    std::vector<std::vector<double>> table(static_cast<std::size_t>(B));
    for (auto& row : table) row.assign(static_cast<std::size_t>(N), 0.0);

    if (manifold_ == Manifold::sphere2) {
      const long G = quad_size_, P = 2 * quad_size_;
      const int jm = static_cast<int>(J_) - 1;
      // One Legendre table per colatitude ring, reused by every row.
      std::vector<std::vector<double>> leg(static_cast<std::size_t>(G));
      parallel_for(G, [&](long b, long e) {
        for (long g = b; g < e; ++g)
          leg[static_cast<std::size_t>(g)] = legendre_table(jm, nodes_[g * P].x[2]);
      });
      parallel_for(B, [&](long rb, long re) {
        for (long r = rb; r < re; ++r) {
          // Locate (l, i) for the flat row index.
          long l = static_cast<long>(
              std::upper_bound(offsets_.begin(), offsets_.end(), r) - offsets_.begin() - 1);
          const int i = static_cast<int>(r - offsets_[l]);
          const int m = (i == 0) ? 0 : (i + 1) / 2;
          auto& row = table[static_cast<std::size_t>(r)];
          for (long g = 0; g < G; ++g) {
            const double lv = leg[static_cast<std::size_t>(g)][leg_idx(static_cast<int>(l), m)];
            for (long p = 0; p < P; ++p) {
              if (i == 0) {
                row[g * P + p] = lv;
              } else {
                const double phi = 2.0 * kPi * static_cast<double>(p) / static_cast<double>(P);
                const double tr = (i % 2 == 1) ? std::cos(m * phi) : std::sin(m * phi);
                row[g * P + p] = std::sqrt(2.0) * lv * tr;
              }
            }
          }
        }
      });
    } else {
      parallel_for(B, [&](long rb, long re) {
        for (long r = rb; r < re; ++r) {
          long l = static_cast<long>(
              std::upper_bound(offsets_.begin(), offsets_.end(), r) - offsets_.begin() - 1);
          const int i = static_cast<int>(r - offsets_[l]);
          auto& row = table[static_cast<std::size_t>(r)];
          for (long t = 0; t < N; ++t) row[t] = eval_basis(l, i + 1, nodes_[t]);
        }
      });
    }
    table_ = std::move(table);
  });
}

const std::vector<double>& SpectralModel::basis_row(long l, int i) const {
  if (data_only()) throw NoQuadrature("basis_row: model has no quadrature");
  if (l < 0 || l >= J_) throw std::out_of_range("basis_row: block index");
  if (i < 0 || i >= mults_[static_cast<std::size_t>(l)])
    throw std::out_of_range("basis_row: position in eigenspace");
  ensure_table();
  return table_[static_cast<std::size_t>(offsets_[l] + i)];
}

Samples sample_function(const SpectralModel& model,
                        const std::function<cplx(const Point&)>& f) {
  const auto& nodes = model.nodes();
  Samples out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = f(nodes[i]);
  return out;
}

cplx inner_product(const SpectralModel& model, const Samples& f, const Samples& g) {
  const auto& w = model.weights();
  if (f.size() != w.size() || g.size() != w.size())
    throw std::invalid_argument("inner_product: sample length mismatch");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i] * std::conj(g[i]);
  return acc;
}

double gram_residual(const SpectralModel& model) {
  const long B = model.total_dim();
  const long N = static_cast<long>(model.nodes().size());
  const auto& w = model.weights();
  model.basis_row(0, 0);  // force the table
  std::vector<const double*> rows(static_cast<std::size_t>(B));
  {
    long r = 0;
    for (long l = 0; l < model.J(); ++l)
      for (int i = 0; i < model.mults()[static_cast<std::size_t>(l)]; ++i)
        rows[static_cast<std::size_t>(r++)] = model.basis_row(l, i).data();
  }
  std::vector<double> worst(static_cast<std::size_t>(B), 0.0);
  parallel_for(B, [&](long b, long e) {
    std::vector<double> wa(static_cast<std::size_t>(N));
    for (long a = b; a < e; ++a) {
      const double* ra = rows[static_cast<std::size_t>(a)];
      for (long t = 0; t < N; ++t) wa[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(t)] * ra[t];
      double local = 0.0;
      for (long c = a; c < B; ++c) {
        const double* rc = rows[static_cast<std::size_t>(c)];
        double dot = 0.0;
        for (long t = 0; t < N; ++t) dot += wa[static_cast<std::size_t>(t)] * rc[t];
        const double target = (a == c) ? 1.0 : 0.0;
        local = std::max(local, std::abs(dot - target));
      }
      worst[static_cast<std::size_t>(a)] = local;
    }
  });
  double res = 0.0;
  for (double v : worst) res = std::max(res, v);
  return res;
}

WeylReport weyl_multiplicity_check(const SpectralModel& model) {
  const double expo = static_cast<double>(model.dim()) / model.order();
  WeylReport rep;
  long last_new_max = 0;
  double best = -1.0;
  for (long j = 0; j < model.J(); ++j) {
    const double v = model.mults()[static_cast<std::size_t>(j)] /
                     std::pow(1.0 + model.lambdas()[static_cast<std::size_t>(j)], expo);
    if (v > best) {
      best = v;
      rep.argmax = j;
      last_new_max = j;
    }
  }
  rep.sup = best;
  rep.stable = last_new_max < model.J() / 2 || model.J() < 4;
  return rep;
}

SummabilityReport summability_probe(const SpectralModel& model, double q, long J) {
  if (!(q > 0.0)) throw std::invalid_argument("summability_probe: q must be > 0");
  const long Jp = std::min(J, model.J());
  if (Jp < 2) throw std::invalid_argument("summability_probe: need at least 2 blocks");
  std::vector<double> inc(static_cast<std::size_t>(Jp));
  SummabilityReport rep;
  double s3q = 0.0;
  for (long j = 0; j < Jp; ++j) {
    inc[static_cast<std::size_t>(j)] =
        model.mults()[static_cast<std::size_t>(j)] *
        std::pow(1.0 + model.lambdas()[static_cast<std::size_t>(j)], -q);
    rep.sum += inc[static_cast<std::size_t>(j)];
    if (j < 3 * Jp / 4) s3q = rep.sum;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (long j = std::max<long>(1, Jp / 2); j < Jp; ++j) {
    const double x = std::log(static_cast<double>(j));
    const double y = std::log(inc[static_cast<std::size_t>(j)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  rep.decay_slope = (n * sxx - sx * sx) > 0.0
                        ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                        : 0.0;
  rep.diverging = rep.decay_slope >= -1.05;
  rep.tight_tail = (rep.sum - s3q) < 1e-6 * rep.sum;
  return rep;
}

SupnormReport supnorm_ratio_check(const SpectralModel& model) {
  const double expo = (model.dim() - 1.0) / (2.0 * model.order());
  SupnormReport rep;
  const long J = model.J();
  if (J < 2) return rep;

  std::vector<double> block_max(static_cast<std::size_t>(J), 0.0);
  if (model.manifold() == Manifold::sphere2) {
    const long G = model.quadrature_size(), P = 2 * G;
    const int jm = static_cast<int>(J) - 1;
    // max |Q_j^m| per (j, m) over the colatitude rings
    std::vector<double> leg_max(leg_idx(jm, jm) + 1, 0.0);
    for (long g = 0; g < G; ++g) {
      const auto t = legendre_table(jm, model.nodes()[g * P].x[2]);
      for (std::size_t i = 0; i < t.size(); ++i)
        leg_max[i] = std::max(leg_max[i], std::abs(t[i]));
    }
    std::vector<double> cos_max(static_cast<std::size_t>(J), 0.0),
        sin_max(static_cast<std::size_t>(J), 0.0);
    for (long m = 0; m < J; ++m)
      for (long p = 0; p < P; ++p) {
        const double phi = 2.0 * kPi * static_cast<double>(p) / static_cast<double>(P);
        cos_max[static_cast<std::size_t>(m)] =
            std::max(cos_max[static_cast<std::size_t>(m)], std::abs(std::cos(m * phi)));
        sin_max[static_cast<std::size_t>(m)] =
            std::max(sin_max[static_cast<std::size_t>(m)], std::abs(std::sin(m * phi)));
      }
    for (long l = 1; l < J; ++l) {
      double bm = leg_max[leg_idx(static_cast<int>(l), 0)];
      for (int m = 1; m <= l; ++m) {
        const double lm = leg_max[leg_idx(static_cast<int>(l), m)] * std::sqrt(2.0);
        bm = std::max(bm, lm * std::max(cos_max[static_cast<std::size_t>(m)],
                                        sin_max[static_cast<std::size_t>(m)]));
      }
      block_max[static_cast<std::size_t>(l)] = bm;
    }
  } else {
    for (long l = 1; l < J; ++l) {
      double bm = 0.0;
      for (int i = 0; i < model.mults()[static_cast<std::size_t>(l)]; ++i) {
        const auto& row = model.basis_row(l, i);
        for (double v : row) bm = std::max(bm, std::abs(v));
      }
      block_max[static_cast<std::size_t>(l)] = bm;
    }
  }

  for (long l = 1; l < J; ++l) {
    const double ratio = block_max[static_cast<std::size_t>(l)] /
                         std::pow(model.lambdas()[static_cast<std::size_t>(l)], expo);
    if (ratio > rep.sup) {
      rep.sup = ratio;
      rep.argmax = l;
    }
  }
  return rep;
}

}  // namespace komatsu
