#include "komatsu/coeff_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace komatsu {

namespace {

double max_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, v[i]);
  return m;
}

// Trailing-quarter max minus leading-quarter max; short lists return 0.
double quarter_violation(const std::vector<double>& r) {
  const std::size_t n = r.size();
  if (n < 8) return 0.0;
  return max_range(r, 3 * n / 4, n) - max_range(r, 0, std::max<std::size_t>(1, n / 4));
}

struct UsableBlocks {
  std::vector<double> xs;       // lambda^{1/nu}, ascending
  std::vector<double> lognorm;  // log HS norm
  std::vector<long> ls;
};

UsableBlocks collect_usable(const CoeffArray& u) {
  UsableBlocks out;
  const double nu = u.model->order();
  for (long l = 1; l < u.J(); ++l) {
    const double h = hs_norm(u.blocks[static_cast<std::size_t>(l)]);
    if (h <= 0.0) continue;
    out.xs.push_back(std::pow(u.model->lambdas()[static_cast<std::size_t>(l)], 1.0 / nu));
    out.lognorm.push_back(std::log(h));
    out.ls.push_back(l);
  }
  return out;
}

bool all_zero(const CoeffArray& u) {
  for (const auto& b : u.blocks)
    for (const cplx& z : b)
      if (z != cplx(0.0)) return false;
  return true;
}

void check_aligned(const CoeffArray& u, const CoeffArray& v) {
  if (!u.model || !v.model) throw std::invalid_argument("coefficient array without model");
  if (u.model->manifold() != v.model->manifold())
    throw std::invalid_argument("coefficient arrays live on different manifolds");
  const long n = std::min(u.J(), v.J());
  for (long l = 0; l < n; ++l)
    if (u.model->lambdas()[static_cast<std::size_t>(l)] !=
        v.model->lambdas()[static_cast<std::size_t>(l)])
      throw std::invalid_argument("coefficient arrays disagree on the spectrum");
}

// Geometric-trend convergence: mean log term over the trailing quarter must
// sit below the third quarter. Zero terms are skipped; short lists pass.
bool geometric_trend_converged(const std::vector<double>& terms) {
  std::vector<double> lt;
  for (double t : terms)
    if (t > 0.0) lt.push_back(std::log(t));
  const std::size_t m = lt.size();
  if (m < 8) return true;
  double s3 = 0.0, s4 = 0.0;
  const std::size_t q3 = m / 2, q4 = 3 * m / 4;
  for (std::size_t i = q3; i < q4; ++i) s3 += lt[i];
  for (std::size_t i = q4; i < m; ++i) s4 += lt[i];
  const double m3 = s3 / static_cast<double>(q4 - q3);
  const double m4 = s4 / static_cast<double>(m - q4);
  return m4 <= m3 - 0.05;
}

double lin_slope(const std::vector<double>& x, const std::vector<double>& y,
                 std::size_t lo, std::size_t hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) return 0.0;
  return (n * sxy - sx * sy) / den;
}

}  // namespace

CoeffArray CoeffArray::create(std::shared_ptr<const SpectralModel> model,
                              std::vector<std::vector<cplx>> blocks) {
  if (!model) throw std::invalid_argument("CoeffArray: null model");
  if (static_cast<long>(blocks.size()) > model->J())
    throw std::invalid_argument("CoeffArray: more blocks than the model retains");
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    if (static_cast<int>(blocks[l].size()) != model->mults()[l])
      throw std::invalid_argument("CoeffArray: block " + std::to_string(l) +
                                  " length does not match the multiplicity");
    for (const cplx& z : blocks[l])
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("CoeffArray: non-finite entry in block " +
                                    std::to_string(l));
  }
  CoeffArray u;
  u.model = std::move(model);
  u.blocks = std::move(blocks);
  return u;
}

CoeffArray analyze(std::shared_ptr<const SpectralModel> model, const Samples& f,
                   long J) {
  if (!model) throw std::invalid_argument("analyze: null model");
  if (J < 0) J = model->J();
  if (J < 1 || J > model->J()) throw std::invalid_argument("analyze: bad block count");
  const auto& w = model->weights();
  if (f.size() != w.size()) throw std::invalid_argument("analyze: sample length mismatch");
  std::vector<std::vector<cplx>> blocks(static_cast<std::size_t>(J));
  for (long l = 0; l < J; ++l) {
    const int d = model->mults()[static_cast<std::size_t>(l)];
    blocks[static_cast<std::size_t>(l)].resize(d);
    for (int i = 0; i < d; ++i) {
      const auto& row = model->basis_row(l, i);
      cplx acc = 0.0;
      for (std::size_t t = 0; t < row.size(); ++t) acc += w[t] * f[t] * row[t];
      blocks[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] = acc;
    }
  }
  CoeffArray u;
  u.model = std::move(model);
  u.blocks = std::move(blocks);
  return u;
}

cplx synthesize_at(const CoeffArray& u, const Point& x) {
  cplx acc = 0.0;
  for (long l = 0; l < u.J(); ++l) {
    const auto& b = u.blocks[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < b.size(); ++i)
      acc += b[i] * u.model->eval_basis(l, static_cast<int>(i) + 1, x);
  }
  return acc;
}

Samples synthesize(const CoeffArray& u) {
  const std::size_t N = u.model->nodes().size();
  Samples out(N, 0.0);
  for (long l = 0; l < u.J(); ++l) {
    const auto& b = u.blocks[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] == cplx(0.0)) continue;
      const auto& row = u.model->basis_row(l, static_cast<int>(i));
      for (std::size_t t = 0; t < N; ++t) out[t] += b[i] * row[t];
    }
  }
  return out;
}

double plancherel_residual(const std::shared_ptr<const SpectralModel>& model,
                           const Samples& f) {
  const auto& w = model->weights();
  if (f.size() != w.size())
    throw std::invalid_argument("plancherel_residual: sample length mismatch");
  double quad = 0.0;
  for (std::size_t t = 0; t < f.size(); ++t) quad += w[t] * std::norm(f[t]);
  const CoeffArray u = analyze(model, f);
  double spectral = 0.0;
  for (const auto& b : u.blocks)
    for (const cplx& z : b) spectral += std::norm(z);
  return std::abs(quad - spectral);
}

double hs_norm(const std::vector<cplx>& block) {
  // Scaled accumulation: squaring tiny magnitudes directly underflows for
  // entries below ~1e-162 and loses the whole block.
  double peak = 0.0;
  for (const cplx& z : block)
    peak = std::max({peak, std::abs(z.real()), std::abs(z.imag())});
  if (peak == 0.0 || !std::isfinite(peak)) return peak;
  double s = 0.0;
  for (const cplx& z : block) {
    const double re = z.real() / peak, im = z.imag() / peak;
    s += re * re + im * im;
  }
  return peak * std::sqrt(s);
}

double block_norm(const CoeffArray& u, long l, double p) {
  if (l < 0 || l >= u.J()) throw std::out_of_range("block_norm: block index");
  const auto& b = u.blocks[static_cast<std::size_t>(l)];
  if (std::isinf(p)) {
    double m = 0.0;
    for (const cplx& z : b) m = std::max(m, std::abs(z));
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("block_norm: p must be >= 1");
  double s = 0.0;
  for (const cplx& z : b) s += std::pow(std::abs(z), p);
  return std::pow(s, 1.0 / p);
}

NormIneqReport norm_inequality_check(int d, double p, double q, int trials,
                                     std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("norm_inequality_check: d must be >= 1");
  if (!(p >= 1.0) || !(q > p))
    throw std::invalid_argument("norm_inequality_check: need 1 <= p < q");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto norm_p = [&](const std::vector<cplx>& a, double pp) {
    if (std::isinf(pp)) {
      double m = 0.0;
      for (const cplx& z : a) m = std::max(m, std::abs(z));
      return m;
    }
    double s = 0.0;
    for (const cplx& z : a) s += std::pow(std::abs(z), pp);
    return std::pow(s, 1.0 / pp);
  };
  const double dd = static_cast<double>(d);
  const double c_qp = std::isinf(q) ? 1.0 : std::pow(dd, 2.0 / q);
  const double c_pq = std::pow(dd, 2.0 * (1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q)));
  NormIneqReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    std::vector<cplx> a(static_cast<std::size_t>(d));
    if (t == 0) {
      a[0] = 1.0;  // unit coordinate vector
    } else if (t == 1) {
      for (auto& z : a) z = 1.0;  // all-ones
    } else {
      for (auto& z : a) z = cplx(gauss(rng), gauss(rng));
    }
    const double np = norm_p(a, p), nq = norm_p(a, q);
    const double slack1 = c_qp * np - nq;
    const double slack2 = c_pq * nq - np;
    for (double s : {slack1, slack2}) {
      rep.worst_slack = std::min(rep.worst_slack, s);
      if (s < -1e-12 * std::max(1.0, np + nq)) ++rep.violations;
    }
  }
  return rep;
}

std::string decay_class_name(DecayClass c) {
  switch (c) {
    case DecayClass::smooth: return "smooth";
    case DecayClass::analytic: return "analytic";
    case DecayClass::gevrey_roumieu: return "gevrey_roumieu";
    case DecayClass::gevrey_beurling: return "gevrey_beurling";
    case DecayClass::alpha_dual_roumieu: return "alpha_dual_roumieu";
    case DecayClass::alpha_dual_beurling: return "alpha_dual_beurling";
    case DecayClass::none: return "none";
  }
  return "?";
}

DecayClass decay_class_from_name(const std::string& name) {
  for (DecayClass c : {DecayClass::smooth, DecayClass::analytic, DecayClass::gevrey_roumieu,
                       DecayClass::gevrey_beurling, DecayClass::alpha_dual_roumieu,
                       DecayClass::alpha_dual_beurling, DecayClass::none})
    if (decay_class_name(c) == name) return c;
  throw std::invalid_argument("unknown decay class: " + name);
}

std::vector<double> LGrid::values() const {
  if (!(min > 0.0) || !(max > min) || points < 1)
    throw std::invalid_argument("LGrid: need 0 < min < max and points >= 1");
  std::vector<double> v(static_cast<std::size_t>(points));
  if (points == 1) {
    v[0] = min;
    return v;
  }
  for (int i = 0; i < points; ++i)
    v[static_cast<std::size_t>(i)] =
        min * std::pow(max / min, static_cast<double>(i) / (points - 1));
  return v;
}

namespace {

// Envelope verdicts per grid scale. decay: residual log||u|| + M(L x);
// growth: log||u|| - M(L x).
std::vector<GridVerdict> grid_verdicts(const UsableBlocks& ub, const WeightSequence* w,
                                       double nu, const std::vector<double>& Ls,
                                       bool decay, double tol) {
  std::vector<GridVerdict> out;
  out.reserve(Ls.size());
  for (double L : Ls) {
    GridVerdict gv;
    gv.L = L;
    std::vector<double> r(ub.xs.size());
    std::vector<double> M;
    if (w != nullptr) {
      M = associated_function_profile(*w, nu, L, ub.xs);
    } else {
      M.resize(ub.xs.size());
      for (std::size_t i = 0; i < ub.xs.size(); ++i) M[i] = L * ub.xs[i];
    }
    for (std::size_t i = 0; i < ub.xs.size(); ++i)
      r[i] = decay ? ub.lognorm[i] + M[i] : ub.lognorm[i] - M[i];
    gv.log_C = ub.xs.empty() ? 0.0 : max_range(r, 0, r.size());
    gv.violation = quarter_violation(r);
    gv.feasible = gv.violation <= tol;
    out.push_back(gv);
  }
  return out;
}

DecayEnvelope smooth_probe(const UsableBlocks& ub, double nu, double tol) {
  DecayEnvelope env;
  env.cls = DecayClass::smooth;
  const std::size_t n = ub.xs.size();
  if (n < 4) {
    env.residual = 0.0;
    env.C = 1.0;
    return env;
  }
  std::vector<double> loglam(n);
  for (std::size_t i = 0; i < n; ++i) loglam[i] = nu * std::log(ub.xs[i]);
  const std::size_t W = std::min<std::size_t>(8, n / 2);
  for (std::size_t w = 0; w < W; ++w) {
    const std::size_t lo = w * n / W, hi = (w + 1) * n / W;
    env.window_N.push_back(-lin_slope(loglam, ub.lognorm, lo, hi));
  }
  const double n_first = env.window_N.front(), n_last = env.window_N.back();
  double n_min = n_first;
  for (double v : env.window_N) n_min = std::min(n_min, v);
  // Local exponents must keep growing and never indicate growth of the
  // coefficients themselves.
  env.residual = std::max(n_first + 1.0 - n_last, 0.1 - n_min);
  env.C = std::exp(max_range(ub.lognorm, 0, n));
  if (env.residual > tol) env.cls = DecayClass::none;
  return env;
}

}  // namespace

DecayEnvelope classify(const CoeffArray& u, const WeightSequence& w, DecayClass target,
                       const LGrid& grid, double tol) {
  if (target == DecayClass::none)
    throw std::invalid_argument("classify: target must be a concrete class");
  const std::vector<double> Ls = grid.values();
  if (Ls.empty()) throw std::invalid_argument("classify: empty L grid");
  const double nu = u.model->order();

  DecayEnvelope env;
  env.horizon = u.J();
  if (all_zero(u)) {
    env.cls = target;
    env.trivial = true;
    env.C = 1.0;
    env.L = target == DecayClass::alpha_dual_roumieu ||
                    target == DecayClass::alpha_dual_beurling
                ? Ls.front()
                : Ls.back();
    env.residual = 0.0;
    return env;
  }

  const UsableBlocks ub = collect_usable(u);
  if (target == DecayClass::smooth) {
    DecayEnvelope s = smooth_probe(ub, nu, tol);
    s.horizon = u.J();
    return s;
  }

  const bool decay = target == DecayClass::analytic ||
                     target == DecayClass::gevrey_roumieu ||
                     target == DecayClass::gevrey_beurling;
  const bool universal = target == DecayClass::gevrey_beurling;
  const WeightSequence* wp = target == DecayClass::analytic ? nullptr : &w;
  env.grid = grid_verdicts(ub, wp, nu, Ls, decay, tol);

  if (universal) {
    bool all_ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < env.grid.size(); ++i) {
      all_ok = all_ok && env.grid[i].feasible;
      if (env.grid[i].violation > worst) {
        worst = env.grid[i].violation;
        worst_i = i;
      }
    }
    env.residual = worst;
    if (all_ok) {
      env.cls = target;
      env.L = env.grid.back().L;
      env.C = std::exp(env.grid.back().log_C);
    } else {
      env.cls = DecayClass::none;
      env.L = env.grid[worst_i].L;
      env.C = std::exp(env.grid[worst_i].log_C);
    }
    return env;
  }

  // Existential: largest feasible scale for decay, smallest for growth.
  long pick = -1;
  if (decay) {
    for (long i = static_cast<long>(env.grid.size()) - 1; i >= 0; --i)
      if (env.grid[static_cast<std::size_t>(i)].feasible) {
        pick = i;
        break;
      }
  } else {
    for (std::size_t i = 0; i < env.grid.size(); ++i)
      if (env.grid[i].feasible) {
        pick = static_cast<long>(i);
        break;
      }
  }
  if (pick >= 0) {
    const GridVerdict& gv = env.grid[static_cast<std::size_t>(pick)];
    env.cls = target;
    env.L = gv.L;
    env.C = std::exp(gv.log_C);
    env.residual = gv.violation;
  } else {
    env.cls = DecayClass::none;
    std::size_t best = 0;
    for (std::size_t i = 1; i < env.grid.size(); ++i)
      if (env.grid[i].violation < env.grid[best].violation) best = i;
    env.L = env.grid[best].L;
    env.C = std::exp(env.grid[best].log_C);
    env.residual = env.grid[best].violation;
  }
  return env;
}

DecayClass classify_best(const CoeffArray& u, const WeightSequence& w,
                         const LGrid& grid, double tol) {
  for (DecayClass c : {DecayClass::gevrey_roumieu, DecayClass::smooth,
                       DecayClass::alpha_dual_roumieu}) {
    if (classify(u, w, c, grid, tol).cls == c) return c;
  }
  return DecayClass::none;
}

PairingReport pairing(const CoeffArray& u, const CoeffArray& v) {
  check_aligned(u, v);
  const long n = std::min(u.J(), v.J());
  PairingReport rep;
  double acc = 0.0;
  for (long l = 0; l < n; ++l) {
    const auto& a = u.blocks[static_cast<std::size_t>(l)];
    const auto& b = v.blocks[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < a.size(); ++i) {
      rep.value += a[i] * b[i];
      acc += std::abs(a[i]) * std::abs(b[i]);
    }
    rep.abs_partial_sums.push_back(acc);
  }
  const double S = acc;
  if (S == 0.0 || n < 4) {
    rep.converged = true;
  } else {
    const std::size_t q = static_cast<std::size_t>(n - n / 4);
    const double tail = S - rep.abs_partial_sums[q - 1];
    rep.converged = tail < 1e-9 * S;
  }
  return rep;
}

DualityProbe duality_equivalence_probe(const CoeffArray& v, const CoeffArray& w, long J,
                                       const WeightSequence& weight, const LGrid& grid,
                                       double tol) {
  check_aligned(v, w);
  DualityProbe probe;
  probe.hypothesis_warning_v =
      classify(v, weight, DecayClass::gevrey_roumieu, grid, tol).cls == DecayClass::none;
  probe.hypothesis_warning_w =
      classify(w, weight, DecayClass::alpha_dual_roumieu, grid, tol).cls ==
      DecayClass::none;

  const long n = std::min({v.J(), w.J(), J});
  std::vector<double> hs_terms, comp_terms;
  probe.min_cs_slack = std::numeric_limits<double>::infinity();
  for (long l = 0; l < n; ++l) {
    const auto& a = v.blocks[static_cast<std::size_t>(l)];
    const auto& b = w.blocks[static_cast<std::size_t>(l)];
    const double hs = hs_norm(a) * hs_norm(b);
    double comp = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) comp += std::abs(a[i]) * std::abs(b[i]);
    hs_terms.push_back(hs);
    comp_terms.push_back(comp);
    probe.hs_sum += hs;
    probe.componentwise_sum += comp;
    probe.min_cs_slack = std::min(probe.min_cs_slack, hs - comp);
  }
  if (n == 0) probe.min_cs_slack = 0.0;
  probe.hs_converged = geometric_trend_converged(hs_terms);
  probe.componentwise_converged = geometric_trend_converged(comp_terms);
  probe.agree = probe.hs_converged == probe.componentwise_converged;
  return probe;
}

BidualResult bidual_membership(const CoeffArray& w, const WeightSequence& weight,
                               const LGrid& grid, double tol) {
  const std::vector<double> Ls = grid.values();
  if (Ls.empty()) throw std::invalid_argument("bidual_membership: empty L grid");
  BidualResult res;
  if (all_zero(w)) {
    res.found = true;
    res.trivial = true;
    res.L = Ls.back();
    return res;
  }
  const UsableBlocks ub = collect_usable(w);
  const double nu = w.model->order();
  for (double L : Ls) {
    GridVerdict gv;
    gv.L = L;
    const std::vector<double> M = associated_function_profile(weight, nu, L, ub.xs);
    std::vector<double> logt(ub.xs.size());
    for (std::size_t i = 0; i < logt.size(); ++i) logt[i] = ub.lognorm[i] + M[i];
    gv.log_C = ub.xs.empty() ? 0.0 : max_range(logt, 0, logt.size());
    gv.violation = quarter_violation(logt);
    // Weighted series must visibly shrink across the horizon to count as
    // summable.
    gv.feasible = logt.size() < 8 || gv.violation <= -tol;
    res.grid.push_back(gv);
  }
  for (long i = static_cast<long>(res.grid.size()) - 1; i >= 0; --i)
    if (res.grid[static_cast<std::size_t>(i)].feasible) {
      res.found = true;
      res.L = res.grid[static_cast<std::size_t>(i)].L;
      break;
    }
  return res;
}

}  // namespace komatsu
