#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "komatsu/builtins.hpp"
#include "komatsu/coeff_space.hpp"
#include "komatsu/io.hpp"
#include "komatsu/spectral_model.hpp"
#include "komatsu/tensor_ops.hpp"
#include "komatsu/weights.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace komatsu;

// Exit codes: 0 verdict delivered, 1 verify-suite failure, 2 spectra
// invariant failure, 3 unresolved input or bad config, 4 aliasing-guard trip
// without --allow-alias.
constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitInvariantFailure = 2;
constexpr int kExitUnresolvedInput = 3;
constexpr int kExitAliasing = 4;

constexpr long kGramCap = 4096;  // skip O(B^2 N) checks above this basis size

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool allow_alias = false;
};

RunConfig load_config(const Options& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) cfg = parse_config(read_text_file(opt.config_path));
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

std::shared_ptr<const SpectralModel> build_from_config(const RunConfig& cfg) {
  const long qs = cfg.quadrature_size == -1 ? kNoQuadrature : cfg.quadrature_size;
  return build_model(cfg.manifold, cfg.J, qs);
}

CoeffArray seeded_coeffs(std::shared_ptr<const SpectralModel> model, long J,
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

void emit(const json& report, const std::vector<std::string>& human) {
  std::cout << report.dump(2) << "\n";
  for (const auto& line : human) std::cout << line << "\n";
}

json check_entry(const std::string& id, bool passed, const std::string& detail) {
  json c;
  c["id"] = id;
  c["passed"] = passed;
  c["detail"] = detail;
  return c;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_spectra(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const auto model = build_from_config(cfg);
  const std::filesystem::path out(cfg.out_dir);

  json report;
  report["command"] = "spectra";
  report["config_hash"] = hash_hex(fnv1a_hash(cfg.raw));
  report["manifold"] = manifold_name(cfg.manifold);
  report["J"] = cfg.J;

  const auto weyl = weyl_multiplicity_check(*model);
  report["weyl"] = {{"sup", weyl.sup}, {"argmax", weyl.argmax}, {"stable", weyl.stable}};

  const double q = cfg.summability_q > 0.0 ? cfg.summability_q
                                           : static_cast<double>(model->dim());
  const auto summ = summability_probe(*model, q, cfg.J);
  report["summability"] = {{"q", q},
                           {"sum", summ.sum},
                           {"decay_slope", summ.decay_slope},
                           {"diverging", summ.diverging},
                           {"tight_tail", summ.tight_tail}};

  json checks = json::array();
  checks.push_back(check_entry("multiplicity_growth", weyl.stable,
                               "running sup " + fmt(weyl.sup) + " at block " +
                                   std::to_string(weyl.argmax)));
  if (!model->data_only() && model->total_dim() <= kGramCap) {
    const double gram = gram_residual(*model);
    report["gram_residual"] = gram;
    checks.push_back(
        check_entry("orthonormality", gram < 1e-10, "max residual " + fmt(gram)));
    const auto sup = supnorm_ratio_check(*model);
    report["supnorm"] = {{"sup", sup.sup}, {"argmax", sup.argmax}};
  }
  bool passed = true;
  for (const auto& c : checks) passed = passed && c.at("passed").get<bool>();
  report["checks"] = std::move(checks);
  report["passed"] = passed;

  write_text_file(out / "model.json", model_to_json(*model));
  write_text_file(out / "spectra_report.json", report.dump(2) + "\n");

  std::vector<std::string> human;
  human.push_back("spectra: " + manifold_name(cfg.manifold) + " J=" +
                  std::to_string(cfg.J) + (model->data_only() ? " (data only)" : ""));
  for (const auto& c : report.at("checks"))
    human.push_back(std::string(c.at("passed").get<bool>() ? "[pass] " : "[FAIL] ") +
                    c.at("id").get<std::string>() + ": " +
                    c.at("detail").get<std::string>());
  emit(report, human);
  return passed ? kExitOk : kExitInvariantFailure;
}

CoeffArray resolve_input(const RunConfig& cfg,
                         const std::shared_ptr<const SpectralModel>& model,
                         const WeightSequence& weight) {
  if (!cfg.builtin.empty()) {
    if (!is_builtin_family(cfg.builtin))
      throw std::invalid_argument("unknown builtin family '" + cfg.builtin + "'");
    return builtin_coeffs(cfg.builtin, cfg.builtin_params, model, -1, &weight);
  }
  if (!cfg.coeff_file.empty()) return coeffs_from_json(read_text_file(cfg.coeff_file));
  if (!cfg.sample_file.empty()) {
    const json d = json::parse(read_text_file(cfg.sample_file));
    Samples f;
    for (const auto& e : d.at("samples"))
      f.emplace_back(e[0].get<double>(), e[1].get<double>());
    return analyze(model, f);
  }
  throw std::invalid_argument("config carries no input function");
}

int cmd_classify(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const auto model = build_from_config(cfg);
  const WeightSequence weight = make_weight(cfg);
  const CoeffArray u = resolve_input(cfg, model, weight);
  const std::filesystem::path out(cfg.out_dir);

  json report;
  report["command"] = "classify";
  report["config_hash"] = hash_hex(fnv1a_hash(cfg.raw));
  report["weight"] = weight.describe();
  report["variant"] = cfg.variant == Variant::roumieu ? "roumieu" : "beurling";
  report["blocks"] = u.J();

  std::vector<DecayClass> targets = cfg.classes;
  json results = json::array();
  std::optional<DecayEnvelope> csv_env;
  for (DecayClass target : targets) {
    const DecayEnvelope env = classify(u, weight, target, cfg.grid, cfg.tolerance);
    json r;
    r["target"] = decay_class_name(target);
    r["passed"] = env.cls == target;
    r["C"] = env.C;
    r["L"] = env.L;
    r["residual"] = env.residual;
    r["trivial"] = env.trivial;
    if (!env.window_N.empty()) r["window_exponents"] = env.window_N;
    results.push_back(std::move(r));
    if (!csv_env && env.cls == target) csv_env = env;
  }
  const DecayClass best = classify_best(u, weight, cfg.grid, cfg.tolerance);
  report["best"] = decay_class_name(best);
  if (!csv_env && best != DecayClass::none) {
    const DecayEnvelope env = classify(u, weight, best, cfg.grid, cfg.tolerance);
    if (env.cls == best) csv_env = env;
  }
  report["results"] = std::move(results);

  write_text_file(out / "classify_report.json", report.dump(2) + "\n");
  write_text_file(out / "decay_curve.csv",
                  decay_curve_csv(u, &weight, csv_env ? &*csv_env : nullptr));

  std::vector<std::string> human;
  human.push_back("classify: best class " + decay_class_name(best));
  for (const auto& r : report.at("results"))
    human.push_back(std::string(r.at("passed").get<bool>() ? "[pass] " : "[fail] ") +
                    r.at("target").get<std::string>() + ": L=" +
                    fmt(r.at("L").get<double>()) + " C=" + fmt(r.at("C").get<double>()) +
                    " residual=" + fmt(r.at("residual").get<double>()));
  emit(report, human);
  return kExitOk;
}

int cmd_tensor(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const auto model = build_from_config(cfg);
  const WeightSequence weight = make_weight(cfg);
  const std::filesystem::path out(cfg.out_dir);

  if (cfg.op_name.empty()) throw std::invalid_argument("config carries no operator");
  SampleOp op;
  if (cfg.op_name == "laplacian")
    op = op_laplacian(model);
  else if (cfg.op_name == "derivative")
    op = op_derivative(model);
  else if (cfg.op_name == "multiply")
    op = op_multiply(model);
  else
    throw std::invalid_argument("unknown operator '" + cfg.op_name + "'");

  const TensorRep t = from_basis_action(op, model, cfg.op_K, cfg.op_J);

  CoeffArray u = cfg.builtin.empty()
                     ? seeded_coeffs(model, cfg.op_J, cfg.seed)
                     : builtin_coeffs(cfg.builtin, cfg.builtin_params, model, cfg.op_J,
                                      &weight);
  CoeffArray v = cfg.builtin.empty()
                     ? seeded_coeffs(model, cfg.op_K, cfg.seed + 1)
                     : builtin_coeffs(cfg.builtin, cfg.builtin_params, model, cfg.op_K,
                                      &weight);

  const auto adj = adjointness_residual(t, u, v);
  const auto seq = sequentiality_probe(t, u, v);
  const auto mult = multiplier_extract(t, 1e-10);

  json report;
  report["command"] = "tensor";
  report["config_hash"] = hash_hex(fnv1a_hash(cfg.raw));
  report["operator"] = cfg.op_name;
  report["K"] = t.K;
  report["J"] = t.J;
  report["aliasing"] = {{"warning", t.aliasing_warning},
                        {"top_band_fraction", t.aliasing_fraction}};
  report["adjointness"] = {{"residual", adj.residual},
                           {"roundoff_scale", adj.roundoff_scale},
                           {"truncation_estimate", adj.truncation_estimate},
                           {"truncation_dominated", adj.truncation_dominated}};
  report["sequentiality"] = {{"rows_checked", seq.rows_checked},
                             {"rows_stabilized", seq.rows_stabilized},
                             {"weighted_stabilized", seq.weighted_stabilized},
                             {"weighted_value", seq.weighted_value}};
  json m;
  m["accepted"] = mult.accepted;
  m["off_diag_ratio"] = mult.off_diag_ratio;
  if (mult.accepted) {
    json sig = json::array();
    for (const auto& b : mult.sigma) {
      json row = json::array();
      for (const cplx& z : b) row.push_back(json::array({z.real(), z.imag()}));
      sig.push_back(std::move(row));
    }
    m["sigma"] = std::move(sig);
  }
  report["multiplier"] = std::move(m);

  write_text_file(out / "tensor.json", tensor_to_json(t));
  write_text_file(out / "block_norms.csv", block_norm_csv(t));
  write_text_file(out / "tensor_report.json", report.dump(2) + "\n");

  std::vector<std::string> human;
  human.push_back("tensor: " + cfg.op_name + " K=" + std::to_string(t.K) + " J=" +
                  std::to_string(t.J));
  human.push_back(std::string("adjointness residual ") + fmt(adj.residual));
  human.push_back(std::string("multiplier ") +
                  (mult.accepted ? "accepted" : "rejected, off-diagonal ratio " +
                                                   fmt(mult.off_diag_ratio)));
  if (t.aliasing_warning)
    human.push_back("aliasing warning: top-band fraction " + fmt(t.aliasing_fraction));
  emit(report, human);

  if (t.aliasing_warning && !opt.allow_alias) return kExitAliasing;
  return kExitOk;
}

int cmd_verify(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const std::filesystem::path out(cfg.out_dir);
  json checks = json::array();

  const auto run = [&checks](const std::string& id, auto&& fn) {
    try {
      auto [passed, detail] = fn();
      checks.push_back(check_entry(id, passed, detail));
    } catch (const std::exception& e) {
      checks.push_back(check_entry(id, false, std::string("exception: ") + e.what()));
    }
  };

  std::shared_ptr<const SpectralModel> model;
  run("model_build", [&]() -> std::pair<bool, std::string> {
    model = build_from_config(cfg);
    return {true, manifold_name(cfg.manifold) + " J=" + std::to_string(cfg.J)};
  });

  WeightSequence weight = WeightSequence::factorial_power(1.0);
  run("weight_stability", [&]() -> std::pair<bool, std::string> {
    weight = make_weight(cfg);
    const long horizon = std::min<long>(20, weight.k_max() / 2);
    if (horizon < 2) return {true, "table too short for the condition scan"};
    const auto rep = verify_conditions(weight, horizon);
    return {rep.m0.passed && rep.m1.passed,
            "A=" + fmt(std::exp(rep.m1.log_A)) + " H=" + fmt(std::exp(rep.m1.log_H))};
  });

  if (model) {
    run("multiplicity_growth", [&]() -> std::pair<bool, std::string> {
      const auto weyl = weyl_multiplicity_check(*model);
      return {weyl.stable, "sup " + fmt(weyl.sup)};
    });

    if (!model->data_only() && model->total_dim() <= kGramCap) {
      run("orthonormality", [&]() -> std::pair<bool, std::string> {
        const double gram = gram_residual(*model);
        return {gram < 1e-10, "max residual " + fmt(gram)};
      });
      run("reconstruction", [&]() -> std::pair<bool, std::string> {
        double worst = 0.0, worst_p = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
          const CoeffArray c = seeded_coeffs(model, model->J(), cfg.seed + rep);
          const Samples f = synthesize(c);
          const CoeffArray back = analyze(model, f);
          for (long l = 0; l < c.J(); ++l)
            for (std::size_t i = 0; i < c.blocks[static_cast<std::size_t>(l)].size();
                 ++i)
              worst = std::max(worst,
                               std::abs(c.blocks[static_cast<std::size_t>(l)][i] -
                                        back.blocks[static_cast<std::size_t>(l)][i]));
          worst_p = std::max(worst_p, plancherel_residual(model, f));
        }
        return {worst < 1e-10 && worst_p < 1e-8,
                "roundtrip " + fmt(worst) + ", energy gap " + fmt(worst_p)};
      });
    }

    run("block_norm_inequalities", [&]() -> std::pair<bool, std::string> {
      const double inf = std::numeric_limits<double>::infinity();
      long violations = 0;
      double worst = inf;
      for (int d : {2, 4, 8})
        for (auto [p, q] :
             {std::pair<double, double>{1.0, 2.0}, {1.0, inf}, {2.0, inf}}) {
          const auto rep = norm_inequality_check(d, p, q, 300, cfg.seed);
          violations += rep.violations;
          worst = std::min(worst, rep.worst_slack);
        }
      return {violations == 0, "worst slack " + fmt(worst)};
    });

    run("transpose_adjointness", [&]() -> std::pair<bool, std::string> {
      const long K = std::min<long>(8, model->J());
      double worst = 0.0;
      for (int rep = 0; rep < 10; ++rep) {
        std::mt19937_64 rng(cfg.seed + 77 * rep);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<std::vector<std::vector<cplx>>> blocks(static_cast<std::size_t>(K));
        for (long k = 0; k < K; ++k) {
          blocks[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(K));
          for (long j = 0; j < K; ++j) {
            auto& b = blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            b.resize(static_cast<std::size_t>(
                model->mults()[static_cast<std::size_t>(k)] *
                model->mults()[static_cast<std::size_t>(j)]));
            for (auto& z : b) z = cplx(gauss(rng), gauss(rng));
          }
        }
        const TensorRep t = TensorRep::create(model, model, K, K, std::move(blocks));
        const TensorRep tt = adjoint_transpose(adjoint_transpose(t));
        for (long k = 0; k < K; ++k)
          for (long j = 0; j < K; ++j)
            if (t.block(k, j) != tt.block(k, j))
              return {false, "transpose is not an involution"};
        const auto adj = adjointness_residual(t, seeded_coeffs(model, K, cfg.seed + rep),
                                              seeded_coeffs(model, K, cfg.seed - rep));
        worst = std::max(worst, adj.residual);
      }
      return {worst < 1e-12, "worst residual " + fmt(worst)};
    });

    run("pairing_partials", [&]() -> std::pair<bool, std::string> {
      const long J = std::min<long>(16, model->J());
      const auto a = seeded_coeffs(model, J, cfg.seed + 5);
      const auto b = seeded_coeffs(model, J, cfg.seed + 6);
      const auto rep = pairing(a, b);
      for (std::size_t i = 1; i < rep.abs_partial_sums.size(); ++i)
        if (rep.abs_partial_sums[i] < rep.abs_partial_sums[i - 1])
          return {false, "partial sums decreased"};
      return {true, std::to_string(rep.abs_partial_sums.size()) + " partials"};
    });

    run("trivial_zero_classification", [&]() -> std::pair<bool, std::string> {
      std::vector<std::vector<cplx>> blocks;
      for (long l = 0; l < model->J(); ++l)
        blocks.emplace_back(
            static_cast<std::size_t>(model->mults()[static_cast<std::size_t>(l)]),
            cplx(0.0));
      const auto zero = CoeffArray::create(model, std::move(blocks));
      const auto env =
          classify(zero, weight, DecayClass::gevrey_roumieu, cfg.grid, cfg.tolerance);
      return {env.trivial && env.cls == DecayClass::gevrey_roumieu, "vacuous member"};
    });
  }

  bool passed = true;
  for (const auto& c : checks) passed = passed && c.at("passed").get<bool>();

  json report;
  report["command"] = "verify";
  report["config_hash"] = hash_hex(fnv1a_hash(cfg.raw));
  report["checks"] = std::move(checks);
  report["passed"] = passed;
  write_text_file(out / "verify_report.json", report.dump(2) + "\n");

  std::vector<std::string> human;
  for (const auto& c : report.at("checks"))
    human.push_back(std::string(c.at("passed").get<bool>() ? "[pass] " : "[FAIL] ") +
                    c.at("id").get<std::string>() + ": " +
                    c.at("detail").get<std::string>());
  human.push_back(passed ? "verify: all checks passed" : "verify: FAILURES present");
  emit(report, human);
  return passed ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Eigenfunction-expansion toolkit: spectra, decay classification, block "
      "tensors. KOMATSU_THREADS caps worker threads."};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--config", opt.config_path, "JSON run configuration");
  app.add_option("--out", opt.out_dir, "output directory (overrides config)");
  app.add_option("--seed", opt.seed, "RNG seed (overrides config)");
  app.add_flag("--allow-alias", opt.allow_alias,
               "downgrade the aliasing guard to a warning");

  auto* spectra = app.add_subcommand("spectra", "model diagnostics and invariants");
  auto* classify = app.add_subcommand("classify", "decay-class membership of a function");
  auto* tensor = app.add_subcommand("tensor", "operator tensor build and reports");
  auto* verify = app.add_subcommand("verify", "cross-module property suite");
  for (auto* sub : {spectra, classify, tensor, verify}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (spectra->parsed()) return cmd_spectra(opt);
    if (classify->parsed()) return cmd_classify(opt);
    if (tensor->parsed()) return cmd_tensor(opt);
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump(2) << "\n";
    return kExitUnresolvedInput;
  }
  return kExitUnresolvedInput;
}
