#include "komatsu/builtins.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace komatsu {

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument("builtin: unknown parameter '" + key + "'");
  }
}

}  // namespace

const std::vector<std::string>& builtin_family_names() {
  static const std::vector<std::string> names = {
      "poisson", "gevrey_decay", "subgevrey", "dual_growth", "envelope", "exp_log"};
  return names;
}

bool is_builtin_family(const std::string& name) {
  for (const auto& n : builtin_family_names())
    if (n == name) return true;
  return false;
}

CoeffArray builtin_coeffs(const std::string& name,
                          const std::map<std::string, double>& params,
                          std::shared_ptr<const SpectralModel> model, long J,
                          const WeightSequence* weight) {
  if (!model) throw std::invalid_argument("builtin: null model");
  if (J < 0 || J > model->J()) J = model->J();
  if (J == 0) throw std::invalid_argument("builtin: empty truncation");
  const double nu = model->order();

  std::function<double(double)> log_profile;  // of x = lambda^{1/nu}
  if (name == "poisson") {
    reject_unknown(params, {"a"});
    const double a = get_param(params, "a", 0.5);
    if (a <= 0.0) throw std::invalid_argument("poisson: a must be positive");
    log_profile = [a](double x) { return -a * x; };
  } else if (name == "gevrey_decay") {
    reject_unknown(params, {"a", "s"});
    const double a = get_param(params, "a", 1.0);
    const double s = get_param(params, "s", 1.0);
    if (a <= 0.0 || s <= 0.0)
      throw std::invalid_argument("gevrey_decay: a and s must be positive");
    log_profile = [a, s](double x) { return -a * std::pow(x, 1.0 / s); };
  } else if (name == "subgevrey") {
    reject_unknown(params, {"c"});
    const double c = get_param(params, "c", 1.0);
    if (c <= 0.0) throw std::invalid_argument("subgevrey: c must be positive");
    log_profile = [c, nu](double x) {
      const double lg = std::log1p(std::pow(x, nu));
      return -c * lg * lg;
    };
  } else if (name == "dual_growth") {
    reject_unknown(params, {"a"});
    const double a = get_param(params, "a", 0.3);
    if (a <= 0.0) throw std::invalid_argument("dual_growth: a must be positive");
    log_profile = [a](double x) { return a * x; };
  } else if (name == "exp_log") {
    reject_unknown(params, {});
    log_profile = [](double x) { return -x * std::log1p(x); };
  } else if (name == "envelope") {
    reject_unknown(params, {"L0"});
    if (weight == nullptr) throw std::invalid_argument("envelope: weight required");
    const double L0 = get_param(params, "L0", 1.0);
    if (L0 <= 0.0) throw std::invalid_argument("envelope: L0 must be positive");
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(J > 0 ? J - 1 : 0));
    for (long l = 1; l < J; ++l)
      xs.push_back(std::pow(model->lambdas()[static_cast<std::size_t>(l)], 1.0 / nu));
    const std::vector<double> ms = associated_function_profile(*weight, nu, L0, xs);
    std::vector<std::vector<cplx>> blocks(static_cast<std::size_t>(J));
    for (long l = 0; l < J; ++l) {
      const int d = model->mults()[static_cast<std::size_t>(l)];
      blocks[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(d), cplx(0.0, 0.0));
      const double lv = l == 0 ? 0.0 : -ms[static_cast<std::size_t>(l - 1)];
      blocks[static_cast<std::size_t>(l)][0] = std::exp(lv);
    }
    return CoeffArray::create(std::move(model), std::move(blocks));
  } else {
    throw std::invalid_argument("builtin: unknown family '" + name + "'");
  }

  std::vector<std::vector<cplx>> blocks(static_cast<std::size_t>(J));
  for (long l = 0; l < J; ++l) {
    const int d = model->mults()[static_cast<std::size_t>(l)];
    blocks[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(d), cplx(0.0, 0.0));
    const double x = std::pow(model->lambdas()[static_cast<std::size_t>(l)], 1.0 / nu);
    blocks[static_cast<std::size_t>(l)][0] = std::exp(log_profile(x));
  }
  return CoeffArray::create(std::move(model), std::move(blocks));
}

}  // namespace komatsu
