#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "komatsu/coeff_space.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

// Synthetic coefficient families with closed-form block profiles. The value
// sits on the first entry of each block (the zonal entry on sphere2); the
// other entries are zero. x denotes lambda^{1/nu}.
//
//   poisson      {a}    exp(-a x)                       default a = 0.5
//   gevrey_decay {a, s} exp(-a x^{1/s})                 defaults a = 1, s = 1
//   subgevrey    {c}    exp(-c log(1+lambda)^2)         default c = 1
//   dual_growth  {a}    exp(+a x)                       default a = 0.3
//   envelope     {L0}   exp(-M(L0 x)), supplied weight  default L0 = 1
//   exp_log      {}     exp(-x log(1+x))
bool is_builtin_family(const std::string& name);
const std::vector<std::string>& builtin_family_names();

// J < 0 takes every block of the model. envelope requires a weight; the
// other families ignore it. Unknown parameter keys are rejected.
CoeffArray builtin_coeffs(const std::string& name,
                          const std::map<std::string, double>& params,
                          std::shared_ptr<const SpectralModel> model, long J = -1,
                          const WeightSequence* weight = nullptr);

}  // namespace komatsu
