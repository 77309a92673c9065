#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "komatsu/coeff_space.hpp"
#include "komatsu/spectral_model.hpp"
#include "komatsu/tensor_ops.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

// Model descriptor: {manifold, J, lambdas, mults, quadrature_size} plus the
// basis labels (omitted above 10000 basis functions). quadrature_size -1
// stands for a data-only model. Parsing rebuilds the model and verifies the
// stored spectrum against it.
std::string model_to_json(const SpectralModel& model);
std::shared_ptr<const SpectralModel> model_from_json(const std::string& text);

// Coefficient file: {model: descriptor, blocks: [[re, im] pairs per block]}.
std::string coeffs_to_json(const CoeffArray& u);
CoeffArray coeffs_from_json(const std::string& text);

// Tensor file: {in_model, out_model, K, J, blocks: row-major complex
// matrices as [re, im] pairs}.
std::string tensor_to_json(const TensorRep& t);
TensorRep tensor_from_json(const std::string& text);

// Decay curve: columns l, lambda, lambda^{1/nu}, hs_norm, log_hs_norm,
// envelope_value. The envelope column traces the fitted bound when the
// envelope carries one (zero otherwise).
std::string decay_curve_csv(const CoeffArray& u, const WeightSequence* w,
                            const DecayEnvelope* env);

// Sparsity heatmap data: columns k, j, frob_norm.
std::string block_norm_csv(const TensorRep& t);

std::uint64_t fnv1a_hash(const std::string& text);
std::string hash_hex(std::uint64_t h);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Batch-run configuration. Exactly one of builtin / coeff_file /
// sample_file identifies the input function; all may be empty for commands
// that generate their own operands.
struct RunConfig {
  Manifold manifold = Manifold::circle;
  long J = 60;
  long quadrature_size = 0;  // 0 auto, -1 data-only

  bool weight_tabulated = false;
  double weight_s = 1.0;
  std::vector<double> weight_log_values;
  Variant variant = Variant::roumieu;

  LGrid grid;
  double tolerance = 0.5;
  double summability_q = 0.0;  // 0: use the manifold dimension

  std::string builtin;
  std::map<std::string, double> builtin_params;
  std::string coeff_file;
  std::string sample_file;
  std::vector<DecayClass> classes;  // empty: report the best class

  std::string op_name;  // laplacian | derivative | multiply
  long op_K = 8;
  long op_J = 8;

  std::string out_dir = "out";
  std::uint64_t seed = 12345;
  std::string raw;  // original config text, hashed into reports
};

RunConfig parse_config(const std::string& text);
WeightSequence make_weight(const RunConfig& cfg);

}  // namespace komatsu
