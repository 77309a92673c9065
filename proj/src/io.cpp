#include "komatsu/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace komatsu {

namespace {

using json = nlohmann::ordered_json;

constexpr long kLabelExportCap = 10000;

json complex_pair(const cplx& z) { return json::array({z.real(), z.imag()}); }

cplx pair_to_complex(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json model_descriptor(const SpectralModel& model) {
  json d;
  d["manifold"] = manifold_name(model.manifold());
  d["J"] = model.J();
  d["lambdas"] = model.lambdas();
  d["mults"] = model.mults();
  d["quadrature_size"] = model.data_only() ? -1 : model.quadrature_size();
  if (model.total_dim() <= kLabelExportCap) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(model.total_dim()));
    for (long l = 0; l < model.J(); ++l)
      for (int k = 1; k <= model.mults()[static_cast<std::size_t>(l)]; ++k)
        labels.push_back(model.basis_label(l, k));
    d["labels"] = labels;
  }
  return d;
}

std::shared_ptr<const SpectralModel> descriptor_to_model(const json& d) {
  const Manifold m = manifold_from_name(d.at("manifold").get<std::string>());
  const long J = d.at("J").get<long>();
  const long qs = d.at("quadrature_size").get<long>();
  auto model = build_model(m, J, qs < 0 ? kNoQuadrature : qs);
  const auto lambdas = d.at("lambdas").get<std::vector<double>>();
  const auto mults = d.at("mults").get<std::vector<int>>();
  if (lambdas != model->lambdas() || mults != model->mults())
    throw std::invalid_argument("model descriptor disagrees with the rebuilt spectrum");
  if (d.contains("labels")) {
    const auto labels = d.at("labels").get<std::vector<std::string>>();
    std::size_t i = 0;
    for (long l = 0; l < model->J(); ++l)
      for (int k = 1; k <= model->mults()[static_cast<std::size_t>(l)]; ++k) {
        if (i >= labels.size() || labels[i] != model->basis_label(l, k))
          throw std::invalid_argument("model descriptor carries foreign basis labels");
        ++i;
      }
  }
  return model;
}

json blocks_to_json(const std::vector<std::vector<cplx>>& blocks) {
  json arr = json::array();
  for (const auto& b : blocks) {
    json row = json::array();
    for (const cplx& z : b) row.push_back(complex_pair(z));
    arr.push_back(std::move(row));
  }
  return arr;
}

std::vector<std::vector<cplx>> blocks_from_json(const json& arr) {
  if (!arr.is_array()) throw std::invalid_argument("blocks: array expected");
  std::vector<std::vector<cplx>> blocks;
  blocks.reserve(arr.size());
  for (const auto& row : arr) {
    std::vector<cplx> b;
    b.reserve(row.size());
    for (const auto& e : row) b.push_back(pair_to_complex(e));
    blocks.push_back(std::move(b));
  }
  return blocks;
}

void csv_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string model_to_json(const SpectralModel& model) {
  return model_descriptor(model).dump(2) + "\n";
}

std::shared_ptr<const SpectralModel> model_from_json(const std::string& text) {
  return descriptor_to_model(json::parse(text));
}

std::string coeffs_to_json(const CoeffArray& u) {
  json d;
  d["model"] = model_descriptor(*u.model);
  d["blocks"] = blocks_to_json(u.blocks);
  return d.dump(2) + "\n";
}

CoeffArray coeffs_from_json(const std::string& text) {
  const json d = json::parse(text);
  auto model = descriptor_to_model(d.at("model"));
  return CoeffArray::create(std::move(model), blocks_from_json(d.at("blocks")));
}

std::string tensor_to_json(const TensorRep& t) {
  json d;
  d["in_model"] = model_descriptor(*t.in_model);
  d["out_model"] = model_descriptor(*t.out_model);
  d["K"] = t.K;
  d["J"] = t.J;
  json blocks = json::array();
  for (long k = 0; k < t.K; ++k) {
    json row = json::array();
    for (long j = 0; j < t.J; ++j) {
      json m = json::array();
      for (const cplx& z : t.block(k, j)) m.push_back(complex_pair(z));
      row.push_back(std::move(m));
    }
    blocks.push_back(std::move(row));
  }
  d["blocks"] = std::move(blocks);
  return d.dump(2) + "\n";
}

TensorRep tensor_from_json(const std::string& text) {
  const json d = json::parse(text);
  auto in_model = descriptor_to_model(d.at("in_model"));
  auto out_model = descriptor_to_model(d.at("out_model"));
  const long K = d.at("K").get<long>();
  const long J = d.at("J").get<long>();
  const json& arr = d.at("blocks");
  if (!arr.is_array()) throw std::invalid_argument("tensor blocks: array expected");
  std::vector<std::vector<std::vector<cplx>>> blocks;
  blocks.reserve(arr.size());
  for (const auto& row : arr) {
    std::vector<std::vector<cplx>> r;
    r.reserve(row.size());
    for (const auto& m : row) {
      std::vector<cplx> b;
      b.reserve(m.size());
      for (const auto& e : m) b.push_back(pair_to_complex(e));
      r.push_back(std::move(b));
    }
    blocks.push_back(std::move(r));
  }
  return TensorRep::create(std::move(in_model), std::move(out_model), K, J,
                           std::move(blocks));
}

std::string decay_curve_csv(const CoeffArray& u, const WeightSequence* w,
                            const DecayEnvelope* env) {
  const double nu = u.model->order();
  const bool enveloped =
      env != nullptr && !env->trivial &&
      (env->cls == DecayClass::analytic || env->cls == DecayClass::gevrey_roumieu ||
       env->cls == DecayClass::gevrey_beurling ||
       env->cls == DecayClass::alpha_dual_roumieu ||
       env->cls == DecayClass::alpha_dual_beurling);
  const bool growth = env != nullptr && (env->cls == DecayClass::alpha_dual_roumieu ||
                                         env->cls == DecayClass::alpha_dual_beurling);

  std::vector<double> ms;
  if (enveloped) {
    std::vector<double> xs;
    for (long l = 1; l < u.J(); ++l)
      xs.push_back(std::pow(u.model->lambdas()[static_cast<std::size_t>(l)], 1.0 / nu));
    if (env->cls == DecayClass::analytic) {
      ms.resize(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) ms[i] = env->L * xs[i];
    } else {
      if (w == nullptr)
        throw std::invalid_argument("decay_curve_csv: weight required for the envelope");
      ms = associated_function_profile(*w, nu, env->L, xs);
    }
  }

  std::string out = "l,lambda,lambda^{1/nu},hs_norm,log_hs_norm,envelope_value\n";
  for (long l = 0; l < u.J(); ++l) {
    const double lam = u.model->lambdas()[static_cast<std::size_t>(l)];
    const double x = std::pow(lam, 1.0 / nu);
    const double h = hs_norm(u.blocks[static_cast<std::size_t>(l)]);
    double envv = 0.0;
    if (enveloped) {
      const double m = l == 0 ? 0.0 : ms[static_cast<std::size_t>(l - 1)];
      envv = env->C * std::exp(growth ? m : -m);
    }
    out += std::to_string(l);
    out += ',';
    csv_number(out, lam);
    out += ',';
    csv_number(out, x);
    out += ',';
    csv_number(out, h);
    out += ',';
    csv_number(out, std::log(h));
    out += ',';
    csv_number(out, envv);
    out += '\n';
  }
  return out;
}

std::string block_norm_csv(const TensorRep& t) {
  std::string out = "k,j,frob_norm\n";
  for (long k = 0; k < t.K; ++k)
    for (long j = 0; j < t.J; ++j) {
      double s = 0.0;
      for (const cplx& z : t.block(k, j)) s += std::norm(z);
      out += std::to_string(k);
      out += ',';
      out += std::to_string(j);
      out += ',';
      csv_number(out, std::sqrt(s));
      out += '\n';
    }
  return out;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

RunConfig parse_config(const std::string& text) {
  const json d = json::parse(text);
  if (!d.is_object()) throw std::invalid_argument("config: object expected");
  RunConfig cfg;
  cfg.raw = text;

  if (d.contains("manifold"))
    cfg.manifold = manifold_from_name(d.at("manifold").get<std::string>());
  if (d.contains("J")) cfg.J = d.at("J").get<long>();
  if (cfg.J < 1) throw std::invalid_argument("config: J must be >= 1");
  if (d.contains("quadrature_size")) {
    cfg.quadrature_size = d.at("quadrature_size").get<long>();
    if (cfg.quadrature_size < -1)
      throw std::invalid_argument("config: bad quadrature_size");
  }

  if (d.contains("weight")) {
    const json& w = d.at("weight");
    const std::string kind = w.at("kind").get<std::string>();
    if (kind == "gevrey") {
      cfg.weight_s = w.at("s").get<double>();
      if (!(cfg.weight_s > 0.0)) throw std::invalid_argument("config: weight s <= 0");
    } else if (kind == "tabulated") {
      cfg.weight_tabulated = true;
      cfg.weight_log_values = w.at("log_values").get<std::vector<double>>();
    } else {
      throw std::invalid_argument("config: weight kind must be gevrey or tabulated");
    }
  }
  if (d.contains("variant")) {
    const std::string v = d.at("variant").get<std::string>();
    if (v == "roumieu")
      cfg.variant = Variant::roumieu;
    else if (v == "beurling")
      cfg.variant = Variant::beurling;
    else
      throw std::invalid_argument("config: variant must be roumieu or beurling");
  }

  if (d.contains("L_grid")) {
    const json& g = d.at("L_grid");
    if (g.contains("min")) cfg.grid.min = g.at("min").get<double>();
    if (g.contains("max")) cfg.grid.max = g.at("max").get<double>();
    if (g.contains("points")) cfg.grid.points = g.at("points").get<int>();
    (void)cfg.grid.values();  // validates
  }
  if (d.contains("tolerance")) {
    cfg.tolerance = d.at("tolerance").get<double>();
    if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("config: tolerance <= 0");
  }
  if (d.contains("summability_q")) {
    cfg.summability_q = d.at("summability_q").get<double>();
    if (cfg.summability_q < 0.0) throw std::invalid_argument("config: summability_q < 0");
  }

  if (d.contains("input")) {
    const json& in = d.at("input");
    int sources = 0;
    if (in.contains("builtin")) {
      cfg.builtin = in.at("builtin").get<std::string>();
      ++sources;
      if (in.contains("params"))
        cfg.builtin_params =
            in.at("params").get<std::map<std::string, double>>();
    }
    if (in.contains("coeff_file")) {
      cfg.coeff_file = in.at("coeff_file").get<std::string>();
      ++sources;
    }
    if (in.contains("sample_file")) {
      cfg.sample_file = in.at("sample_file").get<std::string>();
      ++sources;
    }
    if (sources != 1)
      throw std::invalid_argument(
          "config: input needs exactly one of builtin, coeff_file, sample_file");
  }
  if (d.contains("classes"))
    for (const auto& c : d.at("classes"))
      cfg.classes.push_back(decay_class_from_name(c.get<std::string>()));

  if (d.contains("operator")) {
    const json& op = d.at("operator");
    cfg.op_name = op.at("name").get<std::string>();
    if (op.contains("K")) cfg.op_K = op.at("K").get<long>();
    if (op.contains("J")) cfg.op_J = op.at("J").get<long>();
    if (cfg.op_K < 1 || cfg.op_J < 1)
      throw std::invalid_argument("config: operator truncations must be >= 1");
  }

  if (d.contains("out")) cfg.out_dir = d.at("out").get<std::string>();
  if (d.contains("seed")) cfg.seed = d.at("seed").get<std::uint64_t>();
  return cfg;
}

WeightSequence make_weight(const RunConfig& cfg) {
  if (cfg.weight_tabulated)
    return WeightSequence::from_log_values(cfg.weight_log_values, cfg.variant);
  return WeightSequence::factorial_power(cfg.weight_s, cfg.variant);
}

}  // namespace komatsu
