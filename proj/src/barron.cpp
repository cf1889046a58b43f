#include "gclab/barron.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "gclab/conv.hpp"
#include "gclab/error.hpp"
#include "gclab/fmt.hpp"
#include "gclab/kernels.hpp"
#include "gclab/rng.hpp"
#include "json.hpp"

namespace gclab::barron {

namespace {

double ramp(double t) { return t > 0.0 ? t : 0.0; }

void check_atom_shapes(const spectral::SpectralBasis& basis, const Atom& atom, std::size_t j) {
  const std::size_t n = static_cast<std::size_t>(basis.n);
  if (atom.a.size() != n || atom.b.size() != n || atom.c.size() != n)
    throw InvalidInput("atom " + std::to_string(j) + " has mismatched shapes");
}

// ||a||_* (||b||_co + ||c||) of a raw atom.
double atom_mass(const spectral::SpectralBasis& basis, const Atom& atom,
                 const model::NormConfig& cfg) {
  const double a_dual = linalg::vec_norm(atom.a, cfg.dual_p());
  const double bc = conv::conv_norm(basis, atom.b, cfg.conv_kind, cfg.d3) +
                    linalg::vec_norm(atom.c, cfg.p);
  return a_dual * bc;
}

// a_j^T ramp(b_j * x + c_j).
double atom_feature(const spectral::SpectralBasis& basis, const Atom& atom,
                    const linalg::Vec& x) {
  linalg::Vec conv = conv::convolve(basis, atom.b, x);
  double acc = 0.0;
  for (std::size_t v = 0; v < conv.size(); ++v) acc += atom.a[v] * ramp(conv[v] + atom.c[v]);
  return acc;
}

}  // namespace

NormalizedMeasure normalize_measure(const spectral::SpectralBasis& basis,
                                    const std::vector<Atom>& raw, const model::NormConfig& cfg) {
  if (raw.empty()) throw InvalidInput("measure has no atoms");
  NormalizedMeasure out;
  out.measure.normcfg = cfg;
  std::vector<double> masses;
  long double scale_acc = 0.0L;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    check_atom_shapes(basis, raw[j], j);
    if (!(raw[j].weight > 0.0))
      throw InvalidInput("atom " + std::to_string(j) + " has nonpositive weight");
    const double t = raw[j].weight * atom_mass(basis, raw[j], cfg);
    masses.push_back(t);
    scale_acc += t;
  }
  const double scale = static_cast<double>(scale_acc);
  if (!(scale > 0.0)) throw InvalidInput("every atom of the measure is degenerate");
  out.scale = scale;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (masses[j] == 0.0) continue;  // zero contribution under the exact ramp
    Atom hat;
    const double a_dual = linalg::vec_norm(raw[j].a, cfg.dual_p());
    const double bc = conv::conv_norm(basis, raw[j].b, cfg.conv_kind, cfg.d3) +
                      linalg::vec_norm(raw[j].c, cfg.p);
    hat.a = raw[j].a;
    for (double& v : hat.a) v /= a_dual;
    hat.b = raw[j].b;
    for (double& v : hat.b) v /= bc;
    hat.c = raw[j].c;
    for (double& v : hat.c) v /= bc;
    hat.weight = masses[j] / scale;
    out.measure.atoms.push_back(std::move(hat));
  }
  return out;
}

void check_measure(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure) {
  if (measure.atoms.empty()) throw InvalidInput("measure has no atoms");
  long double wsum = 0.0L;
  for (std::size_t j = 0; j < measure.atoms.size(); ++j) {
    const Atom& atom = measure.atoms[j];
    check_atom_shapes(basis, atom, j);
    if (!(atom.weight > 0.0))
      throw InvalidInput("atom " + std::to_string(j) + " has nonpositive weight");
    wsum += atom.weight;
    const double a_dual = linalg::vec_norm(atom.a, measure.normcfg.dual_p());
    const double bc = conv::conv_norm(basis, atom.b, measure.normcfg.conv_kind,
                                      measure.normcfg.d3) +
                      linalg::vec_norm(atom.c, measure.normcfg.p);
    if (std::fabs(a_dual - 1.0) > 1e-10 || std::fabs(bc - 1.0) > 1e-10)
      throw InvalidInput("atom " + std::to_string(j) + " is not on the unit spheres");
  }
  if (std::fabs(static_cast<double>(wsum) - 1.0) > 1e-12)
    throw InvalidInput("atom weights do not sum to 1");
}

double eval_barron(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure,
                   double scale, const linalg::Vec& x) {
  if (x.size() != static_cast<std::size_t>(basis.n))
    throw InvalidInput("signal length does not match graph order");
  double acc = 0.0;
  for (std::size_t j = 0; j < measure.atoms.size(); ++j) {
    check_atom_shapes(basis, measure.atoms[j], j);
    acc += measure.atoms[j].weight * atom_feature(basis, measure.atoms[j], x);
  }
  return scale * acc;
}

model::NetworkParams sample_network(const DiscreteBarronMeasure& measure, double scale, int m,
                                    std::uint64_t seed) {
  if (m < 1) throw InvalidInput("network width must be at least 1");
  if (measure.atoms.empty()) throw InvalidInput("measure has no atoms");
  std::vector<double> cumulative;
  cumulative.reserve(measure.atoms.size());
  double acc = 0.0;
  for (const Atom& atom : measure.atoms) {
    acc += atom.weight;
    cumulative.push_back(acc);
  }
  Rng rng(seed);
  model::NetworkParams params;
  params.mode = model::ConvMode::spectral_signal;
  params.degree = 0;
  params.activation = model::Activation::relu;
  params.neurons.reserve(m);
  for (int i = 0; i < m; ++i) {
    const Atom& atom = measure.atoms[rng.pick(cumulative)];
    model::Neuron nu;
    nu.a = atom.a;
    for (double& v : nu.a) v *= scale;
    nu.b = atom.b;
    nu.c = atom.c;
    params.neurons.push_back(std::move(nu));
  }
  return params;
}

std::vector<ApproxRateRow> approx_rate_experiment(const spectral::SpectralBasis& basis,
                                                  const DiscreteBarronMeasure& measure,
                                                  double scale, const std::vector<int>& m_list,
                                                  int trials, int s_eval, std::uint64_t seed) {
  if (m_list.empty()) throw InvalidInput("empty width list");
  for (int m : m_list)
    if (m < 1) throw InvalidInput("network widths must be at least 1");
  if (trials < 10) throw InvalidInput("need at least 10 trials");
  if (s_eval < 1) throw InvalidInput("evaluation set must not be empty");
  if (measure.atoms.empty()) throw InvalidInput("measure has no atoms");

  const int n = basis.n;
  Rng rng(seed);
  std::vector<linalg::Vec> xs(s_eval, linalg::Vec(n));
  for (linalg::Vec& x : xs)
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
  std::vector<std::uint64_t> net_seeds(m_list.size() * trials);
  for (std::uint64_t& sd : net_seeds) sd = rng.next_u64();

  // One shared transform of the evaluation set serves every sampled network,
  // and the represented function itself evaluated as a width-J network.
  const kernels::BatchData data =
      kernels::make_batch(basis, xs, model::ConvMode::spectral_signal, 0);
  model::NetworkParams target;
  target.mode = model::ConvMode::spectral_signal;
  target.activation = model::Activation::relu;
  const double j_count = static_cast<double>(measure.atoms.size());
  for (const Atom& atom : measure.atoms) {
    model::Neuron nu;
    nu.a = atom.a;
    for (double& v : nu.a) v *= scale * atom.weight * j_count;
    nu.b = atom.b;
    nu.c = atom.c;
    target.neurons.push_back(std::move(nu));
  }
  const linalg::Vec f_target = kernels::batch_forward(basis, target, data);

  std::vector<ApproxRateRow> rows;
  for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
    const int m = m_list[mi];
    std::vector<double> errs(trials, 0.0);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < trials; ++t) {
      model::NetworkParams net =
          sample_network(measure, scale, m, net_seeds[mi * trials + t]);
      linalg::Vec f = kernels::batch_forward_serial(basis, net, data);
      double err = 0.0;
      for (int i = 0; i < s_eval; ++i) {
        const double d = f[i] - f_target[i];
        err += d * d;
      }
      errs[t] = err / s_eval;
    }
    ApproxRateRow row;
    row.m = m;
    double mean = 0.0;
    for (int t = 0; t < trials; ++t) mean += errs[t];
    row.mean_sq_err = mean / trials;
    row.bound = scale * scale / m;
    rows.push_back(row);
  }
  return rows;
}

std::string approx_table_csv(const std::vector<ApproxRateRow>& rows) {
  std::string out = "m,mean_sq_err,bound\n";
  for (const ApproxRateRow& r : rows) {
    out += std::to_string(r.m);
    out += ',';
    out += fmt::format_double(r.mean_sq_err);
    out += ',';
    out += fmt::format_double(r.bound);
    out += '\n';
  }
  return out;
}

double rkhs_kernel(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure,
                   const linalg::Vec& x, const linalg::Vec& xp) {
  if (x.size() != static_cast<std::size_t>(basis.n) || xp.size() != x.size())
    throw InvalidInput("signal length does not match graph order");
  double acc = 0.0;
  for (std::size_t j = 0; j < measure.atoms.size(); ++j) {
    const Atom& atom = measure.atoms[j];
    check_atom_shapes(basis, atom, j);
    acc += atom.weight * atom_feature(basis, atom, x) * atom_feature(basis, atom, xp);
  }
  return acc;
}

linalg::Mat rkhs_gram(const spectral::SpectralBasis& basis, const DiscreteBarronMeasure& measure,
                      const std::vector<linalg::Vec>& xs, bool parallel) {
  if (measure.atoms.empty()) throw InvalidInput("measure has no atoms");
  const int s = static_cast<int>(xs.size());
  if (s == 0) throw InvalidInput("empty point set");
  const int n = basis.n;
  for (const linalg::Vec& x : xs)
    if (x.size() != static_cast<std::size_t>(n))
      throw InvalidInput("signal length does not match graph order");
  const int j_count = static_cast<int>(measure.atoms.size());
  // phi(j, i) = a_j^T ramp(b_j * x_i + c_j); entries are independent, so the
  // parallel fill matches the serial one bitwise.
  linalg::Mat phi(j_count, s);
  for (int j = 0; j < j_count; ++j) {
    const Atom& atom = measure.atoms[j];
    check_atom_shapes(basis, atom, static_cast<std::size_t>(j));
    const linalg::Vec beta = spectral::gft(basis, atom.b);
    const double* u = basis.u.data();
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < s; ++i) {
      const linalg::Vec xh = spectral::gft(basis, xs[i]);
      double feat = 0.0;
      for (int v = 0; v < n; ++v) {
        double pre = atom.c[v];
        const double* urow = u + static_cast<std::size_t>(v) * n;
        for (int f = 0; f < n; ++f) pre += urow[f] * beta[f] * xh[f];
        feat += atom.a[v] * ramp(pre);
      }
      phi(j, i) = feat;
    }
  }
  linalg::Mat gram(s, s);
  for (int i1 = 0; i1 < s; ++i1) {
    for (int i2 = i1; i2 < s; ++i2) {
      double acc = 0.0;
      for (int j = 0; j < j_count; ++j)
        acc += measure.atoms[j].weight * phi(j, i1) * phi(j, i2);
      gram(i1, i2) = acc;
      gram(i2, i1) = acc;
    }
  }
  return gram;
}

NormalizedMeasure random_measure(const spectral::SpectralBasis& basis, int atom_count,
                                 const model::NormConfig& cfg, std::uint64_t seed) {
  if (atom_count < 1) throw InvalidInput("need at least one atom");
  Rng rng(seed);
  std::vector<Atom> raw(atom_count);
  for (Atom& atom : raw) {
    atom.a.resize(basis.n);
    atom.b.resize(basis.n);
    atom.c.resize(basis.n);
    for (double& v : atom.a) v = rng.uniform(-1.0, 1.0);
    for (double& v : atom.b) v = rng.uniform(-1.0, 1.0);
    for (double& v : atom.c) v = rng.uniform(-1.0, 1.0);
    atom.weight = rng.uniform(0.1, 1.0);
  }
  return normalize_measure(basis, raw, cfg);
}

namespace {

using nlohmann::json;

json p_to_json(double p) {
  if (std::isinf(p)) return json("inf");
  return json(p);
}

double p_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw InvalidInput("norm order must be 1, 2 or \"inf\"");
  }
  return j.get<double>();
}

const char* kind_name(conv::ConvNormKind kind) {
  switch (kind) {
    case conv::ConvNormKind::coop1: return "coop1";
    case conv::ConvNormKind::coop2: return "coop2";
    case conv::ConvNormKind::coop_inf: return "coop_inf";
    case conv::ConvNormKind::cofi: return "cofi";
  }
  throw InvalidInput("unknown convolution norm kind");
}

conv::ConvNormKind kind_from_name(const std::string& s) {
  if (s == "coop1") return conv::ConvNormKind::coop1;
  if (s == "coop2") return conv::ConvNormKind::coop2;
  if (s == "coop_inf") return conv::ConvNormKind::coop_inf;
  if (s == "cofi") return conv::ConvNormKind::cofi;
  throw InvalidInput("unknown convolution norm kind '" + s + "'");
}

}  // namespace

std::string to_json(const DiscreteBarronMeasure& measure) {
  json j;
  j["normcfg"] = {{"p", p_to_json(measure.normcfg.p)},
                  {"conv_kind", kind_name(measure.normcfg.conv_kind)},
                  {"d0", measure.normcfg.d0},
                  {"d1", measure.normcfg.d1},
                  {"d2", measure.normcfg.d2},
                  {"d3", measure.normcfg.d3}};
  json atoms = json::array();
  for (const Atom& atom : measure.atoms)
    atoms.push_back(
        {{"a", atom.a}, {"b", atom.b}, {"c", atom.c}, {"weight", atom.weight}});
  j["atoms"] = std::move(atoms);
  return j.dump(2);
}

DiscreteBarronMeasure measure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad measure JSON: ") + e.what());
  }
  try {
    DiscreteBarronMeasure m;
    const json& cfg = j.at("normcfg");
    m.normcfg.p = p_from_json(cfg.at("p"));
    m.normcfg.conv_kind = kind_from_name(cfg.at("conv_kind").get<std::string>());
    m.normcfg.d0 = cfg.value("d0", 1.0);
    m.normcfg.d1 = cfg.value("d1", 1.0);
    m.normcfg.d2 = cfg.value("d2", 1.0);
    m.normcfg.d3 = cfg.value("d3", 1.0);
    for (const json& ja : j.at("atoms")) {
      Atom atom;
      atom.a = ja.at("a").get<linalg::Vec>();
      atom.b = ja.at("b").get<linalg::Vec>();
      atom.c = ja.at("c").get<linalg::Vec>();
      atom.weight = ja.at("weight").get<double>();
      m.atoms.push_back(std::move(atom));
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad measure JSON: ") + e.what());
  }
}

}  // namespace gclab::barron
