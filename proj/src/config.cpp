#include "platelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace platelab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Lists accept commas and/or whitespace as separators.
std::vector<std::string> split_list(const std::string& v) {
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& t : split_list(v)) out.push_back(to_double(key, t));
  if (out.empty()) throw std::invalid_argument("config: '" + key + "' expects at least one number");
  return out;
}

const std::vector<std::pair<std::string, std::string>>& key_docs() {
  static const std::vector<std::pair<std::string, std::string>> docs = {
      {"experiment", "classify | jump-energy | approximate | projection | recover | liminf | minimize"},
      {"n", "ambient dimension, 2 or 3"},
      {"omega_lo, omega_hi", "mid-surface box corners (n-1 numbers each)"},
      {"cells", "in-plane cell counts of the plate grid (n-1 integers)"},
      {"layers", "cells across the thickness"},
      {"h", "lattice spacings; each a power-of-two fraction of the coarsest"},
      {"rho", "thickness parameters, strictly decreasing"},
      {"lambda, mu", "Lame parameters"},
      {"crack", "crack file: one simplex per line, n*n coordinates"},
      {"datum", "boundary datum: zero | stretch:t | bend:k | rigid:c"},
      {"state", "reduced state: membrane:t | crack:t:position:jump | bend:k | file:PATH"},
      {"output", "CSV output path"},
      {"seed", "global seed"},
      {"samples", "lattice offsets per study"},
      {"domain_lo, domain_hi", "sampling box U of the approximant"},
      {"region_lo, region_hi", "region V of the approximant"},
      {"offset", "lattice offset y for approximate/projection"},
      {"delta", "mismatch threshold"},
      {"jump_position", "x_1 position of the jump of the approximate test field"},
      {"projection_axis", "projection direction e_k (default n-1)"},
      {"smoothing", "recovery smoothing rule: sqrt_rho | rho_squared"},
      {"sequence", "liminf family: recovery | constant | tilted"},
      {"cg_tol", "linear solver tolerance"},
      {"cg_max_iter", "iteration cap of the iterative solver"},
      {"altmin_max_rounds", "alternation round cap"},
      {"activation_rule", "cell_energy_release"},
      {"linear_solver", "direct | cg"},
      {"activation_mode", "columns | faces"},
      {"exhaustive", "run the small-crack exhaustive sweep after alternation (true/false)"},
      {"max_exhaustive", "largest crack count of the exhaustive sweep"},
  };
  return docs;
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "experiment") c.experiment = v;
  else if (key == "n") {
    c.n = static_cast<int>(to_int(key, v));
    const size_t m = c.n > 1 ? static_cast<size_t>(c.n - 1) : 1;
    c.omega_lo.resize(m, c.omega_lo.front());
    c.omega_hi.resize(m, c.omega_hi.front());
    c.cells.resize(m, c.cells.front());
  }
  else if (key == "omega_lo") c.omega_lo = to_doubles(key, v);
  else if (key == "omega_hi") c.omega_hi = to_doubles(key, v);
  else if (key == "cells") {
    c.cells.clear();
    for (const auto& t : split_list(v)) c.cells.push_back(static_cast<int>(to_int(key, t)));
  } else if (key == "layers") c.layers = static_cast<int>(to_int(key, v));
  else if (key == "h") c.h = to_doubles(key, v);
  else if (key == "rho") c.rho = to_doubles(key, v);
  else if (key == "lambda") c.lambda = to_double(key, v);
  else if (key == "mu") c.mu = to_double(key, v);
  else if (key == "crack") c.crack = v;
  else if (key == "datum") c.datum = v;
  else if (key == "state") c.state = v;
  else if (key == "output") c.output = v;
  else if (key == "seed") {
    const long long s = to_int(key, v);
    if (s < 0) throw std::invalid_argument("config: 'seed' must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "samples") c.samples = static_cast<int>(to_int(key, v));
  else if (key == "domain_lo") c.domain_lo = to_doubles(key, v);
  else if (key == "domain_hi") c.domain_hi = to_doubles(key, v);
  else if (key == "region_lo") c.region_lo = to_doubles(key, v);
  else if (key == "region_hi") c.region_hi = to_doubles(key, v);
  else if (key == "offset") c.offset = to_doubles(key, v);
  else if (key == "delta") c.delta = to_double(key, v);
  else if (key == "jump_position") c.jump_position = to_double(key, v);
  else if (key == "projection_axis") c.projection_axis = static_cast<int>(to_int(key, v));
  else if (key == "smoothing") c.smoothing = v;
  else if (key == "sequence") c.sequence = v;
  else if (key == "cg_tol") c.solver.cg_tol = to_double(key, v);
  else if (key == "cg_max_iter") c.solver.cg_max_iter = static_cast<int>(to_int(key, v));
  else if (key == "altmin_max_rounds") c.solver.altmin_max_rounds = static_cast<int>(to_int(key, v));
  else if (key == "activation_rule") c.solver.activation_rule = v;
  else if (key == "linear_solver") {
    if (v == "direct") c.solver.linear = SolverConfig::Linear::direct;
    else if (v == "cg") c.solver.linear = SolverConfig::Linear::cg;
    else throw std::invalid_argument("config: 'linear_solver' must be direct or cg");
  } else if (key == "activation_mode") {
    if (v == "columns") c.solver.mode = SolverConfig::Mode::columns;
    else if (v == "faces") c.solver.mode = SolverConfig::Mode::faces;
    else throw std::invalid_argument("config: 'activation_mode' must be columns or faces");
  } else if (key == "exhaustive") c.solver.exhaustive = to_bool(key, v);
  else if (key == "max_exhaustive") c.solver.max_exhaustive = static_cast<int>(to_int(key, v));
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      apply_setting(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

std::string config_help() {
  std::ostringstream os;
  for (const auto& [k, d] : key_docs()) os << "  " << k << std::string(k.size() < 22 ? 22 - k.size() : 1, ' ') << d << '\n';
  return os.str();
}

void ExperimentConfig::validate() const {
  if (n != 2 && n != 3) throw std::invalid_argument("config: 'n' must be 2 or 3");
  const size_t m = static_cast<size_t>(n - 1);
  if (omega_lo.size() != m || omega_hi.size() != m)
    throw std::invalid_argument("config: 'omega_lo'/'omega_hi' need n-1 entries");
  for (size_t a = 0; a < m; ++a)
    if (!(omega_hi[a] > omega_lo[a])) throw std::invalid_argument("config: omega box is empty");
  if (cells.size() != m) throw std::invalid_argument("config: 'cells' needs n-1 entries");
  for (int c : cells)
    if (c < 1) throw std::invalid_argument("config: 'cells' must be positive");
  if (layers < 1) throw std::invalid_argument("config: 'layers' must be positive");
  if (h.empty()) throw std::invalid_argument("config: 'h' is empty");
  const double coarse = *std::max_element(h.begin(), h.end());
  for (double x : h) {
    if (!(x > 0.0)) throw std::invalid_argument("config: 'h' values must be positive");
    const double k = std::log2(coarse / x);
    if (std::abs(k - std::round(k)) > 1e-9)
      throw std::invalid_argument("config: 'h' values must be power-of-two fractions of the coarsest");
  }
  if (rho.empty()) throw std::invalid_argument("config: 'rho' is empty");
  for (size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) throw std::invalid_argument("config: 'rho' values must be positive");
    if (i > 0 && !(rho[i] < rho[i - 1])) throw std::invalid_argument("config: 'rho' must be strictly decreasing");
  }
  require_valid_lame(lame());
  if (samples < 1) throw std::invalid_argument("config: 'samples' must be positive");
  auto check_vec = [&](const std::vector<double>& v, const char* name) {
    if (!v.empty() && v.size() != static_cast<size_t>(n))
      throw std::invalid_argument(std::string("config: '") + name + "' needs n entries");
  };
  check_vec(domain_lo, "domain_lo");
  check_vec(domain_hi, "domain_hi");
  check_vec(region_lo, "region_lo");
  check_vec(region_hi, "region_hi");
  check_vec(offset, "offset");
  if (!(delta > 0.0)) throw std::invalid_argument("config: 'delta' must be positive");
  if (projection_axis >= n) throw std::invalid_argument("config: 'projection_axis' out of range");
  solver.validate();
}

LameParams ExperimentConfig::lame() const { return LameParams{lambda, mu, n}; }

BoxGrid ExperimentConfig::omega() const {
  Idx3 c{1, 1, 1};
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  for (int a = 0; a < n - 1; ++a) {
    c[a] = cells[a];
    lo[a] = omega_lo[a];
    hi[a] = omega_hi[a];
  }
  return BoxGrid(n - 1, c, lo, hi);
}

BoxGrid ExperimentConfig::plate() const { return plate_grid(omega(), layers); }

Vec3 ExperimentConfig::vec(const std::vector<double>& v, double fill) const {
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < n; ++a) x[a] = v.empty() ? fill : v[a];
  return x;
}

std::uint64_t substream_seed(std::uint64_t seed, const std::string& experiment) {
  static const std::map<std::string, std::uint64_t> offsets = {
      {"classify", 101}, {"jump-energy", 202}, {"approximate", 303}, {"projection", 404},
      {"recover", 505},  {"liminf", 606},      {"minimize", 707}};
  const auto it = offsets.find(experiment);
  return seed + (it == offsets.end() ? 0 : it->second);
}

KLState make_state(const std::string& spec, int n, const BoxGrid& omega) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "file") {
    KLState s = KLState::load(rest);
    if (s.n != n) throw std::invalid_argument("state file '" + rest + "' has the wrong dimension");
    return s;
  }
  std::vector<double> args;
  {
    std::string r = rest;
    std::replace(r.begin(), r.end(), ':', ' ');
    for (const auto& t : split_list(r)) args.push_back(to_double("state", t));
  }
  auto zero = [](int k) { return SidedFieldFn([k](const Vec3&, const Vec3&) { return Eigen::VectorXd::Zero(k); }); };
  if (kind == "membrane" && args.size() == 1) {
    const double t = args[0];
    SidedFieldFn ub([t, n](const Vec3& x, const Vec3&) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
      v[0] = t * x[0];
      return v;
    });
    return KLState::from_functions(n, omega, ub, zero(1), zero(n - 1));
  }
  if (kind == "crack" && args.size() == 3) {
    const double t = args[0], pos = args[1], jump = args[2];
    SidedFieldFn ub([t, pos, jump, n](const Vec3& x, const Vec3& toward) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
      v[0] = t * x[0] + (toward[0] > pos ? jump : 0.0);
      return v;
    });
    KLState s = KLState::from_functions(n, omega, ub, zero(1), zero(n - 1));
    s.add_crack_plane(0, pos);
    return s;
  }
  if (kind == "bend" && args.size() == 1) {
    const double k = args[0];
    SidedFieldFn un([k](const Vec3& x, const Vec3&) { return Eigen::VectorXd::Constant(1, 0.5 * k * x[0] * x[0]); });
    SidedFieldFn gr([k, n](const Vec3& x, const Vec3&) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
      v[0] = k * x[0];
      return v;
    });
    return KLState::from_functions(n, omega, zero(n - 1), un, gr);
  }
  throw std::invalid_argument("unknown state '" + spec +
                              "' (expected membrane:t, crack:t:position:jump, bend:k or file:PATH)");
}

}  // namespace platelab
