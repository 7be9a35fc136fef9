#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "platelab/lab.hpp"

namespace platelab {

// ---------------------------------------------------------------------------
// Tables

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(int v) { return std::to_string(v); }

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("table: row width does not match the header");
  for (auto& cell : row)
    for (char& ch : cell)
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

void Table::write_csv(const std::string& path) const {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << csv();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into place at '" + path + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Recovery sequence

namespace {

Idx3 node_of(const BoxGrid& omega, int node) { return omega.node_index(node); }

double boundary_distance(const BoxGrid& omega, const Idx3& idx) {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < omega.dim(); ++a) {
    const double x = idx[a] * omega.spacing(a);
    d = std::min({d, x, omega.hi(a) - omega.lo(a) - x});
  }
  return d;
}

// One pass of the clipped box average with half-width k[a] nodes along each axis.
std::vector<double> box_average(const BoxGrid& omega, const std::vector<double>& v, const Idx3& k) {
  const int m = omega.dim();
  std::vector<double> cur = v;
  for (int a = 0; a < m; ++a) {
    std::vector<double> next(cur.size());
    for (int node = 0; node < omega.num_nodes(); ++node) {
      Idx3 idx = node_of(omega, node);
      const int c = idx[a];
      const int lo = std::max(0, c - k[a]);
      const int hi = std::min(omega.cells(a), c + k[a]);
      double s = 0.0;
      for (int t = lo; t <= hi; ++t) {
        idx[a] = t;
        s += cur[omega.node_id(idx)];
      }
      next[node] = s / (hi - lo + 1);
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> mollify(const BoxGrid& omega, std::vector<double> v, double r) {
  Idx3 k{0, 0, 0};
  for (int a = 0; a < omega.dim(); ++a)
    k[a] = std::max(1, static_cast<int>(std::floor(r / (6.0 * omega.spacing(a)))));
  for (int node = 0; node < omega.num_nodes(); ++node)
    if (boundary_distance(omega, node_of(omega, node)) < r) v[node] = 0.0;
  for (int pass = 0; pass < 3; ++pass) v = box_average(omega, v, k);
  for (int node = 0; node < omega.num_nodes(); ++node)
    if (boundary_distance(omega, node_of(omega, node)) < 0.5 * omega.spacing(0)) v[node] = 0.0;
  return v;
}

double max_gradient(const BoxGrid& omega, const std::vector<double>& v) {
  double g = 0.0;
  for (int node = 0; node < omega.num_nodes(); ++node) {
    const Idx3 idx = node_of(omega, node);
    for (int a = 0; a < omega.dim(); ++a) {
      if (idx[a] == omega.cells(a)) continue;
      Idx3 j = idx;
      ++j[a];
      g = std::max(g, std::abs(v[omega.node_id(j)] - v[node]) / omega.spacing(a));
    }
  }
  return g;
}

}  // namespace

RecoveryField recovery_sequence(const KLState& s, const LameParams& p, double rho, double smoothing_scale,
                                int layers) {
  require_valid_lame(p);
  s.validate();
  if (p.n != s.n) throw std::invalid_argument("recovery: dimension mismatch");
  if (!(rho > 0.0)) throw std::invalid_argument("recovery: rho must be positive");
  if (!(smoothing_scale > 0.0)) throw std::invalid_argument("recovery: smoothing scale must be positive");
  const BoxGrid& omega = s.omega();
  const int m = omega.dim();
  double spacing = 0.0;
  for (int a = 0; a < m; ++a) spacing = std::max(spacing, omega.spacing(a));
  if (smoothing_scale < spacing)
    throw std::invalid_argument("recovery: smoothing radius " + fmt(smoothing_scale) +
                                " is below the grid spacing " + fmt(spacing));

  const double kappa = p.lambda / (p.lambda + 2.0 * p.mu);
  std::vector<double> t1(omega.num_nodes(), 0.0), t2(omega.num_nodes(), 0.0);
  std::vector<int> count(omega.num_nodes(), 0);
  const Vec3 centre = Vec3::Constant(0.5);
  for (int cell = 0; cell < omega.num_cells(); ++cell) {
    const Eigen::Matrix3d G = s.fields.gradient(cell, centre);
    double div = 0.0, lap = 0.0;
    for (int a = 0; a < m; ++a) {
      div += G(s.ubar_comp(a), a);
      lap += G(s.grad_comp(a), a);
    }
    for (int k = 0; k < omega.corners(); ++k) {
      const int node = omega.corner_node(cell, k);
      t1[node] += -kappa * div;
      t2[node] += -kappa * lap;
      ++count[node];
    }
  }
  for (int node = 0; node < omega.num_nodes(); ++node) {
    t1[node] /= count[node];
    t2[node] /= count[node];
  }

  RecoveryField r;
  r.smoothing = smoothing_scale;
  r.h1 = mollify(omega, t1, smoothing_scale);
  r.h2 = mollify(omega, t2, smoothing_scale);
  r.shear_audit = rho * std::max(max_gradient(omega, r.h1), max_gradient(omega, r.h2));

  const BoxGrid plate = plate_grid(omega, layers);
  r.field = kl_lift(s, plate);
  const int n = s.n;
  for (int cell = 0; cell < plate.num_cells(); ++cell)
    for (int k = 0; k < plate.corners(); ++k) {
      Idx3 idx = plate.node_index(plate.corner_node(cell, k));
      const double xn = plate.lo(n - 1) + idx[n - 1] * plate.spacing(n - 1);
      idx[n - 1] = 0;
      const int node = omega.node_id(idx);
      r.field.at(cell, k, n - 1) += rho * rho * xn * (r.h1[node] - 0.5 * xn * r.h2[node]);
    }
  return r;
}

SmoothingRule parse_smoothing_rule(const std::string& name) {
  if (name == "sqrt_rho") return SmoothingRule::sqrt_rho;
  if (name == "rho_squared") return SmoothingRule::rho_squared;
  throw std::invalid_argument("unknown smoothing rule '" + name + "' (expected sqrt_rho or rho_squared)");
}

namespace {

void check_rhos(const std::vector<double>& rhos) {
  if (rhos.empty()) throw std::invalid_argument("rho list is empty");
  for (size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0) || !std::isfinite(rhos[i])) throw std::invalid_argument("rho values must be positive");
    if (i > 0 && !(rhos[i] < rhos[i - 1])) throw std::invalid_argument("rho list must be strictly decreasing");
  }
}

double relative(double gap, double ref) { return ref != 0.0 ? gap / std::abs(ref) : gap; }

}  // namespace

RecoverySweep recovery_sweep(const KLState& s, const LameParams& p, const std::vector<double>& rhos, int layers,
                             SmoothingRule rule) {
  check_rhos(rhos);
  const double limit = limit_energy(s, p).total;
  double spacing = 0.0;
  for (int a = 0; a < s.omega().dim(); ++a) spacing = std::max(spacing, s.omega().spacing(a));
  RecoverySweep sw;
  for (double rho : rhos) {
    RecoveryRow row;
    row.rho = rho;
    row.limit = limit;
    row.smoothing = rule == SmoothingRule::sqrt_rho ? std::sqrt(rho) : rho * rho;
    if (row.smoothing < spacing) {
      row.resolved = false;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.energy = row.gap = row.rel_gap = row.alpha_n_norm = row.nn_norm = nan;
      row.alpha_n_bound = row.nn_bound = nan;
      row.shear_audit = rho / row.smoothing;
      sw.rows.push_back(row);
      continue;
    }
    const RecoveryField rf = recovery_sequence(s, p, rho, row.smoothing, layers);
    const BulkTerms bt = bulk_terms(rf.field, p, rho);
    row.energy = bt.total() + surface_term(rf.field, rho);
    row.gap = std::abs(row.energy - limit);
    row.rel_gap = relative(row.gap, limit);
    row.shear_audit = rf.shear_audit;
    row.alpha_n_norm = bt.alpha_n_norm;
    row.nn_norm = bt.nn_norm;
    row.alpha_n_bound = rho * std::sqrt(2.0 * row.energy);
    row.nn_bound = rho * rho * std::sqrt(2.0 * row.energy);
    sw.rows.push_back(row);
  }
  for (size_t i = 0; i < sw.rows.size(); ++i) {
    const RecoveryRow& r = sw.rows[i];
    if (!r.resolved) {
      sw.converged = false;
      continue;
    }
    if (r.alpha_n_norm > r.alpha_n_bound * (1.0 + 1e-12) + 1e-15 || r.nn_norm > r.nn_bound * (1.0 + 1e-12) + 1e-15)
      sw.compactness_holds = false;
    if (i > 0) {
      const RecoveryRow& q = sw.rows[i - 1];
      if (q.resolved && r.gap > q.gap * (1.0 + 1e-9) + 1e-14) sw.gap_nonincreasing = false;
      if (r.shear_audit > q.shear_audit * (1.0 + 1e-9) + 1e-14) sw.converged = false;
    }
  }
  if (!sw.gap_nonincreasing) sw.converged = false;
  return sw;
}

Table RecoverySweep::table() const {
  Table t;
  t.header = {"rho", "smoothing", "resolved", "energy", "limit", "gap", "rel_gap", "shear_audit",
              "alpha_n_norm", "nn_norm", "alpha_n_bound", "nn_bound"};
  for (const auto& r : rows)
    t.add_row({fmt(r.rho), fmt(r.smoothing), fmt(r.resolved ? 1 : 0), fmt(r.energy), fmt(r.limit), fmt(r.gap),
               fmt(r.rel_gap), fmt(r.shear_audit), fmt(r.alpha_n_norm), fmt(r.nn_norm), fmt(r.alpha_n_bound),
               fmt(r.nn_bound)});
  return t;
}

// ---------------------------------------------------------------------------
// Lower-bound probe

ProbeSequence parse_probe_sequence(const std::string& name) {
  if (name == "recovery") return ProbeSequence::recovery;
  if (name == "constant") return ProbeSequence::constant;
  if (name == "tilted") return ProbeSequence::tilted;
  throw std::invalid_argument("unknown probe sequence '" + name + "' (expected recovery, constant or tilted)");
}

LiminfProbe liminf_probe(ProbeSequence kind, const KLState& s, const LameParams& p, const std::vector<double>& rhos,
                         int layers) {
  check_rhos(rhos);
  const EnergyBreakdown limit = limit_energy(s, p);
  const BoxGrid plate = plate_grid(s.omega(), layers);
  const int n = s.n;
  LiminfProbe pr;
  pr.min_margin = std::numeric_limits<double>::infinity();
  for (double rho : rhos) {
    NodalField v;
    if (kind == ProbeSequence::recovery) {
      v = recovery_sequence(s, p, rho, std::sqrt(rho), layers).field;
    } else {
      v = kl_lift(s, plate);
      if (kind == ProbeSequence::tilted) {
        Vec3 mid = 0.5 * (s.omega().lo() + s.omega().hi());
        mid[n - 1] = 0.0;
        const int oc = s.omega().locate(mid).first;
        Idx3 idx = s.omega().cell_index(oc);
        idx[n - 1] = layers / 2;
        v.broken[plate.face_id(n - 1, idx)] = 1;
      }
    }
    const EnergyBreakdown e = rescaled_energy(v, p, rho);
    LiminfRow row;
    row.rho = rho;
    row.energy = e.total;
    row.limit = limit.total;
    row.margin = e.total - limit.total;
    row.surface_margin = e.surface - limit.surface;
    pr.min_margin = std::min(pr.min_margin, row.margin);
    pr.rows.push_back(row);
  }
  return pr;
}

Table LiminfProbe::table() const {
  Table t;
  t.header = {"rho", "energy", "limit", "margin", "surface_margin"};
  for (const auto& r : rows)
    t.add_row({fmt(r.rho), fmt(r.energy), fmt(r.limit), fmt(r.margin), fmt(r.surface_margin)});
  return t;
}

// ---------------------------------------------------------------------------
// Convergence of minima

namespace {

// Smallest reduced energy over configurations with exactly one crack or release.
double best_single_break(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i < omega.cells(0); ++i) best = std::min(best, solve_limit(g, p, omega, {i}, {}).energy.total);
  for (int side = 0; side < 2; ++side) best = std::min(best, solve_limit(g, p, omega, {}, {side}).energy.total);
  return best;
}

}  // namespace

MinimaSweep minima_sweep(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega, int layers,
                         const std::vector<double>& rhos, const SolverConfig& cfg) {
  check_rhos(rhos);
  const LimitResult limit = minimize_limit(g, p, omega, cfg);
  const double intact = limit.trace.front().total;
  const double cracked = (limit.crack_nodes.empty() && limit.released_sides.empty())
                             ? best_single_break(g, p, omega)
                             : limit.energy.total;
  const bool tie = std::abs(intact - cracked) <= 1e-6 * std::max(1.0, std::abs(intact));
  const BoxGrid plate = plate_grid(omega, layers);
  const NodalField lifted = kl_lift(limit.state, plate);
  const double delta = 1e-3 * std::max(1.0, g.scale(omega));
  double face_area = 0.0;
  for (int f = 0; f < plate.num_faces(); ++f)
    if (plate.face_info(f).first < plate.dim() - 1) face_area = std::max(face_area, plate.face_area(f));

  MinimaSweep sw;
  for (double rho : rhos) {
    MinimaRow row;
    row.rho = rho;
    row.energy_0 = limit.energy.total;
    row.surface_0 = limit.energy.surface + limit.energy.boundary_penalty;
    row.face_area = face_area;
    row.tie = tie;
    try {
      const MinimizeResult r = alternate_minimize(g, p, rho, plate, cfg);
      row.energy_rho = r.energy.total;
      row.surface_rho = r.energy.surface + r.energy.boundary_penalty;
      row.rounds = r.rounds;
      row.converged = r.converged;
      const Vec3 c = Vec3::Constant(0.5);
      for (int cell = 0; cell < plate.num_cells(); ++cell)
        if ((r.field.value(cell, c) - lifted.value(cell, c)).norm() > delta) row.distance += plate.cell_volume();
    } catch (const SolverFailure& e) {
      row.error = e.what();
      row.converged = false;
      row.energy_rho = row.surface_rho = row.distance = std::numeric_limits<double>::quiet_NaN();
    }
    row.gap = std::abs(row.energy_rho - row.energy_0);
    row.rel_gap = relative(row.gap, row.energy_0);
    row.surface_gap = std::abs(row.surface_rho - row.surface_0);
    sw.rows.push_back(row);
  }
  return sw;
}

Table MinimaSweep::table() const {
  Table t;
  t.header = {"rho",         "energy_rho", "energy_0",  "gap",      "rel_gap", "surface_rho", "surface_0",
              "surface_gap", "face_area",  "distance",  "rounds",   "converged", "tie",       "error"};
  for (const auto& r : rows)
    t.add_row({fmt(r.rho), fmt(r.energy_rho), fmt(r.energy_0), fmt(r.gap), fmt(r.rel_gap), fmt(r.surface_rho),
               fmt(r.surface_0), fmt(r.surface_gap), fmt(r.face_area), fmt(r.distance), fmt(r.rounds),
               fmt(r.converged ? 1 : 0), fmt(r.tie ? 1 : 0), r.error});
  return t;
}

}  // namespace platelab
