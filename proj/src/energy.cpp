#include "platelab/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "platelab/parallel.hpp"

namespace platelab {

EnergyBreakdown& EnergyBreakdown::finalize() {
  total = bulk + surface + boundary_penalty;
  return *this;
}

std::string EnergyBreakdown::csv_header() { return "rho,bulk,surface,penalty,total"; }

std::string EnergyBreakdown::csv_row() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g", rho, bulk, surface, boundary_penalty, total);
  return buf;
}

namespace {

constexpr int kChunks = 64;

// Deterministic reduction: fixed chunking, chunk sums added in order.
template <class F>
std::array<double, 4> reduce_cells(int cells, F&& per_cell) {
  const int chunks = std::min(kChunks, std::max(1, cells));
  std::vector<std::array<double, 4>> part(chunks, {0.0, 0.0, 0.0, 0.0});
  parallel_for(static_cast<size_t>(chunks), [&](size_t k) {
    const int begin = static_cast<int>(static_cast<long long>(cells) * k / chunks);
    const int end = static_cast<int>(static_cast<long long>(cells) * (k + 1) / chunks);
    for (int c = begin; c < end; ++c) {
      const auto v = per_cell(c);
      for (int i = 0; i < 4; ++i) part[k][i] += v[i];
    }
  });
  std::array<double, 4> sum{0.0, 0.0, 0.0, 0.0};
  for (const auto& p : part)
    for (int i = 0; i < 4; ++i) sum[i] += p[i];
  return sum;
}

}  // namespace

BulkTerms bulk_terms(const NodalField& u, const LameParams& p, double rho) {
  require_valid_lame(p);
  if (!(rho > 0.0)) throw std::invalid_argument("bulk_terms: rho must be positive");
  const BoxGrid& g = u.grid;
  const int n = g.dim();
  if (n != p.n || u.components != n) throw std::invalid_argument("bulk_terms: field dimension mismatch");
  const CellQuadrature q = gauss2(n);
  const Vec3 center = Vec3::Constant(0.5);
  const double vol = g.cell_volume();
  const int last = n - 1;
  const double s1 = 1.0 / rho;
  const double s2 = 1.0 / (rho * rho);

  const auto sum = reduce_cells(g.num_cells(), [&](int cell) {
    std::array<double, 4> r{0.0, 0.0, 0.0, 0.0};
    for (size_t k = 0; k < q.points.size(); ++k) {
      const Eigen::Matrix3d G = u.gradient(cell, q.points[k]);
      double tr = 0.0;
      double diag = 0.0;
      for (int i = 0; i < n; ++i) {
        const double eii = G(i, i) * (i == last ? s2 : 1.0);
        tr += eii;
        diag += eii * eii;
      }
      double shear = 0.0;
      for (int i = 0; i < last; ++i)
        for (int j = i + 1; j < last; ++j) {
          const double eij = 0.5 * (G(i, j) + G(j, i));
          shear += eij * eij;
        }
      r[0] += q.weights[k] * (p.lambda * tr * tr + 2.0 * p.mu * diag + 4.0 * p.mu * shear);
      r[3] += q.weights[k] * G(last, last) * G(last, last);
    }
    const Eigen::Matrix3d Gc = u.gradient(cell, center);
    double mixed = 0.0;
    for (int a = 0; a < last; ++a) {
      const double e = 0.5 * (Gc(a, last) + Gc(last, a));
      mixed += e * e;
    }
    r[1] = 4.0 * p.mu * mixed * s1 * s1;
    r[2] = mixed;
    for (double& v : r) v *= vol;
    return r;
  });
  BulkTerms t;
  t.gauss_part = 0.5 * sum[0];
  t.transverse_part = 0.5 * sum[1];
  t.alpha_n_norm = std::sqrt(sum[2]);
  t.nn_norm = std::sqrt(sum[3]);
  return t;
}

double surface_term(const NodalField& u, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("surface_term: rho must be positive");
  const BoxGrid& g = u.grid;
  const int n = g.dim();
  double s = 0.0;
  for (int f = 0; f < g.num_faces(); ++f) {
    if (!u.broken[f] || g.is_boundary_face(f)) continue;
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
    nu[g.face_info(f).first] = 1.0;
    s += g.face_area(f) * phi_rho(rho, nu);
  }
  return s;
}

EnergyBreakdown griffith_energy(const NodalField& u, const LameParams& p) {
  EnergyBreakdown e;
  e.bulk = bulk_terms(u, p, 1.0).total();
  e.surface = surface_term(u, 1.0);
  return e.finalize();
}

EnergyBreakdown rescaled_energy(const NodalField& v, const LameParams& p, double rho) {
  EnergyBreakdown e;
  e.rho = rho;
  e.bulk = bulk_terms(v, p, rho).total();
  e.surface = surface_term(v, rho);
  return e.finalize();
}

double change_of_variables_check(const NodalField& u, const LameParams& p, double rho) {
  const double f = griffith_energy(u, p).total;
  const double e = rescaled_energy(rescale_displacement(u, rho), p, rho).total;
  const double gap = std::abs(f - rho * e);
  if (f == 0.0) return gap == 0.0 ? 0.0 : gap;
  return gap / f;
}

EnergyBreakdown limit_energy(const KLState& s, const LameParams& p) {
  require_valid_lame(p);
  if (p.n != s.n) throw std::invalid_argument("limit_energy: dimension mismatch");
  const BoxGrid& g = s.omega();
  const int m = s.n - 1;
  const CellQuadrature q = gauss2(m);
  const double vol = g.cell_volume();
  const auto sum = reduce_cells(g.num_cells(), [&](int cell) {
    std::array<double, 4> r{0.0, 0.0, 0.0, 0.0};
    for (size_t k = 0; k < q.points.size(); ++k) {
      const Eigen::Matrix3d G = s.fields.gradient(cell, q.points[k]);
      SymMatrix E(m);
      SymMatrix H(m);
      for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
          E.set(a, b, 0.5 * (G(s.ubar_comp(a), b) + G(s.ubar_comp(b), a)));
          H.set(a, b, 0.5 * (G(s.grad_comp(a), b) + G(s.grad_comp(b), a)));
        }
      r[0] += q.weights[k] * (quadratic_form_C0(p, E) + quadratic_form_C0(p, H) / 12.0);
    }
    r[0] *= 0.5 * vol;
    return r;
  });
  EnergyBreakdown e;
  e.bulk = sum[0];
  e.surface = s.crack_measure();
  return e.finalize();
}

// ---------------------------------------------------------------------------
// Boundary data

Eigen::VectorXd BoundaryDatum::displacement(const Vec3& x) const {
  Vec3 xp = x;
  xp[n - 1] = 0.0;
  for (int a = n; a < 3; ++a) xp[a] = 0.0;
  const double xn = x[n - 1];
  const Eigen::VectorXd ub = ubar(xp);
  const Eigen::VectorXd gr = grad_un(xp);
  Eigen::VectorXd u(n);
  for (int a = 0; a < n - 1; ++a) u[a] = ub[a] - xn * gr[a];
  u[n - 1] = un(xp);
  return u;
}

KLState BoundaryDatum::sample(const BoxGrid& omega) const {
  auto wrap = [](const std::function<Eigen::VectorXd(const Vec3&)>& f) {
    return SidedFieldFn([f](const Vec3& x, const Vec3&) { return f(x); });
  };
  auto fn = un;
  SidedFieldFn w([fn](const Vec3& x, const Vec3&) { return Eigen::VectorXd::Constant(1, fn(x)); });
  return KLState::from_functions(n, omega, wrap(ubar), w, wrap(grad_un));
}

NodalField BoundaryDatum::lift(const BoxGrid& plate) const {
  return NodalField::sample(plate, n, FieldFn([this](const Vec3& x) { return displacement(x); }));
}

double BoundaryDatum::scale(const BoxGrid& omega) const { return sample(omega).scale(); }

BoundaryDatum BoundaryDatum::zero(int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("BoundaryDatum: n must be 2 or 3");
  BoundaryDatum g;
  g.n = n;
  g.name = "zero";
  g.ubar = [n](const Vec3&) { return Eigen::VectorXd::Zero(n - 1); };
  g.un = [](const Vec3&) { return 0.0; };
  g.grad_un = [n](const Vec3&) { return Eigen::VectorXd::Zero(n - 1); };
  return g;
}

BoundaryDatum BoundaryDatum::stretch(int n, double t) {
  BoundaryDatum g = zero(n);
  g.name = "stretch:" + std::to_string(t);
  g.ubar = [n, t](const Vec3& x) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
    v[0] = t * x[0];
    return v;
  };
  return g;
}

BoundaryDatum BoundaryDatum::bend(int n, double k) {
  BoundaryDatum g = zero(n);
  g.name = "bend:" + std::to_string(k);
  g.un = [k](const Vec3& x) { return 0.5 * k * x[0] * x[0]; };
  g.grad_un = [n, k](const Vec3& x) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
    v[0] = k * x[0];
    return v;
  };
  return g;
}

BoundaryDatum BoundaryDatum::rigid(int n, double c) {
  BoundaryDatum g = zero(n);
  g.name = "rigid:" + std::to_string(c);
  g.ubar = [n, c](const Vec3&) { return Eigen::VectorXd::Constant(n - 1, c); };
  g.un = [c](const Vec3&) { return c; };
  return g;
}

BoundaryDatum BoundaryDatum::parse(int n, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  double value = 0.0;
  if (colon != std::string::npos) {
    const std::string num = spec.substr(colon + 1);
    size_t used = 0;
    try {
      value = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) throw std::invalid_argument("datum: bad parameter in '" + spec + "'");
  }
  if (kind == "zero" && colon == std::string::npos) return zero(n);
  if (colon == std::string::npos) throw std::invalid_argument("datum: '" + spec + "' needs a parameter (kind:value)");
  if (kind == "stretch") return stretch(n, value);
  if (kind == "bend") return bend(n, value);
  if (kind == "rigid") return rigid(n, value);
  throw std::invalid_argument("datum: unknown kind '" + kind + "' (expected zero, stretch, bend or rigid)");
}

double trace_tolerance(double scale) { return 1e-9 * std::max(1.0, scale); }

namespace {

// Corners of `cell` lying on its face (axis, side).
std::vector<int> face_corners(const BoxGrid& g, int axis, int side) {
  std::vector<int> out;
  for (int k = 0; k < g.corners(); ++k)
    if (((k >> axis) & 1) == side) out.push_back(k);
  return out;
}

}  // namespace

std::vector<char> boundary_mismatch(const NodalField& u, const BoundaryDatum& g) {
  const BoxGrid& grid = u.grid;
  const int n = grid.dim();
  if (n != g.n || u.components != n) throw std::invalid_argument("boundary_penalty: dimension mismatch");
  std::vector<char> bad(grid.num_faces(), 0);
  struct Probe {
    int face;
    int cell;
    int corner;
    Eigen::VectorXd target;
  };
  std::vector<Probe> probes;
  double scale = 0.0;
  for (int f = 0; f < grid.num_faces(); ++f) {
    if (!grid.is_boundary_face(f)) continue;
    auto [axis, idx] = grid.face_info(f);
    if (axis == n - 1) continue;
    auto [below, above] = grid.face_cells(f);
    const int cell = below >= 0 ? below : above;
    const int side = below >= 0 ? 1 : 0;
    for (int k : face_corners(grid, axis, side)) {
      Probe pr{f, cell, k, g.displacement(grid.corner_position(cell, k))};
      scale = std::max(scale, pr.target.lpNorm<Eigen::Infinity>());
      for (int c = 0; c < n; ++c) scale = std::max(scale, std::abs(u.at(cell, k, c)));
      probes.push_back(std::move(pr));
    }
  }
  const double tol = trace_tolerance(scale);
  for (const auto& pr : probes)
    for (int c = 0; c < n; ++c)
      if (std::abs(u.at(pr.cell, pr.corner, c) - pr.target[c]) > tol) bad[pr.face] = 1;
  return bad;
}

double boundary_penalty(const NodalField& u, const BoundaryDatum& g) {
  const auto bad = boundary_mismatch(u, g);
  double area = 0.0;
  for (int f = 0; f < u.grid.num_faces(); ++f)
    if (bad[f]) area += u.grid.face_area(f);
  return area;
}

double boundary_penalty(const KLState& s, const BoundaryDatum& g) {
  if (s.n != g.n) throw std::invalid_argument("boundary_penalty: dimension mismatch");
  const BoxGrid& grid = s.omega();
  const KLState target = g.sample(grid);
  const double tol = trace_tolerance(std::max(target.scale(), s.scale()));
  double area = 0.0;
  for (int f = 0; f < grid.num_faces(); ++f) {
    if (!grid.is_boundary_face(f)) continue;
    auto [axis, idx] = grid.face_info(f);
    auto [below, above] = grid.face_cells(f);
    const int cell = below >= 0 ? below : above;
    const int side = below >= 0 ? 1 : 0;
    bool bad = false;
    for (int k : face_corners(grid, axis, side))
      for (int c = 0; c < s.fields.components; ++c)
        if (std::abs(s.fields.at(cell, k, c) - target.fields.at(cell, k, c)) > tol) bad = true;
    if (bad) area += grid.face_area(f);
  }
  return area;
}

EnergyBreakdown penalized_energy(const NodalField& v, const LameParams& p, double rho, const BoundaryDatum& g) {
  EnergyBreakdown e = rescaled_energy(v, p, rho);
  e.boundary_penalty = boundary_penalty(v, g);
  return e.finalize();
}

EnergyBreakdown penalized_energy(const KLState& s, const LameParams& p, const BoundaryDatum& g) {
  EnergyBreakdown e = limit_energy(s, p);
  e.boundary_penalty = boundary_penalty(s, g);
  return e.finalize();
}

}  // namespace platelab
