#include "platelab/kirchhoff_love.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace platelab {

namespace {

constexpr double kShapeTol = 1e-12;

int omega_corner(int n, int corner) { return corner & ((1 << (n - 1)) - 1); }

int plate_cell(const BoxGrid& plate, int omega_cell, const BoxGrid& omega, int layer) {
  Idx3 idx = omega.cell_index(omega_cell);
  idx[plate.dim() - 1] = layer;
  return plate.cell_id(idx);
}

Idx3 omega_index_of(const BoxGrid& plate, int cell) {
  Idx3 idx = plate.cell_index(cell);
  idx[plate.dim() - 1] = 0;
  return idx;
}

BoxGrid omega_of(const BoxGrid& plate) {
  const int n = plate.dim();
  if (n < 2) throw std::invalid_argument("plate grid must have dimension at least 2");
  Idx3 cells{1, 1, 1};
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  for (int a = 0; a < n - 1; ++a) {
    cells[a] = plate.cells(a);
    lo[a] = plate.lo(a);
    hi[a] = plate.hi(a);
  }
  return BoxGrid(n - 1, cells, lo, hi);
}

void require_unit_thickness(const BoxGrid& plate, const char* what) {
  const int n = plate.dim();
  if (std::abs(plate.lo(n - 1) + 0.5) > kShapeTol || std::abs(plate.hi(n - 1) - 0.5) > kShapeTol)
    throw std::invalid_argument(std::string(what) + ": plate grid must span x_n in (-1/2, 1/2)");
}

double max_spacing(const BoxGrid& g) {
  double h = 0.0;
  for (int a = 0; a < g.dim(); ++a) h = std::max(h, g.spacing(a));
  return h;
}

double field_scale(const NodalField& f) {
  double s = 0.0;
  for (double v : f.values) s = std::max(s, std::abs(v));
  return s;
}

// Value of component `comp` at node `idx`, read from the cell touching both `idx`
// and the stencil centre `center` (the stencil stays within one cell of it).
double node_value(const NodalField& u, const Idx3& center, const Idx3& idx, int comp) {
  const BoxGrid& g = u.grid;
  Idx3 cell{0, 0, 0};
  int corner = 0;
  for (int a = 0; a < g.dim(); ++a) {
    cell[a] = std::min(idx[a], center[a]);
    corner |= (idx[a] - cell[a]) << a;
  }
  return u.at(g.cell_id(cell), corner, comp);
}

}  // namespace

double fd_tolerance(double h, double scale) { return 10.0 * h * h * std::max(1.0, scale); }

KLState::KLState(int plate_dim, const BoxGrid& omega) : n(plate_dim), fields(omega, 2 * plate_dim - 1) {
  if (plate_dim != 2 && plate_dim != 3) throw std::invalid_argument("KLState: n must be 2 or 3");
  if (omega.dim() != plate_dim - 1) throw std::invalid_argument("KLState: omega grid must have dimension n-1");
}

KLState KLState::from_functions(int plate_dim, const BoxGrid& omega, const SidedFieldFn& ubar,
                                const SidedFieldFn& un, const SidedFieldFn& grad_un) {
  KLState s(plate_dim, omega);
  const int m = plate_dim - 1;
  for (int cell = 0; cell < omega.num_cells(); ++cell) {
    const Vec3 center = omega.cell_center(cell);
    for (int k = 0; k < omega.corners(); ++k) {
      const Vec3 x = omega.corner_position(cell, k);
      const Eigen::VectorXd ub = ubar(x, center);
      const Eigen::VectorXd w = un(x, center);
      const Eigen::VectorXd g = grad_un(x, center);
      if (ub.size() != m || w.size() != 1 || g.size() != m)
        throw std::invalid_argument("KLState::from_functions: evaluator returned wrong size");
      for (int a = 0; a < m; ++a) {
        s.fields.at(cell, k, s.ubar_comp(a)) = ub[a];
        s.fields.at(cell, k, s.grad_comp(a)) = g[a];
      }
      s.fields.at(cell, k, s.un_comp()) = w[0];
    }
  }
  return s;
}

void KLState::add_crack_plane(int axis, double position) {
  const BoxGrid& g = omega();
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("add_crack_plane: axis out of range");
  const double t = (position - g.lo(axis)) / g.spacing(axis);
  const int i = static_cast<int>(std::lround(t));
  if (std::abs(t - i) > 1e-9) throw std::invalid_argument("add_crack_plane: position is not a grid plane");
  if (i <= 0 || i >= g.cells(axis)) throw std::invalid_argument("add_crack_plane: plane must be interior");
  for (int f = 0; f < g.num_faces(); ++f) {
    auto [a, idx] = g.face_info(f);
    if (a == axis && idx[a] == i) fields.broken[f] = 1;
  }
}

void KLState::add_crack_face(int face) {
  if (face < 0 || face >= omega().num_faces()) throw std::invalid_argument("add_crack_face: face out of range");
  if (omega().is_boundary_face(face)) throw std::invalid_argument("add_crack_face: crack faces must be interior");
  fields.broken[face] = 1;
}

std::vector<int> KLState::crack_faces() const {
  std::vector<int> out;
  for (int f = 0; f < omega().num_faces(); ++f)
    if (fields.broken[f]) out.push_back(f);
  return out;
}

double KLState::crack_measure() const {
  double m = 0.0;
  for (int f : crack_faces()) m += omega().face_area(f);
  return m;
}

CrackSurface KLState::crack_lines() const {
  const BoxGrid& g = omega();
  CrackSurface c(g.dim());
  for (int f : crack_faces()) {
    const Vec3 x = g.face_center(f);
    if (g.dim() == 1) {
      c.add({x});
    } else {
      const int axis = g.face_info(f).first;
      const int other = 1 - axis;
      Vec3 a = x;
      Vec3 b = x;
      a[other] -= 0.5 * g.spacing(other);
      b[other] += 0.5 * g.spacing(other);
      c.add_segment(a, b);
    }
  }
  return c;
}

void KLState::validate() const {
  if (fields.components != 2 * n - 1) throw std::invalid_argument("KLState: wrong component count");
  for (double v : fields.values)
    if (!std::isfinite(v)) throw std::invalid_argument("KLState: non-finite nodal value");
  for (int f = 0; f < omega().num_faces(); ++f)
    if (fields.broken[f] && omega().is_boundary_face(f))
      throw std::invalid_argument("KLState: crack lines must lie in the interior of omega");
}

double KLState::gradient_residual() const {
  const BoxGrid& g = omega();
  const Vec3 center = Vec3::Constant(0.5);
  double r = 0.0;
  for (int cell = 0; cell < g.num_cells(); ++cell) {
    if (fields.cell_touches_break(cell)) continue;
    const Eigen::VectorXd v = fields.value(cell, center);
    const Eigen::Matrix3d grad = fields.gradient(cell, center);
    for (int a = 0; a < n - 1; ++a) r = std::max(r, std::abs(grad(un_comp(), a) - v[grad_comp(a)]));
  }
  return r;
}

double KLState::scale() const { return field_scale(fields); }

KLState KLState::combine(double a, const KLState& s1, double b, const KLState& s2) {
  if (s1.n != s2.n || !s1.omega().same_shape(s2.omega()))
    throw std::invalid_argument("KLState::combine: grids differ");
  if (s1.fields.broken != s2.fields.broken) throw std::invalid_argument("KLState::combine: crack lines differ");
  KLState r = s1;
  for (size_t k = 0; k < r.fields.values.size(); ++k)
    r.fields.values[k] = a * s1.fields.values[k] + b * s2.fields.values[k];
  return r;
}

void KLState::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write KL state: " + path);
  const BoxGrid& g = omega();
  out << std::setprecision(17);
  out << "klstate\nn " << n << "\ncells";
  for (int a = 0; a < g.dim(); ++a) out << ' ' << g.cells(a);
  out << "\nlo";
  for (int a = 0; a < g.dim(); ++a) out << ' ' << g.lo(a);
  out << "\nhi";
  for (int a = 0; a < g.dim(); ++a) out << ' ' << g.hi(a);
  out << "\nh";
  for (int a = 0; a < g.dim(); ++a) out << ' ' << g.spacing(a);
  const auto faces = crack_faces();
  out << "\ncrack_faces " << faces.size();
  for (int f : faces) out << ' ' << f;
  out << "\nslots " << g.num_cells() * g.corners() << '\n';
  for (int c = 0; c < g.num_cells(); ++c)
    for (int k = 0; k < g.corners(); ++k) {
      for (int comp = 0; comp < fields.components; ++comp) out << (comp ? " " : "") << fields.at(c, k, comp);
      out << '\n';
    }
}

KLState KLState::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open KL state: " + path);
  auto fail = [&](const std::string& msg) { return std::runtime_error(path + ": " + msg); };
  std::string word;
  int n = 0;
  if (!(in >> word) || word != "klstate") throw fail("missing klstate header");
  if (!(in >> word >> n) || word != "n" || (n != 2 && n != 3)) throw fail("bad dimension line");
  const int m = n - 1;
  Idx3 cells{1, 1, 1};
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  if (!(in >> word) || word != "cells") throw fail("expected cells");
  for (int a = 0; a < m; ++a) in >> cells[a];
  if (!(in >> word) || word != "lo") throw fail("expected lo");
  for (int a = 0; a < m; ++a) in >> lo[a];
  if (!(in >> word) || word != "hi") throw fail("expected hi");
  for (int a = 0; a < m; ++a) in >> hi[a];
  if (!(in >> word) || word != "h") throw fail("expected h");
  for (int a = 0; a < m; ++a) {
    double h;
    in >> h;
  }
  if (!in) throw fail("malformed header");
  KLState s(n, BoxGrid(m, cells, lo, hi));
  size_t count = 0;
  if (!(in >> word >> count) || word != "crack_faces") throw fail("expected crack_faces");
  for (size_t k = 0; k < count; ++k) {
    int f;
    if (!(in >> f)) throw fail("truncated crack face list");
    s.add_crack_face(f);
  }
  int slots = 0;
  if (!(in >> word >> slots) || word != "slots" || slots != s.omega().num_cells() * s.omega().corners())
    throw fail("slot count does not match the grid");
  for (double& v : s.fields.values)
    if (!(in >> v)) throw fail("truncated slot data");
  return s;
}

BoxGrid plate_grid(const BoxGrid& omega, int layers) {
  const int n = omega.dim() + 1;
  if (layers < 1) throw std::invalid_argument("plate_grid: need at least one layer");
  Idx3 cells{1, 1, 1};
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  for (int a = 0; a < n - 1; ++a) {
    cells[a] = omega.cells(a);
    lo[a] = omega.lo(a);
    hi[a] = omega.hi(a);
  }
  cells[n - 1] = layers;
  lo[n - 1] = -0.5;
  hi[n - 1] = 0.5;
  return BoxGrid(n, cells, lo, hi);
}

NodalField kl_lift(const KLState& s, const BoxGrid& plate) {
  const int n = s.n;
  const BoxGrid& omega = s.omega();
  if (plate.dim() != n) throw std::invalid_argument("kl_lift: plate grid dimension mismatch");
  require_unit_thickness(plate, "kl_lift");
  for (int a = 0; a < n - 1; ++a)
    if (plate.cells(a) != omega.cells(a) || std::abs(plate.lo(a) - omega.lo(a)) > kShapeTol ||
        std::abs(plate.hi(a) - omega.hi(a)) > kShapeTol)
      throw std::invalid_argument("kl_lift: plate grid does not match the state's omega grid");
  NodalField u(plate, n);
  for (int cell = 0; cell < plate.num_cells(); ++cell) {
    const int oc = omega.cell_id(omega_index_of(plate, cell));
    for (int k = 0; k < plate.corners(); ++k) {
      const int ok = omega_corner(n, k);
      const double xn = plate.corner_position(cell, k)[n - 1];
      for (int a = 0; a < n - 1; ++a)
        u.at(cell, k, a) = s.fields.at(oc, ok, s.ubar_comp(a)) - xn * s.fields.at(oc, ok, s.grad_comp(a));
      u.at(cell, k, n - 1) = s.fields.at(oc, ok, s.un_comp());
    }
  }
  for (int f : s.crack_faces()) {
    auto [axis, idx] = omega.face_info(f);
    for (int l = 0; l < plate.cells(n - 1); ++l) {
      Idx3 pidx = idx;
      pidx[n - 1] = l;
      u.broken[plate.face_id(axis, pidx)] = 1;
    }
  }
  return u;
}

NodalField kl_average(const NodalField& u) {
  const BoxGrid& plate = u.grid;
  const int n = plate.dim();
  require_unit_thickness(plate, "kl_average");
  if (u.components != n) throw std::invalid_argument("kl_average: field must have n components");
  const BoxGrid omega = omega_of(plate);
  NodalField avg(omega, n - 1);
  const int layers = plate.cells(n - 1);
  const double hn = plate.spacing(n - 1);
  for (int oc = 0; oc < omega.num_cells(); ++oc)
    for (int l = 0; l < layers; ++l) {
      const int pc = plate_cell(plate, oc, omega, l);
      for (int k = 0; k < plate.corners(); ++k)
        for (int a = 0; a < n - 1; ++a) avg.at(oc, omega_corner(n, k), a) += 0.5 * hn * u.at(pc, k, a);
    }
  for (int f = 0; f < plate.num_faces(); ++f) {
    if (!u.broken[f]) continue;
    auto [axis, idx] = plate.face_info(f);
    if (axis == n - 1) continue;
    idx[n - 1] = 0;
    avg.broken[omega.face_id(axis, idx)] = 1;
  }
  return avg;
}

PsiResult extract_psi(const NodalField& u, double t1, double t2) {
  const BoxGrid& plate = u.grid;
  const int n = plate.dim();
  require_unit_thickness(plate, "extract_psi");
  if (u.components != n) throw std::invalid_argument("extract_psi: field must have n components");
  if (!(std::abs(t1) <= 0.5 && std::abs(t2) <= 0.5)) throw std::invalid_argument("extract_psi: slices outside the plate");
  if (t1 == t2) throw std::invalid_argument("extract_psi: slices must differ");
  const BoxGrid omega = omega_of(plate);
  const int layers = plate.cells(n - 1);
  const double hn = plate.spacing(n - 1);
  auto layer_of = [&](double t, double& local) {
    const double s = (t + 0.5) / hn;
    int l = std::clamp(static_cast<int>(std::floor(s)), 0, layers - 1);
    local = std::clamp(s - l, 0.0, 1.0);
    return l;
  };
  double loc1 = 0.0;
  double loc2 = 0.0;
  const int l1 = layer_of(t1, loc1);
  const int l2 = layer_of(t2, loc2);
  PsiResult r;
  r.psi = NodalField(omega, n - 1);
  r.excluded.assign(omega.num_cells(), 0);
  for (int oc = 0; oc < omega.num_cells(); ++oc) {
    // Horizontal breaks strictly between the two evaluation layers cut the column.
    bool cut = false;
    const Idx3 base = omega.cell_index(oc);
    for (int plane = std::min(l1, l2) + 1; plane <= std::max(l1, l2); ++plane) {
      Idx3 idx = base;
      idx[n - 1] = plane;
      if (u.broken[plate.face_id(n - 1, idx)]) cut = true;
    }
    if (cut) {
      r.excluded[oc] = 1;
      ++r.excluded_count;
      continue;
    }
    const int c1 = plate_cell(plate, oc, omega, l1);
    const int c2 = plate_cell(plate, oc, omega, l2);
    const int top = 1 << (n - 1);
    for (int k = 0; k < omega.corners(); ++k)
      for (int a = 0; a < n - 1; ++a) {
        const double v1 = (1.0 - loc1) * u.at(c1, k, a) + loc1 * u.at(c1, k | top, a);
        const double v2 = (1.0 - loc2) * u.at(c2, k, a) + loc2 * u.at(c2, k | top, a);
        r.psi.at(oc, k, a) = (v1 - v2) / (t2 - t1);
      }
  }
  return r;
}

SliceReport slice_independence(const NodalField& u) {
  const BoxGrid& plate = u.grid;
  const int n = plate.dim();
  const int layers = plate.cells(n - 1);
  const double hn = plate.spacing(n - 1);
  auto plane = [&](int j) { return j == layers ? 0.5 : -0.5 + j * hn; };
  const PsiResult ref = extract_psi(u, plane(0), plane(layers));
  SliceReport rep;
  rep.tolerance = fd_tolerance(max_spacing(plate), field_scale(u));
  for (int i = 0; i <= layers; ++i)
    for (int j = i + 1; j <= layers; ++j) {
      const PsiResult p = extract_psi(u, plane(i), plane(j));
      for (int oc = 0; oc < ref.psi.grid.num_cells(); ++oc) {
        if (ref.excluded[oc] || p.excluded[oc]) continue;
        for (int k = 0; k < ref.psi.grid.corners(); ++k)
          for (int a = 0; a < n - 1; ++a)
            rep.max_deviation = std::max(rep.max_deviation, std::abs(p.psi.at(oc, k, a) - ref.psi.at(oc, k, a)));
      }
    }
  rep.independent = rep.max_deviation <= rep.tolerance;
  return rep;
}

KLReport kl_verify(const NodalField& u, const LameParams& p) {
  require_valid_lame(p);
  const BoxGrid& g = u.grid;
  const int n = g.dim();
  if (n != p.n) throw std::invalid_argument("kl_verify: field dimension differs from the Lame parameters");
  if (u.components != n) throw std::invalid_argument("kl_verify: field must have n components");
  KLReport rep;
  rep.tolerance = fd_tolerance(max_spacing(g), field_scale(u));
  const Vec3 center = Vec3::Constant(0.5);

  for (int cell = 0; cell < g.num_cells(); ++cell) {
    if (u.cell_touches_break(cell)) continue;
    const Eigen::Matrix3d G = u.gradient(cell, center);
    for (int i = 0; i < n; ++i)
      rep.max_transverse_strain = std::max(rep.max_transverse_strain, std::abs(0.5 * (G(i, n - 1) + G(n - 1, i))));
  }
  for (int f = 0; f < g.num_faces(); ++f)
    if (u.broken[f] && g.face_info(f).first == n - 1) ++rep.non_vertical_broken;

  // u_n along each uncut column.
  const BoxGrid omega = omega_of(g);
  const int layers = g.cells(n - 1);
  for (int oc = 0; oc < omega.num_cells(); ++oc) {
    bool uncut = true;
    for (int l = 0; l < layers && uncut; ++l) uncut = !u.cell_touches_break(plate_cell(g, oc, omega, l));
    if (!uncut) continue;
    for (int k = 0; k < omega.corners(); ++k) {
      double lo = u.at(plate_cell(g, oc, omega, 0), k, n - 1);
      double hi = lo;
      for (int l = 0; l < layers; ++l) {
        const int pc = plate_cell(g, oc, omega, l);
        for (int top = 0; top < 2; ++top) {
          const double v = u.at(pc, k | (top << (n - 1)), n - 1);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      rep.max_un_variation = std::max(rep.max_un_variation, hi - lo);
    }
  }

  // Central-difference form of the identity at interior nodes whose surrounding cells are uncut.
  const double hn = g.spacing(n - 1);
  for (int node = 0; node < g.num_nodes(); ++node) {
    const Idx3 idx = g.node_index(node);
    bool ok = true;
    for (int a = 0; a < n && ok; ++a) ok = idx[a] > 0 && idx[a] < g.cells(a);
    if (!ok) continue;
    for (int k = 0; k < g.corners() && ok; ++k) {
      Idx3 c = idx;
      for (int a = 0; a < n; ++a) c[a] -= 1 - ((k >> a) & 1);
      ok = !u.cell_touches_break(g.cell_id(c));
    }
    if (!ok) continue;
    auto shifted = [&](int da, int alpha, int dn) {
      Idx3 j = idx;
      j[alpha] += da;
      j[n - 1] += dn;
      return j;
    };
    for (int alpha = 0; alpha < n - 1; ++alpha) {
      const double ha = g.spacing(alpha);
      const double d = std::hypot(ha, hn);
      const double c = ha / d;
      const double s = hn / d;
      auto dot_xi = [&](const Idx3& j) { return c * node_value(u, idx, j, alpha) + s * node_value(u, idx, j, n - 1); };
      const double dxi = (dot_xi(shifted(1, alpha, 1)) - dot_xi(shifted(-1, alpha, -1))) / (2.0 * d);
      const double daa =
          (node_value(u, idx, shifted(1, alpha, 0), alpha) - node_value(u, idx, shifted(-1, alpha, 0), alpha)) / (2.0 * ha);
      const double dna =
          (node_value(u, idx, shifted(0, alpha, 1), alpha) - node_value(u, idx, shifted(0, alpha, -1), alpha)) / (2.0 * hn);
      const double dan =
          (node_value(u, idx, shifted(1, alpha, 0), n - 1) - node_value(u, idx, shifted(-1, alpha, 0), n - 1)) / (2.0 * ha);
      const double rhs = (dxi - c * c * daa - c * s * dna) / (c * s);
      rep.appgra_residual = std::max(rep.appgra_residual, std::abs(dan - rhs));
    }
  }
  return rep;
}

bool jump_decomposition_check(const KLState& s, const NodalField& u) {
  const BoxGrid& plate = u.grid;
  const int n = plate.dim();
  if (n != s.n) return false;
  const BoxGrid& omega = s.omega();
  for (int f = 0; f < plate.num_faces(); ++f) {
    auto [axis, idx] = plate.face_info(f);
    if (axis == n - 1) {
      if (u.broken[f]) return false;
      continue;
    }
    idx[n - 1] = 0;
    const bool expected = s.fields.broken[omega.face_id(axis, idx)] != 0;
    if (expected != (u.broken[f] != 0)) return false;
  }
  return true;
}

}  // namespace platelab
