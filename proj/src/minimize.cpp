#include "platelab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "platelab/parallel.hpp"

namespace platelab {

namespace {

constexpr double kImproveTol = 1e-9;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<int> corners_on(const BoxGrid& g, int axis, int side) {
  std::vector<int> out;
  for (int k = 0; k < g.corners(); ++k)
    if (((k >> axis) & 1) == side) out.push_back(k);
  return out;
}

// Strain e_ij as a linear functional of the element vector (corner k, comp c) -> k*n + c.
Eigen::VectorXd strain_row(const std::vector<Vec3>& grads, int n, int i, int j) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(grads.size()) * n);
  for (size_t k = 0; k < grads.size(); ++k) {
    b[k * n + i] += 0.5 * grads[k][j];
    b[k * n + j] += 0.5 * grads[k][i];
  }
  return b;
}

Eigen::MatrixXd element_stiffness(const BoxGrid& g, const LameParams& p, double rho) {
  const int n = g.dim();
  const int last = n - 1;
  const int m = g.corners() * n;
  const double vol = g.cell_volume();
  const double s2 = 1.0 / (rho * rho);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
  auto grads_at = [&](const Vec3& x) {
    std::vector<Vec3> gr(g.corners());
    for (int k = 0; k < g.corners(); ++k) gr[k] = shape_gradient(g, k, x);
    return gr;
  };
  const CellQuadrature q = gauss2(n);
  for (size_t k = 0; k < q.points.size(); ++k) {
    const auto gr = grads_at(q.points[k]);
    Eigen::VectorXd tr = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd b = strain_row(gr, n, i, i) * (i == last ? s2 : 1.0);
      tr += b;
      local += 2.0 * p.mu * b * b.transpose();
    }
    local += p.lambda * tr * tr.transpose();
    for (int i = 0; i < last; ++i)
      for (int j = i + 1; j < last; ++j) {
        const Eigen::VectorXd b = strain_row(gr, n, i, j);
        local += 4.0 * p.mu * b * b.transpose();
      }
    K += q.weights[k] * vol * local;
  }
  const auto gc = grads_at(Vec3::Constant(0.5));
  for (int a = 0; a < last; ++a) {
    const Eigen::VectorXd b = strain_row(gc, n, a, last);
    K += vol * 4.0 * p.mu * s2 * b * b.transpose();
  }
  return K;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(cg_tol > 0.0) || !(cg_tol < 1.0)) throw std::invalid_argument("solver: cg_tol must lie in (0, 1)");
  if (cg_max_iter < 1) throw std::invalid_argument("solver: cg_max_iter must be positive");
  if (altmin_max_rounds < 1) throw std::invalid_argument("solver: altmin_max_rounds must be positive");
  if (activation_rule != "cell_energy_release")
    throw std::invalid_argument("solver: unknown activation_rule '" + activation_rule + "'");
  if (max_exhaustive < 0 || max_exhaustive > 3) throw std::invalid_argument("solver: max_exhaustive must be 0..3");
  if (patch_radius < 1) throw std::invalid_argument("solver: patch_radius must be positive");
}

// ---------------------------------------------------------------------------
// Elastic system

ElasticSystem::ElasticSystem(const BoxGrid& plate, const LameParams& p, double rho, const BoundaryDatum& g,
                             const SolverConfig& cfg)
    : grid_(plate), p_(p), rho_(rho), g_(g), cfg_(cfg) {
  require_valid_lame(p);
  cfg.validate();
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("elastic solve: rho must be positive");
  if (plate.dim() != p.n || g.n != p.n) throw std::invalid_argument("elastic solve: dimension mismatch");
  if (plate.dim() < 2) throw std::invalid_argument("elastic solve: plate grid must have dimension 2 or 3");
  ke_ = element_stiffness(plate, p, rho);
}

std::vector<int> ElasticSystem::slot_classes(const std::vector<char>& broken, int* count) const {
  const BoxGrid& g = grid_;
  if (broken.size() != static_cast<size_t>(g.num_faces()))
    throw std::invalid_argument("elastic solve: broken flags do not match the grid");
  const int C = g.corners();
  UnionFind uf(g.num_cells() * C);
  for (int f = 0; f < g.num_faces(); ++f) {
    if (broken[f] || g.is_boundary_face(f)) continue;
    const int axis = g.face_info(f).first;
    auto [below, above] = g.face_cells(f);
    for (int k : corners_on(g, axis, 1)) uf.unite(below * C + k, above * C + (k ^ (1 << axis)));
  }
  std::vector<int> root_id(uf.parent.size(), -1);
  std::vector<int> cls(uf.parent.size());
  int next = 0;
  for (size_t s = 0; s < cls.size(); ++s) {
    const int r = uf.find(static_cast<int>(s));
    if (root_id[r] < 0) root_id[r] = next++;
    cls[s] = root_id[r];
  }
  if (count) *count = next;
  return cls;
}

NodalField ElasticSystem::solve(const std::vector<char>& broken) const {
  NodalField none;
  return solve_patch(broken, none, {});
}

NodalField ElasticSystem::solve_patch(const std::vector<char>& broken, const NodalField& current,
                                      const std::vector<int>& cells) const {
  const BoxGrid& g = grid_;
  const int n = g.dim();
  const int C = g.corners();
  const bool patch = !cells.empty();
  if (patch && (current.components != n || !current.grid.same_shape(g)))
    throw std::invalid_argument("elastic solve: current field does not match the grid");

  int nc = 0;
  const std::vector<int> cls = slot_classes(broken, &nc);
  std::vector<char> fixed(nc, 0);
  Eigen::MatrixXd fixed_val = Eigen::MatrixXd::Zero(n, nc);

  for (int f = 0; f < g.num_faces(); ++f) {
    if (!g.is_boundary_face(f) || broken[f]) continue;
    auto [axis, idx] = g.face_info(f);
    if (axis == n - 1) continue;
    auto [below, above] = g.face_cells(f);
    const int cell = below >= 0 ? below : above;
    const int side = below >= 0 ? 1 : 0;
    for (int k : corners_on(g, axis, side)) {
      const int c = cls[cell * C + k];
      if (fixed[c]) continue;
      fixed[c] = 1;
      fixed_val.col(c) = g_.displacement(g.corner_position(cell, k));
    }
  }

  std::vector<char> active(g.num_cells(), patch ? 0 : 1);
  if (patch) {
    for (int c : cells) {
      if (c < 0 || c >= g.num_cells()) throw std::invalid_argument("elastic solve: patch cell out of range");
      active[c] = 1;
    }
    for (int cell = 0; cell < g.num_cells(); ++cell) {
      if (active[cell]) continue;
      for (int k = 0; k < C; ++k) {
        const int c = cls[cell * C + k];
        if (fixed[c]) continue;
        fixed[c] = 1;
        for (int d = 0; d < n; ++d) fixed_val(d, c) = current.at(cell, k, d);
      }
    }
  }

  std::vector<int> dof(nc, -1);
  int nfree = 0;
  for (int c = 0; c < nc; ++c)
    if (!fixed[c]) dof[c] = nfree++;

  // Cell components through shared classes; those without a fixed class float.
  UnionFind comp(g.num_cells());
  {
    std::vector<int> owner(nc, -1);
    for (int cell = 0; cell < g.num_cells(); ++cell) {
      if (!active[cell]) continue;
      for (int k = 0; k < C; ++k) {
        const int c = cls[cell * C + k];
        if (owner[c] < 0)
          owner[c] = cell;
        else
          comp.unite(owner[c], cell);
      }
    }
  }
  std::vector<char> anchored(g.num_cells(), 0);
  for (int cell = 0; cell < g.num_cells(); ++cell) {
    if (!active[cell]) continue;
    for (int k = 0; k < C; ++k)
      if (fixed[cls[cell * C + k]]) anchored[comp.find(cell)] = 1;
  }

  const int N = nfree * n;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(g.num_cells()) * ke_.size());
  const int m = C * n;
  std::vector<int> gi(m);
  Eigen::VectorXd ue(m);
  for (int cell = 0; cell < g.num_cells(); ++cell) {
    if (!active[cell]) continue;
    for (int k = 0; k < C; ++k) {
      const int c = cls[cell * C + k];
      for (int d = 0; d < n; ++d) {
        gi[k * n + d] = fixed[c] ? -1 : dof[c] * n + d;
        ue[k * n + d] = fixed[c] ? fixed_val(d, c) : 0.0;
      }
    }
    for (int a = 0; a < m; ++a) {
      if (gi[a] < 0) continue;
      for (int b = 0; b < m; ++b) {
        if (gi[b] >= 0)
          trip.emplace_back(gi[a], gi[b], ke_(a, b));
        else
          rhs[gi[a]] -= ke_(a, b) * ue[b];
      }
    }
  }

  std::vector<int> class_comp(nc, -1);
  for (int cell = 0; cell < g.num_cells(); ++cell)
    if (active[cell])
      for (int k = 0; k < C; ++k) class_comp[cls[cell * C + k]] = comp.find(cell);
  const double reg = 1e-12 * ke_.diagonal().maxCoeff();
  bool floating = false;
  for (int c = 0; c < nc; ++c) {
    if (dof[c] < 0 || class_comp[c] < 0 || anchored[class_comp[c]]) continue;
    floating = true;
    for (int d = 0; d < n; ++d) trip.emplace_back(dof[c] * n + d, dof[c] * n + d, reg);
  }
  // Classes touched by no active cell carry no energy; pin them.
  for (int c = 0; c < nc; ++c)
    if (dof[c] >= 0 && class_comp[c] < 0)
      for (int d = 0; d < n; ++d) trip.emplace_back(dof[c] * n + d, dof[c] * n + d, 1.0);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  if (N > 0) {
    Eigen::SparseMatrix<double> K(N, N);
    K.setFromTriplets(trip.begin(), trip.end());
    if (cfg_.linear == SolverConfig::Linear::direct) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
      if (ldlt.info() != Eigen::Success) throw SolverFailure("elastic solve: factorisation failed");
      x = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SolverFailure("elastic solve: back substitution failed");
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(K);
      cg.setTolerance(cfg_.cg_tol);
      cg.setMaxIterations(cfg_.cg_max_iter);
      x = cg.solve(rhs);
      if (cg.info() != Eigen::Success || !x.allFinite())
        throw SolverFailure("elastic solve: conjugate gradient did not converge in " +
                            std::to_string(cfg_.cg_max_iter) + " iterations");
    }
  }

  // Zero-mean translation gauge on floating components.
  if (floating) {
    std::vector<Eigen::VectorXd> sum(g.num_cells());
    std::vector<int> cnt(g.num_cells(), 0);
    for (int c = 0; c < nc; ++c) {
      if (dof[c] < 0 || class_comp[c] < 0 || anchored[class_comp[c]]) continue;
      const int r = class_comp[c];
      if (cnt[r] == 0) sum[r] = Eigen::VectorXd::Zero(n);
      sum[r] += x.segment(dof[c] * n, n);
      ++cnt[r];
    }
    for (int c = 0; c < nc; ++c) {
      if (dof[c] < 0 || class_comp[c] < 0 || anchored[class_comp[c]]) continue;
      const int r = class_comp[c];
      x.segment(dof[c] * n, n) -= sum[r] / cnt[r];
    }
  }

  NodalField u = patch ? current : NodalField(g, n);
  u.broken = broken;
  for (int cell = 0; cell < g.num_cells(); ++cell) {
    if (!active[cell]) continue;
    for (int k = 0; k < C; ++k) {
      const int c = cls[cell * C + k];
      for (int d = 0; d < n; ++d) u.at(cell, k, d) = fixed[c] ? fixed_val(d, c) : x[dof[c] * n + d];
    }
  }
  return u;
}

double ElasticSystem::bulk(const NodalField& u) const { return bulk_terms(u, p_, rho_).total(); }

double ElasticSystem::cell_energy(const NodalField& u, const std::vector<int>& cells) const {
  const int n = grid_.dim();
  const int C = grid_.corners();
  Eigen::VectorXd ue(C * n);
  double e = 0.0;
  for (int cell : cells) {
    for (int k = 0; k < C; ++k)
      for (int d = 0; d < n; ++d) ue[k * n + d] = u.at(cell, k, d);
    e += 0.5 * ue.dot(ke_ * ue);
  }
  return e;
}

EnergyBreakdown ElasticSystem::energy(const NodalField& u) const { return penalized_energy(u, p_, rho_, g_); }

std::vector<CrackColumn> ElasticSystem::columns() const {
  std::vector<CrackColumn> out;
  const int n = grid_.dim();
  // Interior planes first, then the boundary releases.
  for (int a = 0; a < n - 1; ++a)
    for (int i = 1; i < grid_.cells(a); ++i) out.push_back({a, i});
  for (int a = 0; a < n - 1; ++a) {
    out.push_back({a, 0});
    out.push_back({a, grid_.cells(a)});
  }
  return out;
}

std::vector<int> ElasticSystem::column_faces(const CrackColumn& c) const {
  const int n = grid_.dim();
  if (c.axis < 0 || c.axis >= n - 1 || c.index < 0 || c.index > grid_.cells(c.axis))
    throw std::invalid_argument("crack column out of range");
  std::vector<int> out;
  Idx3 idx{0, 0, 0};
  Idx3 ext{1, 1, 1};
  for (int b = 0; b < n; ++b) ext[b] = b == c.axis ? 1 : grid_.cells(b);
  for (idx[2] = 0; idx[2] < ext[2]; ++idx[2])
    for (idx[1] = 0; idx[1] < ext[1]; ++idx[1])
      for (idx[0] = 0; idx[0] < ext[0]; ++idx[0]) {
        Idx3 f = idx;
        f[c.axis] = c.index;
        out.push_back(grid_.face_id(c.axis, f));
      }
  return out;
}

double ElasticSystem::column_cost(const CrackColumn& c) const {
  double s = 0.0;
  for (int f : column_faces(c)) s += grid_.face_area(f);
  return s;
}

bool ElasticSystem::column_active(const CrackColumn& c, const std::vector<char>& broken) const {
  for (int f : column_faces(c))
    if (!broken[f]) return false;
  return true;
}

NodalField elastic_solve(const CrackIndicator& breaks, const BoundaryDatum& g, const LameParams& p, double rho,
                         const BoxGrid& plate, const SolverConfig& cfg) {
  ElasticSystem sys(plate, p, rho, g, cfg);
  if (breaks.broken.empty()) return sys.solve(std::vector<char>(plate.num_faces(), 0));
  return sys.solve(breaks.broken);
}

// ---------------------------------------------------------------------------
// Activation and alternation

namespace {

std::vector<int> face_patch(const BoxGrid& g, int face, int radius) {
  auto [below, above] = g.face_cells(face);
  const Idx3 a = g.cell_index(below);
  const Idx3 b = g.cell_index(above);
  Idx3 lo{0, 0, 0}, hi{0, 0, 0};
  for (int d = 0; d < g.dim(); ++d) {
    lo[d] = std::max(0, std::min(a[d], b[d]) - radius);
    hi[d] = std::min(g.cells(d) - 1, std::max(a[d], b[d]) + radius);
  }
  std::vector<int> out;
  Idx3 i{0, 0, 0};
  for (i[2] = lo[2]; i[2] <= hi[2]; ++i[2])
    for (i[1] = lo[1]; i[1] <= hi[1]; ++i[1])
      for (i[0] = lo[0]; i[0] <= hi[0]; ++i[0]) out.push_back(g.cell_id(i));
  return out;
}

struct ColumnScore {
  double total = std::numeric_limits<double>::infinity();
  NodalField field;
};

ColumnScore score_columns(const ElasticSystem& sys, const std::vector<char>& base,
                          const std::vector<CrackColumn>& set) {
  std::vector<char> br = base;
  for (const auto& c : set)
    for (int f : sys.column_faces(c)) br[f] = 1;
  ColumnScore s;
  s.field = sys.solve(br);
  s.total = sys.energy(s.field).total;
  return s;
}

}  // namespace

CrackIndicator activation_step(const ElasticSystem& sys, const NodalField& u, const CrackIndicator& breaks) {
  const BoxGrid& g = sys.grid();
  const int n = g.dim();
  CrackIndicator out = breaks;
  if (out.broken.empty()) out.broken.assign(g.num_faces(), 0);
  if (out.broken.size() != static_cast<size_t>(g.num_faces()))
    throw std::invalid_argument("activation: crack indicator does not match the grid");
  if (u.components != n || !u.grid.same_shape(g)) throw std::invalid_argument("activation: field does not match the grid");
  const SolverConfig& cfg = sys.config();

  if (cfg.mode == SolverConfig::Mode::faces) {
    std::vector<int> candidates;
    for (int f = 0; f < g.num_faces(); ++f) {
      if (out.broken[f] || g.is_boundary_face(f)) continue;
      if (cfg.vertical_only && g.face_info(f).first == n - 1) continue;
      candidates.push_back(f);
    }
    std::vector<double> net(candidates.size(), 0.0);
    std::vector<std::vector<int>> patches(candidates.size());
    parallel_for(candidates.size(), [&](size_t i) {
      const int f = candidates[i];
      patches[i] = face_patch(g, f, cfg.patch_radius);
      std::vector<char> br = out.broken;
      br[f] = 1;
      const NodalField v = sys.solve_patch(br, u, patches[i]);
      const double gain = sys.cell_energy(u, patches[i]) - sys.cell_energy(v, patches[i]);
      Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
      nu[g.face_info(f).first] = 1.0;
      net[i] = gain - g.face_area(f) * phi_rho(sys.rho(), nu);
    });
    std::vector<size_t> order;
    for (size_t i = 0; i < candidates.size(); ++i)
      if (net[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return net[a] > net[b]; });
    if (order.empty()) return out;

    // Faces with disjoint patches, best first; keep the batch only if the full solve agrees.
    const double current = sys.energy(u).total;
    const double tol = kImproveTol * std::max(1.0, std::abs(current));
    auto total_with = [&](const std::vector<char>& br) { return sys.energy(sys.solve(br)).total; };
    std::vector<char> used(g.num_cells(), 0), batch = out.broken;
    for (size_t i : order) {
      bool free = true;
      for (int c : patches[i]) free = free && !used[c];
      if (!free) continue;
      for (int c : patches[i]) used[c] = 1;
      batch[candidates[i]] = 1;
    }
    if (total_with(batch) < current - tol) {
      out.broken = std::move(batch);
      return out;
    }
    std::vector<char> single = out.broken;
    single[candidates[order.front()]] = 1;
    if (total_with(single) < current - tol) out.broken = std::move(single);
    return out;
  }

  const double current = sys.energy(u).total;
  std::vector<CrackColumn> cols;
  for (const auto& c : sys.columns())
    if (!sys.column_active(c, out.broken)) cols.push_back(c);
  std::vector<double> totals(cols.size(), std::numeric_limits<double>::infinity());
  parallel_for(cols.size(), [&](size_t i) { totals[i] = score_columns(sys, out.broken, {cols[i]}).total; });
  size_t best = cols.size();
  for (size_t i = 0; i < cols.size(); ++i)
    if (best == cols.size() || totals[i] < totals[best]) best = i;
  if (best < cols.size() && totals[best] < current - kImproveTol * std::max(1.0, std::abs(current)))
    for (int f : sys.column_faces(cols[best])) out.broken[f] = 1;
  return out;
}

MinimizeResult alternate_minimize(const BoundaryDatum& g, const LameParams& p, double rho, const BoxGrid& plate,
                                  const SolverConfig& cfg) {
  ElasticSystem sys(plate, p, rho, g, cfg);
  MinimizeResult r;
  r.cracks.broken.assign(plate.num_faces(), 0);
  r.field = sys.solve(r.cracks.broken);
  r.energy = sys.energy(r.field);
  r.trace.push_back(r.energy);
  for (r.rounds = 0; r.rounds < cfg.altmin_max_rounds;) {
    CrackIndicator next = activation_step(sys, r.field, r.cracks);
    if (next.broken == r.cracks.broken) {
      r.converged = true;
      break;
    }
    ++r.rounds;
    r.cracks = std::move(next);
    r.field = sys.solve(r.cracks.broken);
    const EnergyBreakdown e = sys.energy(r.field);
    if (e.total > r.energy.total + kImproveTol * std::max(1.0, std::abs(r.energy.total))) r.monotone = false;
    r.energy = e;
    r.trace.push_back(e);
  }

  if (cfg.exhaustive && cfg.mode == SolverConfig::Mode::columns && plate.dim() == 2 && cfg.max_exhaustive > 0) {
    const auto cols = sys.columns();
    const std::vector<char> none(plate.num_faces(), 0);
    double best = r.energy.total;
    std::vector<CrackColumn> best_set;
    bool found = false;
    std::vector<CrackColumn> set;
    // Depth-first over increasing column indices, pruned by the surface cost alone.
    std::function<void(size_t, double)> visit = [&](size_t start, double cost) {
      if (!set.empty()) {
        const double t = score_columns(sys, none, set).total;
        if (t < best - kImproveTol * std::max(1.0, std::abs(best))) {
          best = t;
          best_set = set;
          found = true;
        }
      }
      if (static_cast<int>(set.size()) >= cfg.max_exhaustive) return;
      for (size_t i = start; i < cols.size(); ++i) {
        const double c = cost + sys.column_cost(cols[i]);
        if (c >= best) continue;
        set.push_back(cols[i]);
        visit(i + 1, c);
        set.pop_back();
      }
    };
    visit(0, 0.0);
    if (found) {
      r.exhaustive_improved = true;
      r.cracks.broken = none;
      for (const auto& c : best_set)
        for (int f : sys.column_faces(c)) r.cracks.broken[f] = 1;
      r.field = sys.solve(r.cracks.broken);
      r.energy = sys.energy(r.field);
      r.trace.push_back(r.energy);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Reduced problem, n = 2

namespace {

struct Segment {
  int a = 0;
  int b = 0;
  bool clamp_a = false;
  bool clamp_b = false;
  std::vector<double> ubar, w, slope;
};

struct LimitSolution {
  std::vector<Segment> segments;
  double membrane = 0.0;
  double bending = 0.0;
};

LimitSolution solve_segments(const BoundaryDatum& g, double c0, const BoxGrid& omega, std::vector<int> cracks,
                             const std::vector<int>& released) {
  const int N = omega.cells(0);
  const double h = omega.spacing(0);
  auto x_of = [&](int i) {
    Vec3 x = Vec3::Zero();
    x[0] = omega.lo(0) + i * h;
    return x;
  };
  auto gu = [&](int i) { return g.ubar(x_of(i))[0]; };
  auto gw = [&](double x) {
    Vec3 p = Vec3::Zero();
    p[0] = x;
    return g.un(p);
  };
  const bool rel0 = std::find(released.begin(), released.end(), 0) != released.end();
  const bool rel1 = std::find(released.begin(), released.end(), 1) != released.end();
  std::sort(cracks.begin(), cracks.end());
  cracks.erase(std::unique(cracks.begin(), cracks.end()), cracks.end());
  std::vector<int> ends{0};
  for (int c : cracks) {
    if (c <= 0 || c >= N) throw std::invalid_argument("minimize_limit: crack node must be interior");
    ends.push_back(c);
  }
  ends.push_back(N);

  LimitSolution sol;
  for (size_t s = 0; s + 1 < ends.size(); ++s) {
    Segment seg;
    seg.a = ends[s];
    seg.b = ends[s + 1];
    seg.clamp_a = seg.a == 0 && !rel0;
    seg.clamp_b = seg.b == N && !rel1;
    const int len = seg.b - seg.a;
    seg.ubar.assign(len + 1, 0.0);
    seg.w.assign(len + 1, 0.0);
    seg.slope.assign(len + 1, 0.0);

    if (seg.clamp_a && seg.clamp_b) {
      for (int i = 0; i <= len; ++i) seg.ubar[i] = gu(seg.a) + (gu(seg.b) - gu(seg.a)) * i / len;
    } else if (seg.clamp_a || seg.clamp_b) {
      std::fill(seg.ubar.begin(), seg.ubar.end(), seg.clamp_a ? gu(seg.a) : gu(seg.b));
    }
    for (int i = 0; i < len; ++i) sol.membrane += 0.5 * c0 * (seg.ubar[i + 1] - seg.ubar[i]) * (seg.ubar[i + 1] - seg.ubar[i]) / h;

    const double xa = x_of(seg.a)[0];
    const double xb = x_of(seg.b)[0];
    if (seg.clamp_a && seg.clamp_b) {
      // Least squares over the second differences with ghosts from g.
      const int nu = len - 1;
      std::vector<double> fixed(len + 3, 0.0);  // index i+1 holds node i; 0 and len+2 are ghosts
      fixed[0] = gw(xa - h);
      fixed[1] = gw(xa);
      fixed[len + 1] = gw(xb);
      fixed[len + 2] = gw(xb + h);
      std::vector<Eigen::Triplet<double>> trip;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(std::max(nu, 0));
      auto unknown = [&](int i) { return (i >= 1 && i <= len - 1) ? i - 1 : -1; };
      for (int i = 0; i <= len; ++i) {
        const double wt = (i == 0 || i == len) ? 0.5 * h : h;
        const int idx[3] = {i - 1, i, i + 1};
        const double coef[3] = {1.0, -2.0, 1.0};
        double known = 0.0;
        for (int t = 0; t < 3; ++t)
          if (unknown(idx[t]) < 0) known += coef[t] * fixed[idx[t] + 1];
        for (int t = 0; t < 3; ++t) {
          const int r = unknown(idx[t]);
          if (r < 0) continue;
          rhs[r] -= wt * coef[t] * known;
          for (int q = 0; q < 3; ++q) {
            const int cidx = unknown(idx[q]);
            if (cidx >= 0) trip.emplace_back(r, cidx, wt * coef[t] * coef[q]);
          }
        }
      }
      Eigen::VectorXd sol_w = Eigen::VectorXd::Zero(std::max(nu, 0));
      if (nu > 0) {
        Eigen::SparseMatrix<double> A(nu, nu);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        if (ldlt.info() != Eigen::Success) throw SolverFailure("minimize_limit: bending factorisation failed");
        sol_w = ldlt.solve(rhs);
      }
      for (int i = 0; i <= len; ++i) seg.w[i] = unknown(i) >= 0 ? sol_w[unknown(i)] : fixed[i + 1];
      std::vector<double> ext(len + 3);
      ext[0] = fixed[0];
      ext[len + 2] = fixed[len + 2];
      for (int i = 0; i <= len; ++i) ext[i + 1] = seg.w[i];
      for (int i = 0; i <= len; ++i) {
        const double wt = (i == 0 || i == len) ? 0.5 * h : h;
        const double d2 = (ext[i] - 2.0 * ext[i + 1] + ext[i + 2]) / (h * h);
        sol.bending += 0.5 * (c0 / 12.0) * wt * d2 * d2;
      }
      for (int i = 0; i <= len; ++i) seg.slope[i] = (ext[i + 2] - ext[i]) / (2.0 * h);
      Vec3 pa = Vec3::Zero(), pb = Vec3::Zero();
      pa[0] = xa;
      pb[0] = xb;
      seg.slope[0] = g.grad_un(pa)[0];
      seg.slope[len] = g.grad_un(pb)[0];
    } else if (seg.clamp_a || seg.clamp_b) {
      // Cantilever: zero curvature continuation of the clamped end.
      const double x0 = seg.clamp_a ? xa : xb;
      const double dir = seg.clamp_a ? 1.0 : -1.0;
      const double w0 = gw(x0);
      const double step = w0 - gw(x0 - dir * h);
      Vec3 p0 = Vec3::Zero();
      p0[0] = x0;
      for (int i = 0; i <= len; ++i) {
        const int k = seg.clamp_a ? i : len - i;
        seg.w[i] = w0 + k * step;
        seg.slope[i] = dir * step / h;
      }
      seg.slope[seg.clamp_a ? 0 : len] = g.grad_un(p0)[0];
    }
    sol.segments.push_back(std::move(seg));
  }
  return sol;
}

LimitResult assemble_limit(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega,
                           const LimitSolution& sol, const std::vector<int>& cracks,
                           const std::vector<int>& released) {
  LimitResult r;
  r.state = KLState(2, omega);
  for (const auto& seg : sol.segments)
    for (int cell = seg.a; cell < seg.b; ++cell)
      for (int k = 0; k < 2; ++k) {
        const int i = cell + k - seg.a;
        r.state.fields.at(cell, k, r.state.ubar_comp(0)) = seg.ubar[i];
        r.state.fields.at(cell, k, r.state.un_comp()) = seg.w[i];
        r.state.fields.at(cell, k, r.state.grad_comp(0)) = seg.slope[i];
      }
  for (int c : cracks) r.state.add_crack_face(omega.face_id(0, {c, 0, 0}));
  r.crack_nodes = cracks;
  std::sort(r.crack_nodes.begin(), r.crack_nodes.end());
  r.crack_nodes.erase(std::unique(r.crack_nodes.begin(), r.crack_nodes.end()), r.crack_nodes.end());
  r.released_sides = released;
  r.energy.rho = 0.0;
  r.energy.bulk = sol.membrane + sol.bending;
  r.energy.surface = r.state.crack_measure();
  r.energy.boundary_penalty = released.empty() ? 0.0 : boundary_penalty(r.state, g);
  r.energy.finalize();
  (void)p;
  return r;
}

void check_limit_inputs(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega) {
  require_valid_lame(p);
  if (p.n != 2 || g.n != 2) throw std::invalid_argument("minimize_limit: only n = 2 is supported");
  if (omega.dim() != 1) throw std::invalid_argument("minimize_limit: omega grid must be one-dimensional");
  if (omega.cells(0) < 2) throw std::invalid_argument("minimize_limit: omega needs at least two cells");
}

}  // namespace

LimitResult solve_limit(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega,
                        const std::vector<int>& crack_nodes, const std::vector<int>& released_sides) {
  check_limit_inputs(g, p, omega);
  for (int s : released_sides)
    if (s != 0 && s != 1) throw std::invalid_argument("minimize_limit: released side must be 0 or 1");
  const double c0 = reduced_modulus_1d(p);
  const LimitSolution sol = solve_segments(g, c0, omega, crack_nodes, released_sides);
  LimitResult r = assemble_limit(g, p, omega, sol, crack_nodes, released_sides);
  r.converged = true;
  r.trace.push_back(r.energy);
  return r;
}

LimitResult minimize_limit(const BoundaryDatum& g, const LameParams& p, const BoxGrid& omega,
                           const SolverConfig& cfg) {
  check_limit_inputs(g, p, omega);
  cfg.validate();
  const int N = omega.cells(0);
  // Candidates: interior nodes 1..N-1, then the sides as -1 (lo) and -2 (hi).
  std::vector<int> candidates;
  for (int i = 1; i < N; ++i) candidates.push_back(i);
  candidates.push_back(-1);
  candidates.push_back(-2);

  auto evaluate = [&](const std::vector<int>& set) {
    std::vector<int> cracks, released;
    for (int c : set) {
      if (c > 0)
        cracks.push_back(c);
      else
        released.push_back(c == -1 ? 0 : 1);
    }
    return solve_limit(g, p, omega, cracks, released);
  };
  auto improves = [](double t, double ref) { return t < ref - kImproveTol * std::max(1.0, std::abs(ref)); };

  std::vector<int> active;
  LimitResult best = evaluate(active);
  std::vector<EnergyBreakdown> trace{best.energy};
  bool monotone = true;
  bool converged = false;
  int rounds = 0;
  while (rounds < cfg.altmin_max_rounds) {
    std::vector<int> pick;
    double pick_total = best.energy.total;
    for (int c : candidates) {
      if (std::find(active.begin(), active.end(), c) != active.end()) continue;
      std::vector<int> trial = active;
      trial.push_back(c);
      const double t = evaluate(trial).energy.total;
      if (improves(t, pick_total)) {
        pick_total = t;
        pick = trial;
      }
    }
    if (pick.empty()) {
      converged = true;
      break;
    }
    ++rounds;
    active = pick;
    LimitResult next = evaluate(active);
    if (next.energy.total > best.energy.total) monotone = false;
    best = std::move(next);
    trace.push_back(best.energy);
  }

  if (cfg.exhaustive && cfg.max_exhaustive > 0) {
    std::vector<int> set;
    double bound = best.energy.total;
    std::vector<int> found;
    bool improved = false;
    std::function<void(size_t, double)> visit = [&](size_t start, double cost) {
      if (!set.empty()) {
        const double t = evaluate(set).energy.total;
        if (improves(t, bound)) {
          bound = t;
          found = set;
          improved = true;
        }
      }
      if (static_cast<int>(set.size()) >= cfg.max_exhaustive) return;
      for (size_t i = start; i < candidates.size(); ++i) {
        const double c = cost + 1.0;
        if (c >= bound) continue;
        set.push_back(candidates[i]);
        visit(i + 1, c);
        set.pop_back();
      }
    };
    visit(0, 0.0);
    if (improved) {
      best = evaluate(found);
      trace.push_back(best.energy);
    }
  }
  best.trace = std::move(trace);
  best.rounds = rounds;
  best.converged = converged;
  best.monotone = monotone;
  return best;
}

}  // namespace platelab
