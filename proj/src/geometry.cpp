#include "platelab/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "platelab/parallel.hpp"

namespace platelab {

namespace {

constexpr double kDegenerate = 1e-12;

double point_segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * d - x).norm();
}

double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 0.0 && e <= 0.0) return r.norm();
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p1 + s * d1 - (p2 + t * d2)).norm();
}

Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_triangle_distance(const Vec3& p, const Simplex& s) {
  return (closest_point_triangle(p, s.vertices[0], s.vertices[1], s.vertices[2]) - p).norm();
}

bool segment_hits_simplex(const Vec3& p, const Vec3& q, const Simplex& s, double eps) {
  const auto& v = s.vertices;
  switch (v.size()) {
    case 1:
      return point_segment_distance(v[0], p, q) <= eps;
    case 2:
      return segment_segment_distance(p, q, v[0], v[1]) <= eps;
    default: {
      const double dp = (p - v[0]).dot(s.normal);
      const double dq = (q - v[0]).dot(s.normal);
      if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
        const Vec3 x = p + (dp / (dp - dq)) * (q - p);
        if (point_triangle_distance(x, s) <= eps) return true;
      }
      if (point_triangle_distance(p, s) <= eps || point_triangle_distance(q, s) <= eps) return true;
      for (int k = 0; k < 3; ++k)
        if (segment_segment_distance(p, q, v[k], v[(k + 1) % 3]) <= eps) return true;
      return false;
    }
  }
}

Idx3 add(const Idx3& a, const Idx3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

}  // namespace

CrackSurface::CrackSurface(int n) : n_(n) {
  if (n < 1 || n > 3) throw std::invalid_argument("CrackSurface: dimension must be 1, 2 or 3");
}

double CrackSurface::measure() const {
  double m = 0.0;
  for (const auto& s : simplices_) m += s.measure;
  return m;
}

void CrackSurface::add(const std::vector<Vec3>& vertices) {
  if (static_cast<int>(vertices.size()) != n_)
    throw std::invalid_argument("CrackSurface: a simplex needs " + std::to_string(n_) + " vertices");
  Simplex s;
  s.vertices = vertices;
  for (auto& v : s.vertices)
    for (int a = n_; a < 3; ++a) v[a] = 0.0;
  if (n_ == 1) {
    s.normal = Vec3::UnitX();
    s.measure = 1.0;
  } else if (n_ == 2) {
    const Vec3 t = s.vertices[1] - s.vertices[0];
    s.measure = t.norm();
    if (!(s.measure > kDegenerate)) throw std::invalid_argument("CrackSurface: degenerate segment");
    s.normal = Vec3(-t[1], t[0], 0.0) / s.measure;
  } else {
    const Vec3 c = (s.vertices[1] - s.vertices[0]).cross(s.vertices[2] - s.vertices[0]);
    s.measure = 0.5 * c.norm();
    if (!(s.measure > kDegenerate)) throw std::invalid_argument("CrackSurface: degenerate triangle");
    s.normal = c.normalized();
  }
  simplices_.push_back(std::move(s));
}

CrackSurface CrackSurface::load(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open crack file: " + path);
  CrackSurface crack(n);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<double> xs;
    double x;
    while (ss >> x) xs.push_back(x);
    if (!ss.eof()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric token");
    if (xs.empty()) continue;
    if (static_cast<int>(xs.size()) != n * n)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(n * n) +
                               " coordinates, got " + std::to_string(xs.size()));
    std::vector<Vec3> vs(n, Vec3::Zero());
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a) vs[k][a] = xs[k * n + a];
    try {
      crack.add(vs);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return crack;
}

void CrackSurface::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write crack file: " + path);
  out << std::setprecision(17);
  for (const auto& s : simplices_) {
    bool first = true;
    for (const auto& v : s.vertices)
      for (int a = 0; a < n_; ++a) {
        out << (first ? "" : " ") << v[a];
        first = false;
      }
    out << '\n';
  }
}

bool segment_hits_crack(const Vec3& p, const Vec3& q, const CrackSurface& crack, double eps) {
  if ((p - q).norm() == 0.0) throw std::invalid_argument("segment_hits_crack: degenerate segment");
  for (const auto& s : crack.simplices())
    if (segment_hits_simplex(p, q, s, eps)) return true;
  return false;
}

double Direction::norm() const { return std::sqrt(double(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])); }

std::vector<Direction> direction_set(int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("direction_set: n must be 1, 2 or 3");
  std::vector<Direction> ds;
  for (int i = 0; i < n; ++i) {
    Direction d;
    d.kind = Direction::Kind::axis;
    d.i = d.j = i;
    d.v[i] = 1;
    ds.push_back(d);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Direction d;
      d.kind = Direction::Kind::sum;
      d.i = i;
      d.j = j;
      d.v[i] = 1;
      d.v[j] = 1;
      ds.push_back(d);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Direction d;
      d.kind = Direction::Kind::difference;
      d.i = i;
      d.j = j;
      d.v[i] = 1;
      d.v[j] = -1;
      ds.push_back(d);
    }
  return ds;
}

bool in_half_neighborhood(const Vec3& p, const Direction& e, double h, const CrackSurface& crack) {
  if (!(h > 0.0)) throw std::invalid_argument("in_half_neighborhood: h must be positive");
  return segment_hits_crack(p, p + h * e.vector(), crack, 1e-9 * h);
}

void ShiftedGrid::validate() const {
  if (n < 1 || n > 3) throw std::invalid_argument("ShiftedGrid: n must be 1, 2 or 3");
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("ShiftedGrid: h must be positive");
  for (int a = 0; a < n; ++a) {
    if (!(y[a] >= 0.0 && y[a] < 1.0)) throw std::invalid_argument("ShiftedGrid: offset must lie in [0,1)");
    if (!(hi[a] > lo[a])) throw std::invalid_argument("ShiftedGrid: empty box");
  }
}

Vec3 ShiftedGrid::point(const Idx3& z) const {
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < n; ++a) x[a] = h * (z[a] + y[a]);
  return x;
}

std::pair<Idx3, Idx3> ShiftedGrid::cube_range() const {
  Idx3 zlo{0, 0, 0};
  Idx3 zhi{0, 0, 0};
  for (int a = 0; a < n; ++a) {
    // Cube z covers (h(z+y), h(z+y+1)); it meets (lo, hi) iff z+y+1 > lo/h and z+y < hi/h.
    zlo[a] = static_cast<int>(std::floor(lo[a] / h - y[a] - 1.0)) + 1;
    zhi[a] = static_cast<int>(std::ceil(hi[a] / h - y[a])) - 1;
  }
  return {zlo, zhi};
}

bool LatticeBox::contains(const Idx3& z) const {
  for (int a = 0; a < n; ++a)
    if (z[a] < lo[a] || z[a] > hi[a]) return false;
  return true;
}

size_t LatticeBox::size() const {
  size_t s = 1;
  for (int a = 0; a < n; ++a) {
    if (hi[a] < lo[a]) return 0;
    s *= static_cast<size_t>(hi[a] - lo[a] + 1);
  }
  return s;
}

size_t LatticeBox::offset(const Idx3& z) const {
  size_t off = 0;
  for (int a = n - 1; a >= 0; --a) off = off * static_cast<size_t>(hi[a] - lo[a] + 1) + (z[a] - lo[a]);
  return off;
}

HalfNeighborhoodFlags half_neighborhood_flags(const ShiftedGrid& grid, const CrackSurface& crack,
                                              const LatticeBox& box) {
  grid.validate();
  if (crack.dim() != grid.n) throw std::invalid_argument("half_neighborhood_flags: crack dimension mismatch");
  HalfNeighborhoodFlags flags;
  flags.box = box;
  flags.directions = direction_set(grid.n);
  flags.bits.assign(box.size(), 0u);
  const double eps = grid.geometric_tolerance();
  const int n = grid.n;
  for (const auto& s : crack.simplices()) {
    for (size_t d = 0; d < flags.directions.size(); ++d) {
      const Vec3 step = grid.h * flags.directions[d].vector();
      // Candidates p satisfy p in S - t*step for some t in [0,1].
      Vec3 bmin = Vec3::Constant(std::numeric_limits<double>::infinity());
      Vec3 bmax = -bmin;
      for (const auto& v : s.vertices) {
        bmin = bmin.cwiseMin(v).cwiseMin(v - step);
        bmax = bmax.cwiseMax(v).cwiseMax(v - step);
      }
      LatticeBox range;
      range.n = n;
      bool empty = false;
      for (int a = 0; a < n; ++a) {
        range.lo[a] = std::max(box.lo[a], static_cast<int>(std::ceil((bmin[a] - eps) / grid.h - grid.y[a])));
        range.hi[a] = std::min(box.hi[a], static_cast<int>(std::floor((bmax[a] + eps) / grid.h - grid.y[a])));
        if (range.hi[a] < range.lo[a]) empty = true;
      }
      if (empty) continue;
      const std::uint32_t bit = 1u << d;
      range.for_each([&](const Idx3& z) {
        auto& b = flags.bits[box.offset(z)];
        if (b & bit) return;
        const Vec3 p = grid.point(z);
        if (segment_hits_simplex(p, p + step, s, eps)) b |= bit;
      });
    }
  }
  return flags;
}

std::vector<Idx3> CubeClassification::bad_cubes() const {
  std::vector<Idx3> out;
  cubes.for_each([&](const Idx3& z) {
    if (bad[cubes.offset(z)]) out.push_back(z);
  });
  return out;
}

namespace {

LatticeBox cube_box(const ShiftedGrid& grid) {
  auto [zlo, zhi] = grid.cube_range();
  LatticeBox b;
  b.n = grid.n;
  b.lo = zlo;
  b.hi = zhi;
  return b;
}

LatticeBox extended(const LatticeBox& cubes) {
  LatticeBox b = cubes;
  for (int a = 0; a < b.n; ++a) b.hi[a] += 1;
  return b;
}

}  // namespace

CubeClassification classify_cubes(const ShiftedGrid& grid, const CrackSurface& crack) {
  grid.validate();
  CubeClassification c;
  c.grid = grid;
  c.cubes = cube_box(grid);
  c.bad.assign(c.cubes.size(), 0);
  if (crack.empty()) return c;
  const int n = grid.n;
  const auto flags = half_neighborhood_flags(grid, crack, extended(c.cubes));
  const auto& dirs = flags.directions;
  c.cubes.for_each([&](const Idx3& z) {
    for (size_t d = 0; d < dirs.size(); ++d) {
      const Direction& e = dirs[d];
      Idx3 shift{0, 0, 0};
      if (e.kind == Direction::Kind::difference) shift[e.j] = 1;
      for (int eta = 0; eta < (1 << n); ++eta) {
        if ((eta >> e.i) & 1) continue;
        if (e.kind != Direction::Kind::axis && ((eta >> e.j) & 1)) continue;
        Idx3 corner = z;
        for (int a = 0; a < n; ++a) corner[a] += (eta >> a) & 1;
        if (flags.test(add(corner, shift), static_cast<int>(d))) {
          c.bad[c.cubes.offset(z)] = 1;
          return;
        }
      }
    }
  });
  c.bad_count = static_cast<int>(std::count(c.bad.begin(), c.bad.end(), 1));
  return c;
}

double discrete_jump_energy(const ShiftedGrid& grid, const CrackSurface& crack) {
  grid.validate();
  if (crack.empty()) return 0.0;
  const LatticeBox cubes = cube_box(grid);
  const auto flags = half_neighborhood_flags(grid, crack, cubes);
  std::vector<double> weight(flags.directions.size());
  for (size_t d = 0; d < weight.size(); ++d) weight[d] = 1.0 / (grid.h * flags.directions[d].norm());
  double total = 0.0;
  for (std::uint32_t b : flags.bits) {
    while (b) {
      const int d = std::countr_zero(b);
      total += weight[d];
      b &= b - 1;
    }
  }
  return std::pow(grid.h, grid.n) * total;
}

double bad_cube_boundary_measure(const CubeClassification& c) {
  const int n = c.grid.n;
  const double face = std::pow(c.grid.h, n - 1);
  double total = 0.0;
  c.cubes.for_each([&](const Idx3& z) {
    if (!c.bad[c.cubes.offset(z)]) return;
    for (int a = 0; a < n; ++a)
      for (int s = -1; s <= 1; s += 2) {
        Idx3 w = z;
        w[a] += s;
        if (!c.is_bad(w)) total += face;
      }
  });
  return total;
}

double jump_energy_slab_oracle(const CrackSurface& crack) {
  const auto dirs = direction_set(crack.dim());
  double total = 0.0;
  for (const auto& s : crack.simplices())
    for (const auto& e : dirs) total += std::abs(e.vector().dot(s.normal)) / e.norm() * s.measure;
  return total;
}

std::vector<Vec3> sample_offsets(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec3 y = Vec3::Zero();
    for (int a = 0; a < n; ++a) y[a] = u(rng);
    out.push_back(y);
  }
  return out;
}

OffsetStatistics offset_statistics(int n, double h, const Vec3& lo, const Vec3& hi, const CrackSurface& crack,
                                   int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("offset_statistics: need at least one sample");
  const auto ys = sample_offsets(n, samples, seed);
  OffsetStatistics st;
  st.jump_energy.resize(samples);
  st.boundary_measure.resize(samples);
  st.bad_count.resize(samples);
  parallel_for(static_cast<size_t>(samples), [&](size_t k) {
    ShiftedGrid g{n, h, ys[k], lo, hi};
    st.jump_energy[k] = discrete_jump_energy(g, crack);
    const auto c = classify_cubes(g, crack);
    st.boundary_measure[k] = bad_cube_boundary_measure(c);
    st.bad_count[k] = c.bad_count;
  });
  const double m = std::accumulate(st.jump_energy.begin(), st.jump_energy.end(), 0.0) / samples;
  double var = 0.0;
  for (double v : st.jump_energy) var += (v - m) * (v - m);
  st.mean_jump_energy = m;
  st.stddev_jump_energy = samples > 1 ? std::sqrt(var / (samples - 1)) : 0.0;
  st.mean_boundary_measure =
      std::accumulate(st.boundary_measure.begin(), st.boundary_measure.end(), 0.0) / samples;
  return st;
}

// ---------------------------------------------------------------------------
// Projections

ProjectionSet ProjectionSet::from_cubes(const CubeClassification& c) {
  ProjectionSet s;
  s.n = c.grid.n;
  for (const auto& z : c.bad_cubes()) {
    const Vec3 lo = c.grid.point(z);
    Vec3 hi = lo;
    for (int a = 0; a < s.n; ++a) hi[a] += c.grid.h;
    s.boxes.emplace_back(lo, hi);
  }
  return s;
}

ProjectionSet ProjectionSet::from_crack(const CrackSurface& crack) {
  ProjectionSet s;
  s.n = crack.dim();
  for (const auto& simplex : crack.simplices()) s.polytopes.push_back(simplex.vertices);
  return s;
}

namespace {

std::vector<Vec3> clip_polygon(const std::vector<Vec3>& poly, int axis, double bound, bool keep_above) {
  std::vector<Vec3> out;
  const size_t m = poly.size();
  auto inside = [&](const Vec3& p) { return keep_above ? p[axis] >= bound : p[axis] <= bound; };
  for (size_t k = 0; k < m; ++k) {
    const Vec3& a = poly[k];
    const Vec3& b = poly[(k + 1) % m];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double t = (bound - a[axis]) / (b[axis] - a[axis]);
      Vec3 x = a + t * (b - a);
      x[axis] = bound;
      out.push_back(x);
    }
  }
  return out;
}

bool clip_segment(Vec3& a, Vec3& b, int n, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec3 d = b - a;
  for (int k = 0; k < n; ++k) {
    if (d[k] == 0.0) {
      if (a[k] < lo[k] || a[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - a[k]) / d[k];
    double tb = (hi[k] - a[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  const Vec3 a0 = a;
  a = a0 + t0 * d;
  b = a0 + t1 * d;
  return true;
}

}  // namespace

ProjectionSet ProjectionSet::clipped(const Vec3& lo, const Vec3& hi) const {
  ProjectionSet out;
  out.n = n;
  for (const auto& [blo, bhi] : boxes) {
    Vec3 a = blo.cwiseMax(lo);
    Vec3 b = bhi.cwiseMin(hi);
    bool ok = true;
    for (int k = 0; k < n; ++k) ok = ok && a[k] <= b[k];
    if (ok) out.boxes.emplace_back(a, b);
  }
  for (const auto& poly : polytopes) {
    if (poly.size() <= 2) {
      Vec3 a = poly.front();
      Vec3 b = poly.back();
      if (clip_segment(a, b, n, lo, hi)) out.polytopes.push_back(poly.size() == 1 ? std::vector<Vec3>{a}
                                                                                   : std::vector<Vec3>{a, b});
      continue;
    }
    std::vector<Vec3> p = poly;
    for (int k = 0; k < n && !p.empty(); ++k) {
      p = clip_polygon(p, k, lo[k], true);
      if (!p.empty()) p = clip_polygon(p, k, hi[k], false);
    }
    if (p.size() >= 3) out.polytopes.push_back(std::move(p));
  }
  return out;
}

namespace {

int projection_axis(const Vec3& xi, int n) {
  int axis = -1;
  for (int k = 0; k < n; ++k) {
    if (std::abs(std::abs(xi[k]) - 1.0) <= 1e-12) {
      if (axis >= 0) axis = -2;
      else axis = k;
    } else if (std::abs(xi[k]) > 1e-12) {
      axis = -2;
    }
  }
  if (axis < 0) throw std::invalid_argument("projection_measure: unsupported direction (only +-e_k)");
  return axis;
}

using Interval = std::pair<double, double>;

double union_length(std::vector<Interval> iv) {
  std::sort(iv.begin(), iv.end());
  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = 0.0;
  bool open = false;
  for (const auto& [a, b] : iv) {
    if (!open || a > cur_hi) {
      if (open) total += cur_hi - cur_lo;
      cur_lo = a;
      cur_hi = b;
      open = true;
    } else {
      cur_hi = std::max(cur_hi, b);
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

std::vector<Interval> shadow_intervals(const ProjectionSet& s, int axis) {
  const int o = 1 - axis;
  std::vector<Interval> iv;
  for (const auto& [lo, hi] : s.boxes) iv.emplace_back(lo[o], hi[o]);
  for (const auto& poly : s.polytopes) {
    double a = std::numeric_limits<double>::infinity();
    double b = -a;
    for (const auto& v : poly) {
      a = std::min(a, v[o]);
      b = std::max(b, v[o]);
    }
    iv.emplace_back(a, b);
  }
  return iv;
}

struct Shape2 {
  std::vector<Eigen::Vector2d> pts;  // rectangle: 2 corners; polygon: >= 3 vertices in order
  bool rect = true;
};

std::vector<Shape2> shadow_shapes(const ProjectionSet& s, int axis) {
  int u = -1;
  int v = -1;
  for (int k = 0; k < 3; ++k) {
    if (k == axis) continue;
    if (u < 0) u = k;
    else v = k;
  }
  std::vector<Shape2> out;
  for (const auto& [lo, hi] : s.boxes) {
    Shape2 sh;
    sh.pts = {Eigen::Vector2d(lo[u], lo[v]), Eigen::Vector2d(hi[u], hi[v])};
    out.push_back(sh);
  }
  for (const auto& poly : s.polytopes) {
    Shape2 sh;
    sh.rect = false;
    for (const auto& p : poly) sh.pts.emplace_back(p[u], p[v]);
    out.push_back(sh);
  }
  return out;
}

double rect_union_area(const std::vector<const Shape2*>& rects) {
  std::vector<double> xs;
  for (auto* r : rects) {
    xs.push_back(r->pts[0][0]);
    xs.push_back(r->pts[1][0]);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double area = 0.0;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    const double xm = 0.5 * (xs[k] + xs[k + 1]);
    std::vector<Interval> iv;
    for (auto* r : rects)
      if (r->pts[0][0] <= xm && xm <= r->pts[1][0]) iv.emplace_back(r->pts[0][1], r->pts[1][1]);
    area += (xs[k + 1] - xs[k]) * union_length(iv);
  }
  return area;
}

double polygon_signed_area(const std::vector<Eigen::Vector2d>& p) {
  double a = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    const auto& q = p[k];
    const auto& r = p[(k + 1) % p.size()];
    a += q[0] * r[1] - q[1] * r[0];
  }
  return 0.5 * a;
}

double perimeter(const Shape2& s) {
  if (s.rect) return 2.0 * ((s.pts[1] - s.pts[0]).cwiseAbs().sum());
  double p = 0.0;
  for (size_t k = 0; k < s.pts.size(); ++k) p += (s.pts[(k + 1) % s.pts.size()] - s.pts[k]).norm();
  return p;
}

bool inside(const Shape2& s, const Eigen::Vector2d& x, double sign) {
  if (s.rect) return s.pts[0][0] <= x[0] && x[0] <= s.pts[1][0] && s.pts[0][1] <= x[1] && x[1] <= s.pts[1][1];
  for (size_t k = 0; k < s.pts.size(); ++k) {
    const Eigen::Vector2d e = s.pts[(k + 1) % s.pts.size()] - s.pts[k];
    const Eigen::Vector2d d = x - s.pts[k];
    if (sign * (e[0] * d[1] - e[1] * d[0]) < 0.0) return false;
  }
  return true;
}

// Raster cells of side `raster` over a common bounding box; marks cells whose centre lies in a shape.
struct Raster {
  Eigen::Vector2d origin;
  double step = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<char> mark(const std::vector<Shape2>& shapes) const {
    std::vector<char> m(static_cast<size_t>(nx) * ny, 0);
    for (const auto& s : shapes) {
      double sign = 1.0;
      if (!s.rect) {
        const double a = polygon_signed_area(s.pts);
        if (std::abs(a) <= 1e-300) continue;
        sign = a > 0.0 ? 1.0 : -1.0;
      }
      Eigen::Vector2d bmin = s.pts[0];
      Eigen::Vector2d bmax = s.pts[0];
      for (const auto& p : s.pts) {
        bmin = bmin.cwiseMin(p);
        bmax = bmax.cwiseMax(p);
      }
      const int i0 = std::max(0, static_cast<int>(std::floor((bmin[0] - origin[0]) / step - 0.5)));
      const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((bmax[0] - origin[0]) / step - 0.5)));
      const int j0 = std::max(0, static_cast<int>(std::floor((bmin[1] - origin[1]) / step - 0.5)));
      const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((bmax[1] - origin[1]) / step - 0.5)));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          char& c = m[static_cast<size_t>(j) * nx + i];
          if (c) continue;
          const Eigen::Vector2d x = origin + step * Eigen::Vector2d(i + 0.5, j + 0.5);
          if (inside(s, x, sign)) c = 1;
        }
    }
    return m;
  }
};

Raster make_raster(const std::vector<Shape2>& a, const std::vector<Shape2>& b, double raster) {
  if (!(raster > 0.0)) throw std::invalid_argument("projection_measure: raster resolution must be positive");
  Eigen::Vector2d bmin = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d bmax = -bmin;
  for (const auto* set : {&a, &b})
    for (const auto& s : *set)
      for (const auto& p : s.pts) {
        bmin = bmin.cwiseMin(p);
        bmax = bmax.cwiseMax(p);
      }
  Raster r;
  r.step = raster;
  r.origin = bmin;
  const Eigen::Vector2d ext = bmax - bmin;
  r.nx = std::max(1, static_cast<int>(std::ceil(ext[0] / raster)));
  r.ny = std::max(1, static_cast<int>(std::ceil(ext[1] / raster)));
  if (static_cast<double>(r.nx) * r.ny > 4e8) throw std::invalid_argument("projection_measure: raster too fine");
  return r;
}

ProjectionMeasure measure_difference(const ProjectionSet& a, const ProjectionSet* b, const Vec3& xi,
                                     double raster) {
  const int n = a.n;
  if (b && b->n != n) throw std::invalid_argument("projection_measure: dimension mismatch");
  const int axis = projection_axis(xi, n);
  ProjectionMeasure out;
  if (n == 1) {
    const bool any_a = !a.boxes.empty() || !a.polytopes.empty();
    const bool any_b = b && (!b->boxes.empty() || !b->polytopes.empty());
    out.value = (any_a && !any_b) ? 1.0 : 0.0;  // counting measure of a point
    return out;
  }
  if (n == 2) {
    auto ia = shadow_intervals(a, axis);
    if (!b) {
      out.value = union_length(ia);
      return out;
    }
    auto ib = shadow_intervals(*b, axis);
    const double lb = union_length(ib);
    ia.insert(ia.end(), ib.begin(), ib.end());
    out.value = std::max(0.0, union_length(ia) - lb);
    return out;
  }
  const auto sa = shadow_shapes(a, axis);
  const auto sb = b ? shadow_shapes(*b, axis) : std::vector<Shape2>{};
  const bool all_rect = std::all_of(sa.begin(), sa.end(), [](const Shape2& s) { return s.rect; }) &&
                        std::all_of(sb.begin(), sb.end(), [](const Shape2& s) { return s.rect; });
  if (sa.empty()) return out;
  if (all_rect) {
    std::vector<const Shape2*> ra;
    std::vector<const Shape2*> rb;
    for (const auto& s : sa) ra.push_back(&s);
    for (const auto& s : sb) rb.push_back(&s);
    const double lb = rect_union_area(rb);
    ra.insert(ra.end(), rb.begin(), rb.end());
    out.value = std::max(0.0, rect_union_area(ra) - lb);
    return out;
  }
  const Raster r = make_raster(sa, sb, raster);
  const auto ma = r.mark(sa);
  const auto mb = r.mark(sb);
  size_t count = 0;
  for (size_t k = 0; k < ma.size(); ++k)
    if (ma[k] && !mb[k]) ++count;
  out.value = static_cast<double>(count) * raster * raster;
  double per = 0.0;
  for (const auto& s : sa) per += perimeter(s);
  for (const auto& s : sb) per += perimeter(s);
  out.error_bound = raster * per;
  return out;
}

}  // namespace

ProjectionMeasure projection_measure(const ProjectionSet& s, const Vec3& xi, double raster) {
  return measure_difference(s, nullptr, xi, raster);
}

ProjectionMeasure projection_measure_difference(const ProjectionSet& a, const ProjectionSet& b, const Vec3& xi,
                                                double raster) {
  return measure_difference(a, &b, xi, raster);
}

}  // namespace platelab
