#include "platelab/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace platelab {

Eigen::VectorXd SampledField::value(const Idx3& z) const {
  if (!points.contains(z)) throw std::out_of_range("SampledField: lattice point not sampled");
  Eigen::VectorXd v(components);
  const size_t off = points.offset(z) * components;
  for (int c = 0; c < components; ++c) v[c] = values[off + c];
  return v;
}

SampledField sample(const FieldFn& v, int components, const ShiftedGrid& grid, const Vec3& domain_lo,
                    const Vec3& domain_hi) {
  grid.validate();
  if (components < 1) throw std::invalid_argument("sample: need at least one component");
  SampledField s;
  s.grid = grid;
  s.components = components;
  auto [zlo, zhi] = grid.cube_range();
  s.points.n = grid.n;
  for (int a = 0; a < grid.n; ++a) {
    s.points.lo[a] = zlo[a] - 1;
    s.points.hi[a] = zhi[a] + 2;
  }
  s.values.assign(s.points.size() * components, 0.0);
  s.points.for_each([&](const Idx3& z) {
    const Vec3 x = grid.point(z);
    for (int a = 0; a < grid.n; ++a)
      if (x[a] < domain_lo[a] || x[a] > domain_hi[a])
        throw std::invalid_argument("sample: lattice point outside the field's domain");
    const Eigen::VectorXd val = v(x);
    if (val.size() != components) throw std::invalid_argument("sample: field returned wrong number of components");
    const size_t off = s.points.offset(z) * components;
    for (int c = 0; c < components; ++c) s.values[off + c] = val[c];
  });
  return s;
}

double hat_kernel(int n, const Vec3& x) {
  double w = 1.0;
  for (int a = 0; a < n; ++a) w *= std::max(0.0, 1.0 - std::abs(x[a]));
  return w;
}

namespace {

struct CubeLocation {
  Idx3 z{0, 0, 0};
  Vec3 t = Vec3::Zero();
};

CubeLocation locate_cube(const ShiftedGrid& g, const Vec3& x) {
  CubeLocation loc;
  for (int a = 0; a < g.n; ++a) {
    const double s = x[a] / g.h - g.y[a];
    loc.z[a] = static_cast<int>(std::floor(s));
    loc.t[a] = s - loc.z[a];
  }
  return loc;
}

void require_corners(const SampledField& s, const Idx3& z) {
  Idx3 top = z;
  for (int a = 0; a < s.grid.n; ++a) top[a] += 1;
  if (!s.points.contains(z) || !s.points.contains(top))
    throw std::out_of_range("interpolate: point not covered by the sampled lattice");
}

Eigen::VectorXd interpolate_in_cube(const SampledField& s, const Idx3& z, const Vec3& t) {
  const int n = s.grid.n;
  require_corners(s, z);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(s.components);
  for (int k = 0; k < (1 << n); ++k) {
    Idx3 c = z;
    for (int a = 0; a < n; ++a) c[a] += (k >> a) & 1;
    w += shape_value(n, k, t) * s.value(c);
  }
  return w;
}

Eigen::Matrix3d gradient_in_cube(const SampledField& s, const Idx3& z, const Vec3& t) {
  const int n = s.grid.n;
  require_corners(s, z);
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (int k = 0; k < (1 << n); ++k) {
    Idx3 c = z;
    for (int a = 0; a < n; ++a) c[a] += (k >> a) & 1;
    Vec3 dn = Vec3::Zero();
    for (int a = 0; a < n; ++a) {
      double d = (((k >> a) & 1) ? 1.0 : -1.0) / s.grid.h;
      for (int b = 0; b < n; ++b)
        if (b != a) d *= ((k >> b) & 1) ? t[b] : 1.0 - t[b];
      dn[a] = d;
    }
    const Eigen::VectorXd v = s.value(c);
    for (int comp = 0; comp < std::min(s.components, 3); ++comp) g.row(comp) += v[comp] * dn.transpose();
  }
  return g;
}

}  // namespace

Eigen::VectorXd interpolate(const SampledField& s, const Vec3& x) {
  const auto loc = locate_cube(s.grid, x);
  return interpolate_in_cube(s, loc.z, loc.t);
}

Eigen::Matrix3d interpolate_gradient(const SampledField& s, const Vec3& x) {
  const auto loc = locate_cube(s.grid, x);
  return gradient_in_cube(s, loc.z, loc.t);
}

double DirectionalStrainField::at(const Vec3& x) const {
  const auto loc = locate_cube(grid, x);
  if (!cubes.contains(loc.z)) throw std::out_of_range("DirectionalStrainField: point outside the cube range");
  return at_cube(loc.z);
}

DirectionalStrainField directional_strain(const SampledField& s, const Direction& e, const CrackSurface& crack) {
  const ShiftedGrid& g = s.grid;
  DirectionalStrainField ds;
  ds.grid = g;
  ds.e = e;
  auto [zlo, zhi] = g.cube_range();
  ds.cubes.n = g.n;
  ds.cubes.lo = zlo;
  ds.cubes.hi = zhi;
  ds.strain.assign(ds.cubes.size(), 0.0);
  ds.cutoff.assign(ds.cubes.size(), 1);

  int bit = -1;
  const auto dirs = direction_set(g.n);
  for (size_t d = 0; d < dirs.size(); ++d)
    if (dirs[d].v == e.v) bit = static_cast<int>(d);
  if (bit < 0) throw std::invalid_argument("directional_strain: direction not in D");

  HalfNeighborhoodFlags flags;
  const bool cracked = !crack.empty();
  if (cracked) flags = half_neighborhood_flags(g, crack, ds.cubes);
  const Vec3 ev = e.vector();
  ds.cubes.for_each([&](const Idx3& z) {
    Idx3 ze = z;
    for (int a = 0; a < g.n; ++a) ze[a] += e.v[a];
    if (!s.covers(z) || !s.covers(ze)) throw std::out_of_range("directional_strain: missing neighbour sample");
    const size_t off = ds.cubes.offset(z);
    if (cracked && flags.test(z, bit)) {
      ds.cutoff[off] = 0;
      return;
    }
    const Eigen::VectorXd diff = s.value(ze) - s.value(z);
    double proj = 0.0;
    for (int a = 0; a < std::min(g.n, s.components); ++a) proj += diff[a] * ev[a];
    ds.strain[off] = proj / g.h;
  });
  return ds;
}

Idx3 Approximant::cube_of(const Vec3& x) const {
  const auto loc = locate_cube(samples.grid, x);
  Idx3 z = loc.z;
  for (int a = 0; a < samples.grid.n; ++a)
    z[a] = std::clamp(z[a], classification.cubes.lo[a], classification.cubes.hi[a]);
  return z;
}

namespace {

void require_in_region(const Approximant& a, const Vec3& x) {
  for (int k = 0; k < a.samples.grid.n; ++k)
    if (x[k] < a.region_lo[k] || x[k] > a.region_hi[k])
      throw std::out_of_range("Approximant: point outside the region V");
}

Vec3 local_in(const ShiftedGrid& g, const Idx3& z, const Vec3& x) {
  Vec3 t = Vec3::Zero();
  for (int a = 0; a < g.n; ++a) t[a] = std::clamp(x[a] / g.h - g.y[a] - z[a], 0.0, 1.0);
  return t;
}

}  // namespace

bool Approximant::in_bad_cube(const Vec3& x) const { return classification.is_bad(cube_of(x)); }

Eigen::VectorXd Approximant::value(const Vec3& x) const {
  require_in_region(*this, x);
  const Idx3 z = cube_of(x);
  if (classification.is_bad(z)) return Eigen::VectorXd::Zero(samples.components);
  return interpolate_in_cube(samples, z, local_in(samples.grid, z, x));
}

Eigen::Matrix3d Approximant::gradient(const Vec3& x) const {
  require_in_region(*this, x);
  const Idx3 z = cube_of(x);
  if (classification.is_bad(z)) return Eigen::Matrix3d::Zero();
  return gradient_in_cube(samples, z, local_in(samples.grid, z, x));
}

Approximant build_approximant(const FieldFn& v, int components, double h, const Vec3& y, const CrackSurface& crack,
                              const Vec3& domain_lo, const Vec3& domain_hi, const Vec3& region_lo,
                              const Vec3& region_hi) {
  const int n = crack.dim();
  const double margin = 2.0 * n * h;
  for (int a = 0; a < n; ++a) {
    if (!(region_hi[a] > region_lo[a])) throw std::invalid_argument("build_approximant: empty region V");
    if (region_lo[a] - domain_lo[a] < margin || domain_hi[a] - region_hi[a] < margin)
      throw std::invalid_argument("build_approximant: region V must keep a margin of 2 n h inside the domain");
  }
  ShiftedGrid g{n, h, y, region_lo, region_hi};
  Approximant a;
  a.samples = sample(v, components, g, domain_lo, domain_hi);
  a.classification = classify_cubes(g, crack);
  a.region_lo = region_lo;
  a.region_hi = region_hi;
  return a;
}

namespace {

Vec3 random_point(std::mt19937_64& rng, int n, const Vec3& lo, const Vec3& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < n; ++a) x[a] = lo[a] + u(rng) * (hi[a] - lo[a]);
  return x;
}

}  // namespace

StrainBoundReport strain_bound_check(const Approximant& a, const DirectionalStrainField& ds, int points,
                                     std::uint64_t seed) {
  const int n = a.samples.grid.n;
  std::mt19937_64 rng(seed);
  double scale = 1.0;
  for (double s : ds.strain) scale = std::max(scale, std::abs(s));
  const double tiny = 1e-12 * scale;
  const Vec3 e = ds.e.vector();
  StrainBoundReport r;
  int attempts = 0;
  while (r.points < points && attempts < 100 * points) {
    ++attempts;
    const Vec3 x = random_point(rng, n, a.region_lo, a.region_hi);
    if (a.in_bad_cube(x)) continue;
    const Eigen::Matrix3d grad = a.gradient(x);
    const double num = std::abs(e.dot(grad * e));
    const double den = std::abs(ds.at(x));
    double ratio = 0.0;
    if (den > tiny) ratio = num / den;
    else if (num > tiny) ratio = std::numeric_limits<double>::infinity();
    r.max_ratio = std::max(r.max_ratio, ratio);
    ++r.points;
  }
  return r;
}

StructureReport structure_preservation_check(const FieldFn& v, const Approximant& a, int i, int j,
                                             int fibres_per_axis, int points_per_fibre) {
  const int n = a.samples.grid.n;
  if (i < 0 || i >= n || j < 0 || j >= a.samples.components)
    throw std::invalid_argument("structure_preservation_check: axis or component out of range");
  StructureReport r;

  // Precondition probe on the region: v_j unchanged under shifts along e_i.
  std::mt19937_64 rng(0x5eed);
  double scale = 1.0;
  r.precondition = true;
  for (int k = 0; k < 200 && r.precondition; ++k) {
    Vec3 x = random_point(rng, n, a.region_lo, a.region_hi);
    Vec3 x2 = x;
    x2[i] = random_point(rng, n, a.region_lo, a.region_hi)[i];
    const double v1 = v(x)[j];
    const double v2 = v(x2)[j];
    scale = std::max({scale, std::abs(v1), std::abs(v2)});
    if (std::abs(v1 - v2) > 1e-12 * scale) r.precondition = false;
  }
  if (!r.precondition) return r;

  const auto bad = a.classification.bad_cubes();
  const ShiftedGrid& g = a.samples.grid;
  auto in_shadow = [&](const Vec3& x) {
    for (const auto& z : bad) {
      const Vec3 lo = g.point(z);
      bool inside = true;
      for (int b = 0; b < n && inside; ++b)
        if (b != i) inside = x[b] >= lo[b] && x[b] <= lo[b] + g.h;
      if (inside) return true;
    }
    return false;
  };

  int total = 1;
  for (int b = 0; b < n - 1; ++b) total *= fibres_per_axis;
  r.passed = true;
  for (int f = 0; f < total; ++f) {
    Vec3 x = Vec3::Zero();
    int rem = f;
    for (int b = 0; b < n; ++b) {
      if (b == i) continue;
      const int k = rem % fibres_per_axis;
      rem /= fibres_per_axis;
      x[b] = a.region_lo[b] + (k + 0.5) / fibres_per_axis * (a.region_hi[b] - a.region_lo[b]);
    }
    if (in_shadow(x)) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int p = 0; p < points_per_fibre; ++p) {
      x[i] = a.region_lo[i] + (a.region_hi[i] - a.region_lo[i]) * p / (points_per_fibre - 1);
      const double val = a.value(x)[j];
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    ++r.fibres;
    r.max_variation = std::max(r.max_variation, hi - lo);
    if (hi - lo > 1e-12 * scale) r.passed = false;
  }
  return r;
}

double mismatch_measure(const Approximant& a, const FieldFn& v, double delta, int sub) {
  const int n = a.samples.grid.n;
  const double h = a.samples.grid.h;
  Idx3 m{1, 1, 1};
  double volume = 1.0;
  for (int k = 0; k < n; ++k) {
    const double len = a.region_hi[k] - a.region_lo[k];
    m[k] = std::max(1, static_cast<int>(std::ceil(len * sub / h)));
    volume *= len;
  }
  LatticeBox box;
  box.n = n;
  for (int k = 0; k < n; ++k) box.hi[k] = m[k] - 1;
  size_t hits = 0;
  box.for_each([&](const Idx3& idx) {
    Vec3 x = Vec3::Zero();
    for (int k = 0; k < n; ++k) x[k] = a.region_lo[k] + (idx[k] + 0.5) / m[k] * (a.region_hi[k] - a.region_lo[k]);
    const Eigen::VectorXd d = a.value(x) - v(x);
    if (d.lpNorm<Eigen::Infinity>() > delta) ++hits;
  });
  return volume * static_cast<double>(hits) / static_cast<double>(box.size());
}

double trace_mismatch_fraction(const Approximant& a, const FieldFn& v, double delta, int samples_per_face) {
  const int n = a.samples.grid.n;
  int per_axis = samples_per_face;
  if (n == 3) per_axis = std::max(1, static_cast<int>(std::lround(std::sqrt(double(samples_per_face)))));
  int total = 0;
  int bad = 0;
  for (int axis = 0; axis < n; ++axis)
    for (int side = 0; side < 2; ++side) {
      int count = 1;
      for (int b = 0; b < n - 1; ++b) count *= per_axis;
      for (int f = 0; f < count; ++f) {
        Vec3 x = Vec3::Zero();
        x[axis] = side ? a.region_hi[axis] : a.region_lo[axis];
        int rem = f;
        for (int b = 0; b < n; ++b) {
          if (b == axis) continue;
          const int k = rem % per_axis;
          rem /= per_axis;
          x[b] = a.region_lo[b] + (k + 0.5) / per_axis * (a.region_hi[b] - a.region_lo[b]);
        }
        const Eigen::VectorXd d = a.value(x) - v(x);
        ++total;
        if (d.lpNorm<Eigen::Infinity>() > delta) ++bad;
      }
    }
  return total ? static_cast<double>(bad) / total : 0.0;
}

double weak_strain_integral(const DirectionalStrainField& ds, const Vec3& region_lo, const Vec3& region_hi,
                            const std::function<double(const Vec3&)>& phi) {
  const ShiftedGrid& g = ds.grid;
  const int n = g.n;
  static const double gp[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double total = 0.0;
  ds.cubes.for_each([&](const Idx3& z) {
    const double val = ds.at_cube(z);
    if (val == 0.0) return;
    const Vec3 c0 = g.point(z);
    Vec3 lo = Vec3::Zero();
    Vec3 len = Vec3::Zero();
    double vol = 1.0;
    for (int a = 0; a < n; ++a) {
      lo[a] = std::max(c0[a], region_lo[a]);
      const double hi = std::min(c0[a] + g.h, region_hi[a]);
      len[a] = hi - lo[a];
      if (len[a] <= 0.0) return;
      vol *= len[a];
    }
    double acc = 0.0;
    int pts = 1;
    for (int a = 0; a < n; ++a) pts *= 3;
    for (int q = 0; q < pts; ++q) {
      Vec3 x = Vec3::Zero();
      double w = 1.0;
      int rem = q;
      for (int a = 0; a < n; ++a) {
        const int k = rem % 3;
        rem /= 3;
        x[a] = lo[a] + gp[k] * len[a];
        w *= gw[k];
      }
      acc += w * phi(x);
    }
    total += val * vol * acc;
  });
  return total;
}

}  // namespace platelab
