#include <cmath>
#include <stdexcept>

#include "platelab/interpolation.hpp"
#include "platelab/lab.hpp"

namespace platelab {

JumpEnergyStudy jump_energy_study(const CrackSurface& crack, double h, const Vec3& lo, const Vec3& hi, int samples,
                                  std::uint64_t seed) {
  JumpEnergyStudy st;
  st.stats = offset_statistics(crack.dim(), h, lo, hi, crack, samples, seed);
  st.oracle = jump_energy_slab_oracle(crack);
  const double gap = std::abs(st.stats.mean_jump_energy - st.oracle);
  st.rel_error = st.oracle != 0.0 ? gap / st.oracle : gap;
  return st;
}

Table JumpEnergyStudy::table() const {
  Table t;
  t.header = {"sample", "jump_energy", "boundary_measure", "bad_count"};
  for (size_t k = 0; k < stats.jump_energy.size(); ++k)
    t.add_row({fmt(static_cast<int>(k)), fmt(stats.jump_energy[k]), fmt(stats.boundary_measure[k]),
               fmt(stats.bad_count[k])});
  return t;
}

ProjectionSweep projection_sweep(const CrackSurface& crack, const std::vector<double>& hs, const Vec3& y,
                                 const Vec3& lo, const Vec3& hi, int axis) {
  const int n = crack.dim();
  if (axis < 0 || axis >= n) throw std::invalid_argument("projection sweep: axis out of range");
  if (hs.empty()) throw std::invalid_argument("projection sweep: empty h list");
  Vec3 xi = Vec3::Zero();
  xi[axis] = 1.0;
  ProjectionSweep sw;
  for (double h : hs) {
    const ShiftedGrid g{n, h, y, lo, hi};
    g.validate();
    const CubeClassification c = classify_cubes(g, crack);
    const ProjectionSet set = ProjectionSet::from_cubes(c).clipped(lo, hi);
    const ProjectionMeasure m = projection_measure(set, xi, h / 8.0);
    ProjectionRow row;
    row.h = h;
    row.bad_count = c.bad_count;
    row.measure = m.value;
    row.error_bound = m.error_bound;
    if (!sw.rows.empty() && sw.rows.back().measure > 0.0) row.ratio = m.value / sw.rows.back().measure;
    sw.rows.push_back(row);
  }
  return sw;
}

Table ProjectionSweep::table() const {
  Table t;
  t.header = {"h", "bad_count", "measure", "error_bound", "ratio"};
  for (const auto& r : rows)
    t.add_row({fmt(r.h), fmt(r.bad_count), fmt(r.measure), fmt(r.error_bound), fmt(r.ratio)});
  return t;
}

FieldFn PiecewiseAffine::fn() const {
  const PiecewiseAffine v = *this;
  return [v](const Vec3& x) {
    Vec3 y = v.A * x + v.b;
    if (x.dot(v.nu) > v.offset) y += v.jump;
    return Eigen::VectorXd(y.head(v.n));
  };
}

CrackSurface PiecewiseAffine::crack(const Vec3& lo, const Vec3& hi) const {
  int axis = -1;
  for (int a = 0; a < n; ++a)
    if (std::abs(std::abs(nu[a]) - 1.0) < 1e-14) axis = a;
  if (axis < 0) throw std::invalid_argument("piecewise affine field: crack normal must be a coordinate axis");
  const double c = offset * nu[axis];
  CrackSurface s(n);
  if (n == 2) {
    Vec3 a = lo, b = hi;
    a[axis] = b[axis] = c;
    a[2] = b[2] = 0.0;
    s.add_segment(a, b);
  } else if (n == 3) {
    const int u = (axis + 1) % 3, w = (axis + 2) % 3;
    Vec3 p00 = Vec3::Zero();
    p00[axis] = c;
    Vec3 p10 = p00, p01 = p00, p11 = p00;
    p00[u] = lo[u], p00[w] = lo[w];
    p10[u] = hi[u], p10[w] = lo[w];
    p01[u] = lo[u], p01[w] = hi[w];
    p11[u] = hi[u], p11[w] = hi[w];
    s.add_triangle(p00, p10, p11);
    s.add_triangle(p00, p11, p01);
  } else {
    throw std::invalid_argument("piecewise affine field: n must be 2 or 3");
  }
  return s;
}

ApproximationSweep approximation_sweep(const PiecewiseAffine& v, const std::vector<double>& hs, const Vec3& y,
                                       const Vec3& domain_lo, const Vec3& domain_hi, const Vec3& region_lo,
                                       const Vec3& region_hi, double delta) {
  if (hs.empty()) throw std::invalid_argument("approximation sweep: empty h list");
  const int n = v.n;
  const FieldFn f = v.fn();
  const CrackSurface crack = v.crack(domain_lo, domain_hi);
  const Direction e0 = direction_set(n).front();

  double volume = 1.0;
  ApproximationSweep sw;
  sw.weak_oracle = v.A(0, 0);
  for (int a = 0; a < n; ++a) {
    volume *= region_hi[a] - region_lo[a];
    sw.weak_oracle *= 2.0 * (region_hi[a] - region_lo[a]) / M_PI;
  }
  auto phi = [&](const Vec3& x) {
    double s = 1.0;
    for (int a = 0; a < n; ++a) s *= std::sin(M_PI * (x[a] - region_lo[a]) / (region_hi[a] - region_lo[a]));
    return s;
  };

  for (double h : hs) {
    const Approximant a = build_approximant(f, n, h, y, crack, domain_lo, domain_hi, region_lo, region_hi);
    const DirectionalStrainField ds = directional_strain(a.samples, e0, crack);
    ApproximationRow row;
    row.h = h;
    row.bad_count = a.classification.bad_count;
    row.mismatch = mismatch_measure(a, f, delta);
    row.mismatch_fraction = row.mismatch / volume;
    row.weak_integral = weak_strain_integral(ds, region_lo, region_hi, phi);
    row.weak_error = std::abs(row.weak_integral - sw.weak_oracle);
    row.strain_bound_ratio = strain_bound_check(a, ds, 200, 7).max_ratio;
    int probed = 0;
    row.structure_passed = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const StructureReport rep = structure_preservation_check(f, a, i, j);
        if (!rep.precondition) continue;
        ++probed;
        row.structure_passed = row.structure_passed && rep.passed;
      }
    if (probed == 0) row.structure_passed = false;
    if (!sw.rows.empty() && !(row.mismatch < sw.rows.back().mismatch)) sw.mismatch_monotone = false;
    sw.rows.push_back(row);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : sw.rows) {
    if (!(r.weak_error > 0.0)) continue;
    const double lx = std::log(r.h), ly = std::log(r.weak_error);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++m;
  }
  if (m >= 2) sw.weak_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return sw;
}

Table ApproximationSweep::table() const {
  Table t;
  t.header = {"h",          "bad_count",  "mismatch",         "mismatch_fraction", "weak_integral",
              "weak_error", "structure", "strain_bound_ratio"};
  for (const auto& r : rows)
    t.add_row({fmt(r.h), fmt(r.bad_count), fmt(r.mismatch), fmt(r.mismatch_fraction), fmt(r.weak_integral),
               fmt(r.weak_error), fmt(r.structure_passed ? 1 : 0), fmt(r.strain_bound_ratio)});
  return t;
}

}  // namespace platelab
