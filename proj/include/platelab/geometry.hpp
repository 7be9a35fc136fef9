#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "platelab/grid.hpp"

namespace platelab {

/// Flat (n-1)-simplex: a segment when n = 2, a triangle when n = 3.
struct Simplex {
  std::vector<Vec3> vertices;
  Vec3 normal = Vec3::Zero();
  double measure = 0.0;
};

/// Finite union of flat simplices standing in for a rectifiable crack set.
class CrackSurface {
 public:
  explicit CrackSurface(int n = 2);

  int dim() const { return n_; }
  bool empty() const { return simplices_.empty(); }
  const std::vector<Simplex>& simplices() const { return simplices_; }
  /// H^{n-1} measure: sum of simplex volumes.
  double measure() const;

  /// Adds a simplex with n vertices; throws if degenerate.
  void add(const std::vector<Vec3>& vertices);
  void add_segment(const Vec3& a, const Vec3& b) { add({a, b}); }
  void add_triangle(const Vec3& a, const Vec3& b, const Vec3& c) { add({a, b, c}); }

  /// One simplex per line, n*n whitespace-separated coordinates; '#' starts a comment.
  static CrackSurface load(const std::string& path, int n);
  void save(const std::string& path) const;

 private:
  int n_;
  std::vector<Simplex> simplices_;
};

/// True iff the closed segment [p,q] comes within eps of some simplex of the crack.
bool segment_hits_crack(const Vec3& p, const Vec3& q, const CrackSurface& crack, double eps);

/// Lattice direction of the form e_i, e_i + e_j (i < j) or e_i - e_j (i != j).
struct Direction {
  enum class Kind { axis, sum, difference };
  Kind kind = Kind::axis;
  int i = 0;
  int j = 0;
  Idx3 v{0, 0, 0};
  double norm() const;
  Vec3 vector() const { return Vec3(v[0], v[1], v[2]); }
};

/// The distinct vectors of {e_i, e_i +- e_j : i != j}: 5 in 2D, 12 in 3D.
std::vector<Direction> direction_set(int n);

/// p lies in the directional half-neighbourhood J^{h e} iff [p, p + h e] meets the crack.
bool in_half_neighborhood(const Vec3& p, const Direction& e, double h, const CrackSurface& crack);

/// Cubic lattice of spacing h shifted by h*y, restricted to cubes meeting a box.
struct ShiftedGrid {
  int n = 2;
  double h = 0.1;
  Vec3 y = Vec3::Zero();
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  void validate() const;
  /// Position of lattice point h z + h y.
  Vec3 point(const Idx3& z) const;
  /// Inclusive integer range of cubes h z + h y + (0,h)^n that meet the open box.
  std::pair<Idx3, Idx3> cube_range() const;
  double geometric_tolerance() const { return 1e-9 * h; }
};

/// Dense integer box of lattice indices with a flag per entry.
struct LatticeBox {
  Idx3 lo{0, 0, 0};
  Idx3 hi{0, 0, 0};  // inclusive
  int n = 2;

  bool contains(const Idx3& z) const;
  size_t size() const;
  size_t offset(const Idx3& z) const;
  template <class F>
  void for_each(F&& f) const {
    Idx3 z = lo;
    if (size() == 0) return;
    while (true) {
      f(z);
      int a = 0;
      for (; a < n; ++a) {
        if (++z[a] <= hi[a]) break;
        z[a] = lo[a];
      }
      if (a == n) break;
    }
  }
};

/// Per-lattice-point bitmask: bit d set iff the point lies in J^{h e_d}.
struct HalfNeighborhoodFlags {
  LatticeBox box;
  std::vector<Direction> directions;
  std::vector<std::uint32_t> bits;
  bool test(const Idx3& z, int d) const { return box.contains(z) && ((bits[box.offset(z)] >> d) & 1u); }
};

HalfNeighborhoodFlags half_neighborhood_flags(const ShiftedGrid& grid, const CrackSurface& crack,
                                              const LatticeBox& box);

struct CubeClassification {
  ShiftedGrid grid;
  LatticeBox cubes;
  std::vector<char> bad;
  int bad_count = 0;

  bool is_bad(const Idx3& z) const { return cubes.contains(z) && bad[cubes.offset(z)]; }
  std::vector<Idx3> bad_cubes() const;
};

CubeClassification classify_cubes(const ShiftedGrid& grid, const CrackSurface& crack);

/// h^n sum_e sum_z 1_{J^{he}}(z + hy) / (h |e|) over lattice points whose cube meets the box.
double discrete_jump_energy(const ShiftedGrid& grid, const CrackSurface& crack);

/// H^{n-1} of the boundary of the union of bad cubes (exposed faces only).
double bad_cube_boundary_measure(const CubeClassification& c);

/// Slab oracle: sum over directions of |e . nu| / |e| times the simplex measure.
double jump_energy_slab_oracle(const CrackSurface& crack);

/// Uniform offsets in [0,1)^n from a seeded generator.
std::vector<Vec3> sample_offsets(int n, int count, std::uint64_t seed);

struct OffsetStatistics {
  std::vector<double> jump_energy;
  std::vector<double> boundary_measure;
  std::vector<int> bad_count;
  double mean_jump_energy = 0.0;
  double stddev_jump_energy = 0.0;
  double mean_boundary_measure = 0.0;
};

/// Monte Carlo over lattice offsets: jump energies and bad-cube boundary measures.
OffsetStatistics offset_statistics(int n, double h, const Vec3& lo, const Vec3& hi, const CrackSurface& crack,
                                   int samples, std::uint64_t seed);

/// Sets whose shadows are measured: axis-aligned boxes (possibly flat) and simplices.
struct ProjectionSet {
  int n = 2;
  std::vector<std::pair<Vec3, Vec3>> boxes;
  std::vector<std::vector<Vec3>> polytopes;  // segments (n=2) or convex polygons (n=3)

  static ProjectionSet from_cubes(const CubeClassification& c);
  static ProjectionSet from_crack(const CrackSurface& crack);
  /// Intersection with the closed box [lo, hi].
  ProjectionSet clipped(const Vec3& lo, const Vec3& hi) const;
};

struct ProjectionMeasure {
  double value = 0.0;
  double error_bound = 0.0;
};

/// H^{n-1} of the orthogonal projection onto xi^perp, for xi = +-e_k.
/// Exact for boxes and for n = 2; polygons in 3D are rasterised at `raster`.
ProjectionMeasure projection_measure(const ProjectionSet& s, const Vec3& xi, double raster);
/// H^{n-1} of pi(a) minus pi(b).
ProjectionMeasure projection_measure_difference(const ProjectionSet& a, const ProjectionSet& b, const Vec3& xi,
                                                double raster);

}  // namespace platelab
