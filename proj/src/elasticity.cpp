#include "platelab/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace platelab {

SymMatrix::SymMatrix(int dim) : dim_(dim), m_(Eigen::Matrix3d::Zero()) {
  if (dim < 0 || dim > 3) throw std::invalid_argument("SymMatrix: order must be at most 3");
}

SymMatrix SymMatrix::symmetric_part(int dim, const Eigen::Matrix3d& m) {
  SymMatrix s(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return s;
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix s(dim);
  for (int i = 0; i < dim; ++i) s.set(i, i, 1.0);
  return s;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> entries) {
  SymMatrix s(static_cast<int>(entries.size()));
  int i = 0;
  for (double v : entries) {
    s.set(i, i, v);
    ++i;
  }
  return s;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += m_(i, i);
  return t;
}

double SymMatrix::dot(const SymMatrix& other) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) s += m_(i, j) * other.m_(i, j);
  return s;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.dim_ != dim_) throw std::invalid_argument("SymMatrix: order mismatch");
  SymMatrix r(dim_);
  r.m_ = m_ + o.m_;
  return r;
}

SymMatrix SymMatrix::operator*(double s) const {
  SymMatrix r(dim_);
  r.m_ = m_ * s;
  return r;
}

bool validate_lame(const LameParams& p) {
  if (p.n != 2 && p.n != 3) return false;
  if (!std::isfinite(p.lambda) || !std::isfinite(p.mu)) return false;
  return p.mu > 0.0 && 2.0 * p.mu + p.n * p.lambda > 0.0;
}

void require_valid_lame(const LameParams& p) {
  if (p.n != 2 && p.n != 3) throw std::invalid_argument("Lame parameters: n must be 2 or 3");
  if (!(p.mu > 0.0)) throw std::invalid_argument("Lame parameters: mu must be positive");
  if (!(2.0 * p.mu + p.n * p.lambda > 0.0))
    throw std::invalid_argument("Lame parameters: 2 mu + n lambda must be positive");
}

namespace {

void require_dim(const SymMatrix& e, int dim, const char* what) {
  if (e.dim() != dim)
    throw std::invalid_argument(std::string(what) + ": strain has order " + std::to_string(e.dim()) +
                                ", expected " + std::to_string(dim));
}

}  // namespace

SymMatrix apply_C(const LameParams& p, const SymMatrix& e) {
  require_dim(e, p.n, "apply_C");
  return SymMatrix::identity(p.n) * (p.lambda * e.trace()) + e * (2.0 * p.mu);
}

double quadratic_form_C(const LameParams& p, const SymMatrix& e) {
  require_dim(e, p.n, "quadratic_form_C");
  const double tr = e.trace();
  return p.lambda * tr * tr + 2.0 * p.mu * e.norm2();
}

double quadratic_form_C0(const LameParams& p, const SymMatrix& e) {
  require_dim(e, p.n - 1, "quadratic_form_C0");
  const double tr = e.trace();
  return 2.0 * p.lambda * p.mu / (p.lambda + 2.0 * p.mu) * tr * tr + 2.0 * p.mu * e.norm2();
}

double reduced_modulus_1d(const LameParams& p) {
  return 2.0 * p.lambda * p.mu / (p.lambda + 2.0 * p.mu) + 2.0 * p.mu;
}

SymMatrix embed_with_column(const SymMatrix& e, const Eigen::VectorXd& xi) {
  const int n = e.dim() + 1;
  if (xi.size() != n) throw std::invalid_argument("embed_with_column: xi must have size n");
  SymMatrix full(n);
  for (int i = 0; i < n - 1; ++i)
    for (int j = i; j < n - 1; ++j) full.set(i, j, e(i, j));
  for (int i = 0; i < n; ++i) full.set(i, n - 1, xi[i]);
  return full;
}

ReducedMinimum reduced_min_oracle(const LameParams& p, const SymMatrix& e) {
  require_dim(e, p.n - 1, "reduced_min_oracle");
  const int n = p.n;
  auto f = [&](const Eigen::VectorXd& xi) { return quadratic_form_C(p, embed_with_column(e, xi)); };

  // The objective is an exact quadratic in xi, so the gradient at zero and
  // the Hessian are recovered exactly from a handful of evaluations.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const double f0 = f(zero);
  Eigen::VectorXd b(n);
  Eigen::MatrixXd hess(n, n);
  std::vector<double> fplus(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd ei = zero;
    ei[i] = 1.0;
    fplus[i] = f(ei);
    const double fminus = f(-ei);
    b[i] = 0.5 * (fplus[i] - fminus);
    hess(i, i) = fplus[i] + fminus - 2.0 * f0;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd eij = zero;
      eij[i] = 1.0;
      eij[j] = 1.0;
      hess(i, j) = hess(j, i) = f(eij) - fplus[i] - fplus[j] + f0;
    }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff()))
    throw std::invalid_argument("reduced_min_oracle: singular stationarity system (invalid Lame parameters)");
  ReducedMinimum r;
  r.xi = ldlt.solve(-b);
  r.value = f(r.xi);
  return r;
}

double phi_rho(double rho, const Eigen::VectorXd& nu) {
  if (!(rho > 0.0)) throw std::invalid_argument("phi_rho: rho must be positive");
  const Eigen::Index n = nu.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) s += nu[i] * nu[i];
  const double last = nu[n - 1] / rho;
  return std::sqrt(s + last * last);
}

SymMatrix rescale_strain(const SymMatrix& e, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rescale_strain: rho must be positive");
  const int n = e.dim();
  SymMatrix r = e;
  for (int a = 0; a < n - 1; ++a) r.set(a, n - 1, e(a, n - 1) / rho);
  r.set(n - 1, n - 1, e(n - 1, n - 1) / (rho * rho));
  return r;
}

namespace {

NodalField remap_thickness(const NodalField& u, double from_half, double to_half,
                           double normal_factor) {
  const BoxGrid& g = u.grid;
  const int n = g.dim();
  if (u.components != n) throw std::invalid_argument("rescale_displacement: field must have n components");
  const double tol = 1e-12 * std::max(1.0, from_half);
  if (std::abs(g.lo(n - 1) + from_half) > tol || std::abs(g.hi(n - 1) - from_half) > tol)
    throw std::invalid_argument("rescale_displacement: sampling domain must span the thickness (-" +
                                std::to_string(from_half) + ", " + std::to_string(from_half) + ")");
  Vec3 lo = g.lo();
  Vec3 hi = g.hi();
  lo[n - 1] = -to_half;
  hi[n - 1] = to_half;
  Idx3 cells{g.cells(0), g.cells(1), g.cells(2)};
  NodalField v(BoxGrid(n, cells, lo, hi), n);
  v.values = u.values;
  v.broken = u.broken;
  for (int c = 0; c < g.num_cells(); ++c)
    for (int k = 0; k < g.corners(); ++k) v.at(c, k, n - 1) = normal_factor * u.at(c, k, n - 1);
  return v;
}

}  // namespace

NodalField rescale_displacement(const NodalField& u, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rescale_displacement: rho must be positive");
  return remap_thickness(u, 0.5 * rho, 0.5, rho);
}

NodalField unrescale_displacement(const NodalField& v, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("unrescale_displacement: rho must be positive");
  return remap_thickness(v, 0.5, 0.5 * rho, 1.0 / rho);
}

}  // namespace platelab
