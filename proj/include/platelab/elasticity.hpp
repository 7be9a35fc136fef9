#pragma once

#include <utility>

#include <Eigen/Dense>

#include "platelab/grid.hpp"

namespace platelab {

/// Isotropic Lamé coefficients for an n-dimensional body (n in {2,3}).
struct LameParams {
  double lambda = 1.0;
  double mu = 1.0;
  int n = 2;
};

/// Symmetric matrix of order 1..3. Entries are always stored symmetrically.
class SymMatrix {
 public:
  explicit SymMatrix(int dim = 0);
  /// Symmetric part of the leading dim x dim block of `m`.
  static SymMatrix symmetric_part(int dim, const Eigen::Matrix3d& m);
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(std::initializer_list<double> entries);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Eigen::Matrix3d& matrix() const { return m_; }

  double trace() const;
  /// Frobenius inner product.
  double dot(const SymMatrix& other) const;
  double norm2() const { return dot(*this); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;

 private:
  int dim_;
  Eigen::Matrix3d m_;
};

bool validate_lame(const LameParams& p);
/// Throws std::invalid_argument naming the violated constraint.
void require_valid_lame(const LameParams& p);

SymMatrix apply_C(const LameParams& p, const SymMatrix& e);
double quadratic_form_C(const LameParams& p, const SymMatrix& e);

/// Closed form of the reduced plate tensor acting on an (n-1)x(n-1) strain.
double quadratic_form_C0(const LameParams& p, const SymMatrix& e);
/// Scalar C0 for n = 2 (the (n-1) strain is 1x1).
double reduced_modulus_1d(const LameParams& p);

struct ReducedMinimum {
  double value = 0.0;
  Eigen::VectorXd xi;  // size n: transverse shear entries then the normal entry
};

/// Minimises C E_xi . E_xi over the out-of-plane column xi by solving the
/// stationarity system assembled from evaluations of quadratic_form_C.
ReducedMinimum reduced_min_oracle(const LameParams& p, const SymMatrix& e);

/// Embeds an (n-1) strain into n dimensions with the last row/column set to xi.
SymMatrix embed_with_column(const SymMatrix& e, const Eigen::VectorXd& xi);

/// Anisotropic surface weight |(nu_1, ..., nu_{n-1}, nu_n / rho)|.
double phi_rho(double rho, const Eigen::VectorXd& nu);

/// Strain of the rescaled field expressed in physical scaling: in-plane
/// entries unchanged, mixed entries divided by rho, normal entry by rho^2.
SymMatrix rescale_strain(const SymMatrix& e, double rho);

/// Pulls a displacement on the thin domain back to the unit-thickness domain:
/// v(x) = (u_1, ..., u_{n-1}, rho u_n) evaluated at (x', rho x_n).
/// The input grid must be centred in x_n with thickness rho.
NodalField rescale_displacement(const NodalField& u, double rho);
/// Inverse map of rescale_displacement.
NodalField unrescale_displacement(const NodalField& v, double rho);

}  // namespace platelab
