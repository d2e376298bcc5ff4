#pragma once

// Scalar diagonal kernels K(z,w) = sum_n a_n (z conj(w))^n on a centred disk,
// with exact term-wise Wirtinger jets and finite-set positivity checks.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flagcd {

using cplx = std::complex<double>;

inline constexpr int kDefaultTerms = 64;
inline constexpr int kMaxJetOrder = 4;
inline constexpr double kGuardFraction = 0.95;

/// Evaluation disk |z| <= max_eval_radius inside the disk of radius `radius`.
struct DiskDomain {
  double radius = 1.0;
  double max_eval_radius = kGuardFraction;

  /// Disk of the given radius with the default guard band.
  static DiskDomain with_radius(double radius);

  /// Throws DomainError unless 0 < max_eval_radius <= 0.95 * radius.
  void validate() const;
  bool admits(cplx z) const noexcept;

  bool operator==(const DiskDomain&) const = default;
};

/// Diagonal kernel given by power-series coefficients, optionally multiplied
/// by a holomorphic gauge f(z) conj(f(w)) (see gauge_transform).
class ScalarKernel {
 public:
  ScalarKernel(std::vector<double> coefficients, DiskDomain domain, std::string label = {});

  std::span<const double> coefficients() const noexcept { return coefficients_; }
  std::size_t size() const noexcept { return coefficients_.size(); }
  const DiskDomain& domain() const noexcept { return domain_; }
  const std::string& label() const noexcept { return label_; }

  /// Gauge polynomial coefficients; empty means f = 1.
  std::span<const cplx> gauge() const noexcept { return gauge_; }
  bool is_gauged() const noexcept { return !gauge_.empty(); }

  /// d^p/dz^p d^q/dconj(w)^q K(z,w). Throws DomainError outside the guard
  /// band or for orders above kMaxJetOrder.
  cplx jet(cplx z, cplx w, int p = 0, int q = 0) const;

  /// K(w,w), real.
  double diagonal(cplx w) const;

  ScalarKernel with_label(std::string label) const;

 private:
  friend ScalarKernel gauge_transform(const ScalarKernel& kernel, std::span<const cplx> f);

  cplx series_jet(cplx z, cplx w, int p, int q) const;

  std::vector<double> coefficients_;
  DiskDomain domain_;
  std::string label_;
  std::vector<cplx> gauge_;
};

/// Kernel with exactly the given coefficients. Positivity is not checked.
ScalarKernel make_power_series_kernel(std::vector<double> coefficients,
                                      DiskDomain domain = {}, std::string label = "power_series");

/// scale * (1 - z conj(w))^(-lambda), truncated to `terms` coefficients.
ScalarKernel make_generalized_szego(double lambda, double scale = 1.0, int terms = kDefaultTerms,
                                    DiskDomain domain = {});

/// exp(z conj(w)) truncated: a_n = 1/n!.
ScalarKernel make_fock_kernel(double scale = 1.0, int terms = kDefaultTerms, DiskDomain domain = {});

cplx eval_kernel_jet(const ScalarKernel& kernel, cplx z, cplx w, int p, int q);

/// Upper bound on the dropped tail sum_{n>=M} a_n r^n of the series at
/// r = |z conj(w)|, assuming the coefficient ratios a_{n+1}/a_n are
/// non-increasing from the last stored pair onward. Returns +inf when the
/// extrapolated geometric tail diverges.
double truncation_tail_bound(const ScalarKernel& kernel, double r);

/// Entry (i,j) = K(p_i, p_j). Points must be admissible and pairwise distinct.
Eigen::MatrixXcd gram_matrix(const ScalarKernel& kernel, std::span<const cplx> points);

struct PositivityResult {
  bool positive = false;
  double min_eigenvalue = 0.0;
};

/// positive == (smallest Gram eigenvalue >= -tol).
PositivityResult check_positive_definite(const ScalarKernel& kernel, std::span<const cplx> points,
                                         double tol);

/// f(z) conj(f(w)) K(z,w) for a polynomial f with f(0) != 0 and no zeros in
/// the closed guard disk (checked by a winding-number count on its boundary).
/// Gauges compose by polynomial multiplication.
ScalarKernel gauge_transform(const ScalarKernel& kernel, std::span<const cplx> f);

/// k-th derivative of the polynomial sum_n c_n z^n at z.
cplx polynomial_derivative(std::span<const cplx> coefficients, cplx z, int k);

/// Integer power by repeated multiplication; conj(ipow(z,n)) == ipow(conj(z),n) exactly.
cplx ipow(cplx z, int n);

}  // namespace flagcd
