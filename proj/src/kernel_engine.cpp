#include "flagcd/kernel_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flagcd/errors.hpp"
#include "flagcd/format.hpp"

namespace flagcd {

namespace {

// n!/(n-k)!
double falling_factorial(int n, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= static_cast<double>(n - j);
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return falling_factorial(n, k) / falling_factorial(k, k);
}

void check_order(int p, int q) {
  if (p < 0 || q < 0 || p > kMaxJetOrder || q > kMaxJetOrder) {
    throw DomainError("jet order (" + std::to_string(p) + "," + std::to_string(q) +
                      ") outside supported range 0.." + std::to_string(kMaxJetOrder));
  }
}

std::vector<cplx> multiply_polynomials(std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<cplx> out(a.size() + b.size() - 1, cplx{});
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Number of zeros of f inside |z| < r, by the argument principle on a
// sampled circle. Throws if f nearly vanishes on the circle itself.
int zeros_inside(std::span<const cplx> f, double r) {
  constexpr int kSamples = 4096;
  double fmax = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n)
    fmax += std::abs(f[n]) * std::pow(r, static_cast<double>(n));
  double total = 0.0;
  cplx prev = polynomial_derivative(f, cplx{r, 0.0}, 0);
  for (int s = 1; s <= kSamples; ++s) {
    const double theta = 2.0 * std::numbers::pi * s / kSamples;
    const cplx cur = polynomial_derivative(f, std::polar(r, theta), 0);
    if (std::abs(cur) <= 1e-12 * fmax) throw DomainError("gauge vanishes on the guard circle");
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace

DiskDomain DiskDomain::with_radius(double radius) {
  DiskDomain d{radius, kGuardFraction * radius};
  d.validate();
  return d;
}

void DiskDomain::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("disk radius must be positive");
  if (!(max_eval_radius > 0.0) || max_eval_radius > kGuardFraction * radius * (1.0 + 1e-15)) {
    throw DomainError("max_eval_radius must lie in (0, 0.95*radius]");
  }
}

bool DiskDomain::admits(cplx z) const noexcept { return std::abs(z) <= max_eval_radius; }

cplx ipow(cplx z, int n) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

cplx polynomial_derivative(std::span<const cplx> coefficients, cplx z, int k) {
  cplx acc{};
  for (int n = static_cast<int>(coefficients.size()) - 1; n >= k; --n) {
    acc = acc * z + coefficients[n] * falling_factorial(n, k);
  }
  return acc;
}

ScalarKernel::ScalarKernel(std::vector<double> coefficients, DiskDomain domain, std::string label)
    : coefficients_(std::move(coefficients)), domain_(domain), label_(std::move(label)) {
  domain_.validate();
  if (coefficients_.empty()) throw DomainError("kernel needs at least one coefficient");
  if (!(coefficients_[0] > 0.0)) throw DomainError("kernel coefficient a0 must be positive");
  for (double a : coefficients_)
    if (!std::isfinite(a)) throw DomainError("kernel coefficients must be finite");
}

cplx ScalarKernel::series_jet(cplx z, cplx w, int p, int q) const {
  const int m = std::max(p, q);
  const int terms = static_cast<int>(coefficients_.size());
  if (m >= terms) return {};
  const cplx wbar = std::conj(w);
  const cplx u = z * wbar;
  // Horner in u over b_n = a_n * (n!/(n-p)! * n!/(n-q)!); the factorial
  // product is symmetric in (p,q) so Hermitian symmetry holds bitwise.
  cplx acc{};
  for (int n = terms - 1; n >= m; --n) {
    const double b = coefficients_[n] * (falling_factorial(n, p) * falling_factorial(n, q));
    acc = acc * u + b;
  }
  return ipow(z, m - p) * ipow(wbar, m - q) * acc;
}

cplx ScalarKernel::jet(cplx z, cplx w, int p, int q) const {
  check_order(p, q);
  if (!domain_.admits(z) || !domain_.admits(w)) {
    throw DomainError("evaluation point outside guard band |z| <= " +
                      format_shortest(domain_.max_eval_radius));
  }
  if (gauge_.empty()) return series_jet(z, w, p, q);
  // Leibniz rule on f(z) * conj(f(w)) * K(z,w).
  cplx total{};
  for (int i = 0; i <= p; ++i) {
    const cplx fz = polynomial_derivative(gauge_, z, i);
    for (int j = 0; j <= q; ++j) {
      const cplx fw = std::conj(polynomial_derivative(gauge_, w, j));
      total += binomial(p, i) * binomial(q, j) * fz * fw * series_jet(z, w, p - i, q - j);
    }
  }
  return total;
}

double ScalarKernel::diagonal(cplx w) const { return jet(w, w, 0, 0).real(); }

ScalarKernel ScalarKernel::with_label(std::string label) const {
  ScalarKernel k = *this;
  k.label_ = std::move(label);
  return k;
}

ScalarKernel make_power_series_kernel(std::vector<double> coefficients, DiskDomain domain,
                                      std::string label) {
  return ScalarKernel(std::move(coefficients), domain, std::move(label));
}

ScalarKernel make_generalized_szego(double lambda, double scale, int terms, DiskDomain domain) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  if (terms < 2) throw DomainError("generalized Szego kernel needs at least 2 terms");
  std::vector<double> a(static_cast<std::size_t>(terms));
  a[0] = scale;
  for (int n = 0; n + 1 < terms; ++n) a[n + 1] = a[n] * (lambda + n) / (n + 1);
  return ScalarKernel(std::move(a), domain, "szego(lambda=" + format_shortest(lambda) + ")");
}

ScalarKernel make_fock_kernel(double scale, int terms, DiskDomain domain) {
  if (!(scale > 0.0)) throw DomainError("scale must be positive");
  if (terms < 2) throw DomainError("Fock kernel needs at least 2 terms");
  std::vector<double> a(static_cast<std::size_t>(terms));
  a[0] = scale;
  for (int n = 0; n + 1 < terms; ++n) a[n + 1] = a[n] / (n + 1);
  return ScalarKernel(std::move(a), domain, "fock");
}

cplx eval_kernel_jet(const ScalarKernel& kernel, cplx z, cplx w, int p, int q) {
  return kernel.jet(z, w, p, q);
}

double truncation_tail_bound(const ScalarKernel& kernel, double r) {
  const auto a = kernel.coefficients();
  const std::size_t m = a.size();
  if (m < 2) return r == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double ratio = std::abs(a[m - 1] / a[m - 2]);
  if (ratio * r >= 1.0) return std::numeric_limits<double>::infinity();
  const double next = std::abs(a[m - 1]) * ratio;
  return next * std::pow(r, static_cast<double>(m)) / (1.0 - ratio * r);
}

Eigen::MatrixXcd gram_matrix(const ScalarKernel& kernel, std::span<const cplx> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!kernel.domain().admits(points[i])) throw DomainError("Gram point outside guard band");
    for (std::size_t j = 0; j < i; ++j)
      if (points[i] == points[j]) throw DomainError("Gram points must be pairwise distinct");
  }
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = kernel.jet(points[i], points[j], 0, 0);
  return g;
}

PositivityResult check_positive_definite(const ScalarKernel& kernel, std::span<const cplx> points,
                                         double tol) {
  if (!(tol > 0.0)) throw DomainError("positivity tolerance must be positive");
  const Eigen::MatrixXcd g = gram_matrix(kernel, points);
  if (g.size() == 0) return {true, 0.0};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return {lo >= -tol, lo};
}

ScalarKernel gauge_transform(const ScalarKernel& kernel, std::span<const cplx> f) {
  if (f.empty() || f[0] == cplx{}) throw DomainError("gauge must satisfy f(0) != 0");
  if (zeros_inside(f, kernel.domain().max_eval_radius) != 0)
    throw DomainError("gauge has zeros inside the guard disk");
  ScalarKernel out = kernel;
  out.gauge_ = kernel.gauge_.empty() ? std::vector<cplx>(f.begin(), f.end())
                                     : multiply_polynomials(kernel.gauge_, f);
  out.label_ = kernel.label_ + "*gauge";
  return out;
}

}  // namespace flagcd
