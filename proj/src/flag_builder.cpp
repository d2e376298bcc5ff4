#include "flagcd/flag_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flagcd/errors.hpp"

namespace flagcd {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

void screen_positive(const ScalarKernel& k, const char* slot) {
  const auto grid = screening_grid(k.domain());
  const Eigen::MatrixXcd g = gram_matrix(k, grid);
  const double scale = std::max(1.0, g.diagonal().real().cwiseAbs().maxCoeff());
  const auto res = check_positive_definite(k, grid, 1e-9 * scale);
  if (!res.positive) {
    throw NumericError(std::string("kernel ") + slot + " (" + k.label() +
                       ") fails positivity screening: min eigenvalue " +
                       std::to_string(res.min_eigenvalue));
  }
}

}  // namespace

FlagKernel::FlagKernel(ScalarKernel k0, ScalarKernel k1) : k0_(std::move(k0)), k1_(std::move(k1)) {
  if (!(k0_.domain() == k1_.domain())) throw DomainError("flag kernel slots must share a domain");
}

Eigen::Matrix2cd FlagKernel::operator()(cplx z, cplx w) const {
  Eigen::Matrix2cd m;
  m(0, 0) = k0_.jet(z, w, 0, 0);
  m(0, 1) = k0_.jet(z, w, 0, 1);
  m(1, 0) = k0_.jet(z, w, 1, 0);
  m(1, 1) = k0_.jet(z, w, 1, 1) + k1_.jet(z, w, 0, 0);
  return m;
}

std::vector<cplx> screening_grid(const DiskDomain& domain) {
  std::vector<cplx> pts;
  pts.reserve(12);
  for (int r = 1; r <= 3; ++r) {
    const double radius = domain.max_eval_radius * r / 3.0;
    for (int a = 0; a < 4; ++a)
      pts.push_back(std::polar(radius, std::numbers::pi / 4 + a * std::numbers::pi / 2));
  }
  return pts;
}

FlagKernel build_flag_kernel(const ScalarKernel& k0, const ScalarKernel& k1) {
  if (!(k0.domain() == k1.domain())) throw DomainError("flag kernel slots must share a domain");
  screen_positive(k0, "K0");
  screen_positive(k1, "K1");
  return FlagKernel(k0, k1);
}

Eigen::Matrix2cd eval_flag_kernel(const FlagKernel& fk, cplx z, cplx w) { return fk(z, w); }

FlagKernel build_jet_localization_kernel(const ScalarKernel& k) { return build_flag_kernel(k, k); }

JetActionMatrix jet_action_matrix(std::span<const cplx> f, cplx w, int k) {
  if (k < 2) throw DomainError("jet action needs k >= 2");
  JetActionMatrix out{k, Eigen::MatrixXcd::Zero(k, k)};
  for (int i = 0; i < k; ++i)
    for (int j = 0; j <= i; ++j)
      out.entries(i, j) = binomial(i + 1, i - j) * polynomial_derivative(f, w, i - j);
  return out;
}

FrameGram frame_gram(const FlagKernel& fk, cplx w) {
  const Eigen::Matrix2cd m = fk(w, w);
  FrameGram g;
  g.w = w;
  g.g00 = m(0, 0).real();
  g.g01 = m(0, 1);
  g.g11 = m(1, 1).real();
  g.t1_norm_sq = fk.k1().diagonal(w);
  // Second route to <gamma1, gamma0>: the raw K0 jet, independent of the
  // assembled matrix.
  g.t1_gamma0 = fk.k0().jet(w, w, 0, 1) - g.g01;
  return g;
}

Eigen::MatrixXcd block_gram_matrix(const FlagKernel& fk, std::span<const cplx> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (points[i] == points[j]) throw DomainError("Gram points must be pairwise distinct");
  Eigen::MatrixXcd g(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g.block<2, 2>(2 * i, 2 * j) = fk(points[i], points[j]);
  return g;
}

}  // namespace flagcd
