#include "flagcd/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "flagcd/errors.hpp"

namespace flagcd {

namespace {

constexpr double kImaginaryResidueLimit = 1e-9;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double falling_factorial(int n, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= static_cast<double>(n - j);
  return r;
}

void require_grid(std::span<const cplx> grid) {
  if (grid.empty()) throw DomainError("evaluation grid is empty");
}

bool is_tridiagonal(const OperatorModel& model) {
  return model.shape == ShapeTag::fb2 || model.shape == ShapeTag::fbn_tridiagonal;
}

// Coefficient columns of t_i(w) = sum_m C.col(m) w^m, i = 0..n-1.
std::vector<Eigen::MatrixXcd> section_coefficients(const OperatorModel& model) {
  const int n = model.n();
  const int N = model.block_size();
  std::vector<Eigen::MatrixXcd> c(static_cast<std::size_t>(n));
  Eigen::VectorXcd u(N);
  u(0) = 1.0;
  const auto& last = model.blocks.back().weights;
  for (int m = 1; m < N; ++m) u(m) = u(m - 1) / last[static_cast<std::size_t>(m - 1)];
  c.back() = u.asDiagonal();
  for (int i = n - 1; i > 0; --i) {
    const auto* s = model.coupling(i - 1, i);
    if (s == nullptr) throw DomainError("missing superdiagonal coupling");
    c[static_cast<std::size_t>(i - 1)] = *s * c[static_cast<std::size_t>(i)];
  }
  return c;
}

// j-th derivative of w -> sum_m C.col(m) w^m.
Eigen::VectorXcd section_derivative(const Eigen::MatrixXcd& c, cplx w, int j) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(c.rows());
  for (Eigen::Index m = c.cols() - 1; m >= j; --m)
    v = v * w + c.col(m) * falling_factorial(static_cast<int>(m), j);
  return v;
}

// gamma_m(w) = (-1)^m m! sum_j (-1)^j / j! t_{m-j}^{(j)}(w), block m-j.
Eigen::MatrixXcd holomorphic_frame(const OperatorModel& model,
                                   const std::vector<Eigen::MatrixXcd>& sections, cplx w) {
  const int n = model.n();
  const int N = model.block_size();
  Eigen::MatrixXcd frame = Eigen::MatrixXcd::Zero(n * N, n);
  for (int m = 0; m < n; ++m) {
    const double outer = (m % 2 == 0 ? 1.0 : -1.0) * factorial(m);
    for (int j = 0; j <= m; ++j) {
      const double inner = (j % 2 == 0 ? 1.0 : -1.0) / factorial(j);
      frame.block((m - j) * N, m, N, 1) +=
          outer * inner * section_derivative(sections[static_cast<std::size_t>(m - j)], w, j);
    }
  }
  return frame;
}

}  // namespace

std::vector<cplx> default_grid(std::span<const double> radii, int angles) {
  static constexpr double kDefaultRadii[] = {0.1, 0.2, 0.3, 0.4};
  if (radii.empty()) radii = kDefaultRadii;
  if (angles < 1) throw DomainError("grid needs at least one angle");
  std::vector<cplx> pts;
  pts.reserve(radii.size() * static_cast<std::size_t>(angles));
  for (double r : radii)
    for (int a = 0; a < angles; ++a) pts.push_back(std::polar(r, 2.0 * std::numbers::pi * a / angles));
  return pts;
}

double curvature(const ScalarKernel& kernel, cplx w) {
  const cplx f = kernel.jet(w, w, 0, 0);
  if (!(f.real() > 0.0)) throw NumericError("kernel diagonal is not positive at the curvature point");
  const cplx fz = kernel.jet(w, w, 1, 0);
  const cplx fw = kernel.jet(w, w, 0, 1);
  const cplx fzw = kernel.jet(w, w, 1, 1);
  const cplx value = -(f * fzw - fz * fw) / (f * f);
  if (std::abs(value.imag()) > kImaginaryResidueLimit * std::max(1.0, std::abs(value.real())))
    throw NumericError("curvature has an imaginary residue; jet evaluation is inconsistent");
  return value.real();
}

CurvatureGrid curvature_grid(const ScalarKernel& kernel, std::span<const cplx> points) {
  CurvatureGrid g{{points.begin(), points.end()}, {}, kernel.label()};
  g.values.reserve(points.size());
  for (const auto& w : points) g.values.push_back(curvature(kernel, w));
  return g;
}

double ratio_invariant(const ScalarKernel& k0, const ScalarKernel& k1, cplx w) {
  const double d0 = k0.diagonal(w);
  const double d1 = k1.diagonal(w);
  if (!(d0 > 0.0) || !(d1 > 0.0)) throw NumericError("ratio invariant needs positive diagonals");
  return d0 / d1;
}

RatioGrid ratio_grid(const ScalarKernel& k0, const ScalarKernel& k1, std::span<const cplx> points) {
  RatioGrid g{{points.begin(), points.end()}, {}, k0.label() + "/" + k1.label()};
  g.values.reserve(points.size());
  for (const auto& w : points) g.values.push_back(ratio_invariant(k0, k1, w));
  return g;
}

double second_fundamental_form_coeff(const ScalarKernel& k0, const ScalarKernel& k1, cplx z) {
  const double k = curvature(k0, z);
  const double radicand = -k + 1.0 / ratio_invariant(k0, k1, z);
  if (!(radicand > 0.0)) throw NumericError("second fundamental form radicand is not positive");
  return k / std::sqrt(radicand);
}

RatioGrid second_fundamental_form_grid(const ScalarKernel& k0, const ScalarKernel& k1,
                                       std::span<const cplx> points) {
  RatioGrid g{{points.begin(), points.end()}, {}, "sff(" + k0.label() + "," + k1.label() + ")"};
  g.values.reserve(points.size());
  for (const auto& z : points) g.values.push_back(second_fundamental_form_coeff(k0, k1, z));
  return g;
}

double relative_gap(double a, double b) {
  if (a == b) return 0.0;
  const double denom = std::min(std::abs(a), std::abs(b));
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(a - b) / denom;
}

EquivalenceVerdict equivalent_fbn(std::span<const ScalarKernel> a, std::span<const ScalarKernel> b,
                                  std::span<const cplx> grid, double tol) {
  require_grid(grid);
  if (a.size() != b.size()) throw DomainError("kernel chains have different lengths");
  if (a.size() < 2) throw DomainError("equivalence test needs at least two blocks");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  EquivalenceVerdict v;
  v.grid.assign(grid.begin(), grid.end());
  v.tol = tol;
  v.max_ratio_gap.assign(a.size() - 1, 0.0);
  for (const auto& w : grid) {
    v.max_curvature_gap = std::max(v.max_curvature_gap, relative_gap(curvature(a[0], w), curvature(b[0], w)));
    for (std::size_t i = 1; i < a.size(); ++i) {
      const double gap = relative_gap(ratio_invariant(a[i - 1], a[i], w), ratio_invariant(b[i - 1], b[i], w));
      v.max_ratio_gap[i - 1] = std::max(v.max_ratio_gap[i - 1], gap);
    }
  }
  v.equivalent = v.max_curvature_gap <= tol &&
                 std::all_of(v.max_ratio_gap.begin(), v.max_ratio_gap.end(), [&](double g) { return g <= tol; });
  return v;
}

EquivalenceVerdict equivalent_fb2(const FlagKernel& a, const FlagKernel& b, std::span<const cplx> grid,
                                  double tol) {
  const ScalarKernel ka[] = {a.k0(), a.k1()};
  const ScalarKernel kb[] = {b.k0(), b.k1()};
  return equivalent_fbn(ka, kb, grid, tol);
}

std::vector<ScalarKernel> induced_kernels(const OperatorModel& model) {
  if (!is_tridiagonal(model)) throw DomainError("induced kernels need a tridiagonal model");
  for (const auto& c : model.couplings) {
    const Eigen::MatrixXcd off = c.matrix - Eigen::MatrixXcd(c.matrix.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, c.matrix.cwiseAbs().maxCoeff()))
      throw DomainError("induced kernels need diagonal couplings");
  }
  const auto sections = section_coefficients(model);
  std::vector<ScalarKernel> out;
  for (int i = 0; i < model.n(); ++i) {
    const auto d = sections[static_cast<std::size_t>(i)].diagonal();
    std::vector<double> a(static_cast<std::size_t>(d.size()));
    for (Eigen::Index m = 0; m < d.size(); ++m) a[static_cast<std::size_t>(m)] = std::norm(d(m));
    out.emplace_back(std::move(a), model.blocks[static_cast<std::size_t>(i)].domain,
                     "induced K" + std::to_string(i));
  }
  return out;
}

EquivalenceVerdict equivalent_models(const OperatorModel& a, const OperatorModel& b,
                                     std::span<const cplx> grid, double tol) {
  if (a.shape == ShapeTag::fbn_general || b.shape == ShapeTag::fbn_general)
    throw DomainError("no complete invariant is available for fbn_general models");
  const auto ka = induced_kernels(a);
  const auto kb = induced_kernels(b);
  return equivalent_fbn(ka, kb, grid, tol);
}

HomogeneityResult is_homogeneous_rank1(const ScalarKernel& kernel, std::span<const cplx> grid, double tol) {
  require_grid(grid);
  HomogeneityResult r;
  double sum = 0.0;
  for (const auto& w : grid) {
    const double s = 1.0 - std::norm(w);
    r.lambda_values.push_back(-curvature(kernel, w) * s * s);
    sum += r.lambda_values.back();
  }
  r.lambda_estimate = sum / static_cast<double>(grid.size());
  for (double l : r.lambda_values)
    r.max_relative_deviation = std::max(r.max_relative_deviation, std::abs(l - r.lambda_estimate) /
                                                                      std::abs(r.lambda_estimate));
  r.homogeneous = r.max_relative_deviation <= tol;
  return r;
}

FrameCoefficientRule FrameCoefficientRule::binomial() {
  return {"binomial(k,j)", [](int k, int j) { return binom(k, j); }};
}

FrameCoefficientRule FrameCoefficientRule::unit() {
  return {"unit", [](int, int) { return 1.0; }};
}

FrameCheckReport fbn_frame_check(const OperatorModel& model, cplx w, const FrameCoefficientRule& rule,
                                 double step, double eigen_tol) {
  if (!is_tridiagonal(model)) throw DomainError("frame check needs a tridiagonal model");
  FrameCheckReport rep;
  rep.w = w;
  rep.blocks = model.n();
  rep.coefficient_rule = rule.name;
  rep.step = step;
  if (model.n() < 2) {
    rep.vacuous = true;
    rep.eigenframe_dimension = eigenframe(model, w, eigen_tol).dimension;
    return rep;
  }
  const int n = model.n();
  const int max_order = n - 1;
  if (!(step > 1e-8) || std::pow(step, max_order) < 1e-300)
    throw DomainError("derivative step underflow");

  const auto sections = section_coefficients(model);

  // Projected frames keyed by the offset in units of step/4.
  std::map<int, Eigen::MatrixXcd> cache;
  auto projected = [&](int quarter_steps) -> const Eigen::MatrixXcd& {
    auto it = cache.find(quarter_steps);
    if (it != cache.end()) return it->second;
    const cplx at = w + cplx{0.25 * step * quarter_steps, 0.0};
    const EigenFrame ef = eigenframe(model, at, eigen_tol);
    if (ef.dimension != n)
      throw NumericError("eigenframe failure: dimension " + std::to_string(ef.dimension) + " at w = (" +
                         std::to_string(at.real()) + "," + std::to_string(at.imag()) + ")");
    const Eigen::MatrixXcd g = holomorphic_frame(model, sections, at);
    const Eigen::MatrixXcd pg = ef.basis * (ef.basis.adjoint() * g);
    if (quarter_steps == 0) {
      rep.eigenframe_dimension = ef.dimension;
      for (int m = 0; m < n; ++m)
        rep.membership_residual =
            std::max(rep.membership_residual, (g.col(m) - pg.col(m)).norm() / g.col(m).norm());
    }
    return cache.emplace(quarter_steps, pg).first->second;
  };

  // Central difference of order j with spacing `units` quarter-steps.
  auto central = [&](int col, int j, int units) -> Eigen::VectorXcd {
    const double h = 0.25 * step * units;
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n * model.block_size());
    for (int i = 0; i <= j; ++i) {
      const int offset = (j - 2 * i) * units / 2;
      acc += ((i % 2 == 0) ? 1.0 : -1.0) * binom(j, i) * projected(offset).col(col);
    }
    return acc / std::pow(h, j);
  };
  auto derivative = [&](int col, int j) -> Eigen::VectorXcd {
    if (j == 0) return projected(0).col(col);
    return (4.0 * central(col, j, 2) - central(col, j, 4)) / 3.0;
  };

  const Eigen::MatrixXcd frame = projected(0);
  for (int k = 1; k < n; ++k) {
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(frame.rows());
    for (int j = 0; j <= k; ++j) {
      const double c = j == 0 ? 1.0 : rule.coefficient(k, j);
      t += ((j % 2 == 0) ? 1.0 : -1.0) * c * derivative(k - j, j);
    }
    const double tn = t.norm();
    rep.t_norms.push_back(tn);
    for (int i = 0; i < k; ++i) {
      const double denom = tn * frame.col(i).norm();
      const double r = denom > 0.0 ? std::abs(frame.col(i).dot(t)) / denom
                                   : std::numeric_limits<double>::infinity();
      rep.max_orthogonality_residual = std::max(rep.max_orthogonality_residual, r);
    }
  }
  return rep;
}

}  // namespace flagcd
