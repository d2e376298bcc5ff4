#include "flagcd/matrix_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "flagcd/errors.hpp"

namespace flagcd {

namespace {

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

void check_weights_source(const ScalarKernel& kernel, int N) {
  if (N < 2) throw DomainError("truncation order must be at least 2");
  if (static_cast<int>(kernel.size()) < N)
    throw DomainError("kernel " + kernel.label() + " has fewer than N = " + std::to_string(N) +
                      " coefficients");
  const auto a = kernel.coefficients();
  for (int i = 0; i < N; ++i)
    if (!(a[i] > 0.0))
      throw DomainError("kernel " + kernel.label() + " has a nonpositive coefficient at n = " +
                        std::to_string(i));
}

// Stacked Sylvester system: rows vec(XA - AX) = (A^T (x) I - I (x) A) vec(X).
Eigen::MatrixXcd sylvester_stack(std::span<const Eigen::MatrixXcd> matrices) {
  if (matrices.empty()) throw DomainError("commutant needs at least one matrix");
  const Eigen::Index n = matrices.front().rows();
  for (const auto& a : matrices)
    if (a.rows() != n || a.cols() != n) throw DomainError("commutant matrices must share one square size");
  if (n > kMaxCommutantSize) throw DomainError("matrix too large for the dense commutant solve");
  const Eigen::Index nn = n * n;
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(nn * static_cast<Eigen::Index>(matrices.size()), nn);
  for (std::size_t m = 0; m < matrices.size(); ++m) {
    const auto& a = matrices[m];
    const Eigen::Index off = static_cast<Eigen::Index>(m) * nn;
    // (XA)_{ij} = sum_k X_{ik} A_{kj}; X_{ik} sits at column i + k*n.
    // (AX)_{ij} = sum_k A_{ik} X_{kj}; X_{kj} sits at column k + j*n.
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index row = off + i + j * n;
        for (Eigen::Index k = 0; k < n; ++k) {
          l(row, i + k * n) += a(k, j);
          l(row, k + j * n) -= a(i, k);
        }
      }
  }
  return l;
}

double default_rank_tol(Eigen::Index n, double sigma_max) {
  return static_cast<double>(n) * std::numeric_limits<double>::epsilon() * sigma_max;
}

}  // namespace

Eigen::MatrixXcd ShiftModel::matrix() const {
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(N, N);
  for (int n = 0; n + 1 < N; ++n) t(n, n + 1) = weights[static_cast<std::size_t>(n)];
  return t;
}

ShiftModel shift_model(const ScalarKernel& kernel, int N) {
  check_weights_source(kernel, N);
  const auto a = kernel.coefficients();
  ShiftModel s{N, {}, kernel.label(), kernel.domain()};
  s.weights.reserve(static_cast<std::size_t>(N - 1));
  for (int n = 0; n + 1 < N; ++n) s.weights.push_back(std::sqrt(a[n] / a[n + 1]));
  return s;
}

Eigen::MatrixXcd IntertwinerMatrix::matrix() const {
  Eigen::VectorXcd d(N);
  for (int i = 0; i < N; ++i) d(i) = diagonal[static_cast<std::size_t>(i)];
  return d.asDiagonal();
}

IntertwinerMatrix intertwiner_diagonal(const ScalarKernel& k0, const ScalarKernel& k1, int N,
                                       cplx scale) {
  if (scale == cplx{}) throw DomainError("intertwiner scale must be nonzero");
  const ShiftModel t0 = shift_model(k0, N);
  const ShiftModel t1 = shift_model(k1, N);
  IntertwinerMatrix s{N, {}, scale};
  s.diagonal.reserve(static_cast<std::size_t>(N));
  s.diagonal.push_back(scale);
  for (int n = 0; n + 1 < N; ++n)
    s.diagonal.push_back(s.diagonal.back() * (t1.weights[n] / t0.weights[n]));
  return s;
}

std::string to_string(ShapeTag tag) {
  switch (tag) {
    case ShapeTag::fb2: return "fb2";
    case ShapeTag::fbn_general: return "fbn_general";
    case ShapeTag::fbn_tridiagonal: return "fbn_tridiagonal";
  }
  return "unknown";
}

const Eigen::MatrixXcd* OperatorModel::coupling(int row, int col) const {
  for (const auto& c : couplings)
    if (c.row == row && c.col == col) return &c.matrix;
  return nullptr;
}

Eigen::MatrixXcd OperatorModel::matrix() const {
  const int N = block_size();
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n() * N, n() * N);
  for (int i = 0; i < n(); ++i) t.block(i * N, i * N, N, N) = blocks[i].matrix();
  for (const auto& c : couplings) t.block(c.row * N, c.col * N, N, N) = c.matrix;
  return t;
}

double intertwining_residual(const OperatorModel& model) {
  double worst = 0.0;
  for (int i = 0; i + 1 < model.n(); ++i) {
    const auto* s = model.coupling(i, i + 1);
    if (s == nullptr) continue;
    const Eigen::MatrixXcd r = model.blocks[i].matrix() * *s - *s * model.blocks[i + 1].matrix();
    worst = std::max(worst, spectral_norm(r));
  }
  return worst;
}

bool verify_intertwining(const OperatorModel& model, double tol) {
  return intertwining_residual(model) <= tol;
}

OperatorModel build_block_operator(std::vector<ShiftModel> blocks, std::vector<Coupling> couplings,
                                   ShapeTag shape) {
  if (blocks.empty()) throw DomainError("operator model needs at least one block");
  const int N = blocks.front().N;
  const int n = static_cast<int>(blocks.size());
  for (const auto& b : blocks) {
    if (b.N != N) throw DomainError("all diagonal blocks must share the truncation order");
    if (static_cast<int>(b.weights.size()) != N - 1) throw DomainError("shift weights do not match N");
  }
  if (shape == ShapeTag::fb2 && n != 2) throw DomainError("fb2 shape needs exactly two blocks");

  std::sort(couplings.begin(), couplings.end(),
            [](const Coupling& a, const Coupling& b) { return std::pair{a.row, a.col} < std::pair{b.row, b.col}; });
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    const auto& c = couplings[k];
    if (c.row < 0 || c.col >= n || c.row >= c.col)
      throw DomainError("coupling (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                        ") is not strictly upper triangular");
    if (c.matrix.rows() != N || c.matrix.cols() != N) throw DomainError("coupling block has wrong size");
    if (k > 0 && couplings[k - 1].row == c.row && couplings[k - 1].col == c.col)
      throw DomainError("duplicate coupling block");
    if (c.col > c.row + 1 && shape != ShapeTag::fbn_general && c.matrix.cwiseAbs().maxCoeff() > 0.0)
      throw DomainError("shape " + to_string(shape) + " forbids non-zero S_" + std::to_string(c.row) +
                        std::to_string(c.col));
  }

  OperatorModel model{shape, std::move(blocks), std::move(couplings)};
  for (int i = 0; i + 1 < n; ++i) {
    const auto* s = model.coupling(i, i + 1);
    if (s == nullptr || s->cwiseAbs().maxCoeff() == 0.0)
      throw DomainError("superdiagonal coupling S_" + std::to_string(i) + std::to_string(i + 1) +
                        " must be non-zero");
  }
  const double residual = intertwining_residual(model);
  if (residual > 1e-10)
    throw DomainError("intertwining violated: residual " + std::to_string(residual));
  return model;
}

OperatorModel rank_one_model(const ShiftModel& shift) {
  return build_block_operator({shift}, {}, ShapeTag::fbn_tridiagonal);
}

OperatorModel kernel_chain_model(std::span<const ScalarKernel> kernels, int N, double phase) {
  if (kernels.empty()) throw DomainError("chain model needs at least one kernel");
  std::vector<ShiftModel> blocks;
  for (const auto& k : kernels) blocks.push_back(shift_model(k, N));
  std::vector<Coupling> couplings;
  const cplx rotation = std::polar(1.0, phase);
  for (std::size_t i = 0; i + 1 < kernels.size(); ++i) {
    const double norm = std::sqrt(kernels[i].coefficients()[0] / kernels[i + 1].coefficients()[0]);
    const auto s = intertwiner_diagonal(kernels[i], kernels[i + 1], N, norm * rotation);
    couplings.push_back({static_cast<int>(i), static_cast<int>(i + 1), s.matrix()});
  }
  const ShapeTag shape = kernels.size() == 2 ? ShapeTag::fb2 : ShapeTag::fbn_tridiagonal;
  return build_block_operator(std::move(blocks), std::move(couplings), shape);
}

OperatorModel jet_block_operator_form(const ShiftModel& shift) {
  Coupling s{0, 1, Eigen::MatrixXcd::Identity(shift.N, shift.N) * 2.0};
  return build_block_operator({shift, shift}, {s}, ShapeTag::fb2);
}

OperatorModel jet_block_operator_form(const OperatorModel& rank_one) {
  if (rank_one.n() != 1) throw DomainError("jet block form needs a rank-one shift model");
  return jet_block_operator_form(rank_one.blocks.front());
}

Eigen::MatrixXcd direct_sum_matrix(std::span<const ShiftModel> blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.N;
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(total, total);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    t.block(off, off, b.N, b.N) = b.matrix();
    off += b.N;
  }
  return t;
}

double truncation_reliability(const OperatorModel& model, cplx w) {
  const int exponent = std::max(0, model.block_size() - 2 * model.n());
  return std::pow(std::abs(w), exponent);
}

EigenFrame eigenframe(const OperatorModel& model, cplx w, double tol) {
  if (!(tol > 0.0)) throw DomainError("eigenframe tolerance must be positive");
  for (const auto& b : model.blocks)
    if (!b.domain.admits(w)) throw DomainError("eigenframe point outside guard band");
  const double reliability = truncation_reliability(model, w);
  if (reliability > tol)
    throw NumericError("point too close to the truncation-unreliable region: |w|^(N-2n) = " +
                       std::to_string(reliability) + " > tol");
  const Eigen::MatrixXcd t = model.matrix();
  const Eigen::MatrixXcd a = t - w * Eigen::MatrixXcd::Identity(t.rows(), t.cols());
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  EigenFrame f;
  f.w = w;
  f.singular_values.assign(sv.data(), sv.data() + sv.size());
  int dim = 0;
  for (Eigen::Index i = sv.size() - 1; i >= 0 && sv(i) <= tol; --i) {
    ++dim;
    f.residual = sv(i);
  }
  f.dimension = dim;
  f.basis = svd.matrixV().rightCols(dim);
  return f;
}

Eigen::MatrixXcd commutant_basis(std::span<const Eigen::MatrixXcd> matrices, std::optional<double> tol) {
  const Eigen::MatrixXcd l = sylvester_stack(matrices);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(l, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tau = tol.value_or(default_rank_tol(matrices.front().rows(), sv(0)));
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tau) ++rank;
  return svd.matrixV().rightCols(l.cols() - rank);
}

int commutant_dimension(std::span<const Eigen::MatrixXcd> matrices, std::optional<double> tol) {
  const Eigen::MatrixXcd l = sylvester_stack(matrices);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(l);
  const auto& sv = svd.singularValues();
  const double tau = tol.value_or(default_rank_tol(matrices.front().rows(), sv(0)));
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tau) ++rank;
  return static_cast<int>(l.cols() - rank);
}

IrreducibilityResult irreducibility_probe(const Eigen::MatrixXcd& t) {
  const std::vector<Eigen::MatrixXcd> pair{t, t.adjoint()};
  const int dim = commutant_dimension(pair);
  return {dim == 1, dim};
}

IrreducibilityResult irreducibility_probe(const OperatorModel& model) {
  return irreducibility_probe(model.matrix());
}

StrongIrreducibilityProbe strong_irreducibility_probe(const Eigen::MatrixXcd& t, std::uint64_t seed) {
  StrongIrreducibilityProbe out;
  out.seed = seed;
  const std::vector<Eigen::MatrixXcd> single{t};
  const Eigen::MatrixXcd basis = commutant_basis(single);
  out.plain_commutant_dim = static_cast<int>(basis.cols());
  const Eigen::Index n = t.rows();
  if (basis.cols() < 2) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd c(basis.cols());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = cplx{normal(rng), normal(rng)};
  const Eigen::VectorXcd vecx = basis * c;
  const Eigen::MatrixXcd x = Eigen::Map<const Eigen::MatrixXcd>(vecx.data(), n, n);

  // Split the spectrum of a random commutant element into two clusters and
  // take the Riesz projection of one; accept only if it validates.
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(x, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  Eigen::Index ia = 0, ib = 0;
  double spread = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(ev(i) - ev(j)) > spread) {
        spread = std::abs(ev(i) - ev(j));
        ia = i;
        ib = j;
      }
  const double xnorm = x.norm();
  if (spread <= 1e-8 * std::max(1.0, xnorm)) return out;

  cplx ca = ev(ia), cb = ev(ib);
  std::vector<bool> in_a(static_cast<std::size_t>(ev.size()));
  for (int iter = 0; iter < 32; ++iter) {
    cplx sa{}, sb{};
    int na = 0, nb = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const bool a = std::abs(ev(i) - ca) <= std::abs(ev(i) - cb);
      in_a[static_cast<std::size_t>(i)] = a;
      if (a) { sa += ev(i); ++na; } else { sb += ev(i); ++nb; }
    }
    if (na == 0 || nb == 0) return out;
    ca = sa / static_cast<double>(na);
    cb = sb / static_cast<double>(nb);
  }
  double inner = 0.0, outer = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double d = std::abs(ev(i) - ca);
    if (in_a[static_cast<std::size_t>(i)]) inner = std::max(inner, d);
    else outer = std::min(outer, d);
  }
  if (!(outer > 1.5 * inner)) return out;
  const double rho = 0.5 * (inner + outer);

  constexpr int kNodes = 256;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 0; k < kNodes; ++k) {
    const cplx e = std::polar(1.0, 2.0 * std::numbers::pi * k / kNodes);
    const cplx zeta = ca + rho * e;
    p += (rho * e / static_cast<double>(kNodes)) * (zeta * id - x).partialPivLu().inverse();
  }
  const double pnorm = std::max(1.0, p.norm());
  const double idem = (p * p - p).norm() / pnorm;
  const double comm = (p * t - t * p).norm() / (pnorm * std::max(1.0, t.norm()));
  const double trace = p.trace().real();
  const int rank = static_cast<int>(std::lround(trace));
  out.idempotent_residual = std::max(idem, comm);
  out.idempotent_rank = rank;
  out.nontrivial_idempotent_found =
      out.idempotent_residual <= 1e-6 && rank > 0 && rank < n && std::abs(trace - rank) <= 1e-6;
  return out;
}

StrongIrreducibilityProbe strong_irreducibility_probe(const OperatorModel& model, std::uint64_t seed) {
  return strong_irreducibility_probe(model.matrix(), seed);
}

}  // namespace flagcd
