#pragma once

// Finite N x N truncations of the operator models: weighted backward shifts
// realizing diagonal kernels, diagonal intertwiners, block upper-triangular
// assemblies, numerical eigenframes and commutant probes.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flagcd/kernel_engine.hpp"

namespace flagcd {

inline constexpr int kDefaultTruncation = 32;
inline constexpr int kMaxCommutantSize = 64;
inline constexpr std::uint64_t kDefaultProbeSeed = 7;

/// Weighted backward shift T e_0 = 0, T e_{n+1} = w_n e_n with
/// w_n = sqrt(a_n / a_{n+1}).
struct ShiftModel {
  int N = 0;
  std::vector<double> weights;
  std::string source_label;
  DiskDomain domain;

  Eigen::MatrixXcd matrix() const;
};

/// Gauged kernels realize the same operator as their underlying series, so
/// only the diagonal coefficients are used.
ShiftModel shift_model(const ScalarKernel& kernel, int N);

/// Diagonal S with T0 S = S T1: c_{n+1} = c_n * w1_n / w0_n, c_0 = scale.
struct IntertwinerMatrix {
  int N = 0;
  std::vector<cplx> diagonal;
  cplx scale;

  Eigen::MatrixXcd matrix() const;
};

IntertwinerMatrix intertwiner_diagonal(const ScalarKernel& k0, const ScalarKernel& k1, int N,
                                       cplx scale);

enum class ShapeTag { fb2, fbn_general, fbn_tridiagonal };

std::string to_string(ShapeTag tag);

/// Off-diagonal block S_{row,col}, row < col.
struct Coupling {
  int row = 0;
  int col = 0;
  Eigen::MatrixXcd matrix;
};

struct OperatorModel {
  ShapeTag shape = ShapeTag::fb2;
  std::vector<ShiftModel> blocks;
  std::vector<Coupling> couplings;  // sorted by (row, col)

  int n() const noexcept { return static_cast<int>(blocks.size()); }
  int block_size() const noexcept { return blocks.empty() ? 0 : blocks.front().N; }

  /// nullptr when the block is absent (zero).
  const Eigen::MatrixXcd* coupling(int row, int col) const;

  /// Assembled (n*N) x (n*N) matrix.
  Eigen::MatrixXcd matrix() const;
};

/// Validates sizes, the shape tag, non-zero superdiagonal couplings and the
/// intertwining identities T_i S_{i,i+1} = S_{i,i+1} T_{i+1} (residual <= 1e-10).
OperatorModel build_block_operator(std::vector<ShiftModel> blocks, std::vector<Coupling> couplings,
                                   ShapeTag shape);

/// Max over adjacent pairs of the spectral norm of T_i S - S T_{i+1}.
double intertwining_residual(const OperatorModel& model);

bool verify_intertwining(const OperatorModel& model, double tol);

/// Tridiagonal chain over K_0..K_{n-1} with S_{i,i+1} = intertwiner_diagonal
/// scaled by sqrt(a0(K_i)/a0(K_{i+1})) * exp(i*phase), which makes
/// t_{i} = S_{i,i+1} t_{i+1} reproduce |t_i(w)|^2 = K_i(w,w) / a0(K_{n-1}).
/// Tag fb2 for n = 2, fbn_tridiagonal otherwise.
OperatorModel kernel_chain_model(std::span<const ScalarKernel> kernels, int N, double phase = 0.0);

/// [[T, 2I], [0, T]] for a rank-one model (n == 1).
OperatorModel jet_block_operator_form(const OperatorModel& rank_one);
OperatorModel jet_block_operator_form(const ShiftModel& shift);

/// Single-block model; no couplings.
OperatorModel rank_one_model(const ShiftModel& shift);

/// Block-diagonal matrix of the given shifts; lies outside the flag class.
Eigen::MatrixXcd direct_sum_matrix(std::span<const ShiftModel> blocks);

struct EigenFrame {
  cplx w;
  int dimension = 0;
  Eigen::MatrixXcd basis;  // orthonormal columns
  double residual = 0.0;   // largest singular value treated as zero
  std::vector<double> singular_values;
};

/// Truncation reliability estimate |w|^(N - 2n) for an n-block model.
double truncation_reliability(const OperatorModel& model, cplx w);

/// Numerical nullspace of T - w via SVD; singular values <= tol count as
/// zero. Throws NumericError when truncation_reliability(model, w) > tol.
EigenFrame eigenframe(const OperatorModel& model, cplx w, double tol = 1e-8);

/// dim {X : XA = AX for all A}. Rank tolerance defaults to N*eps*sigma_max.
int commutant_dimension(std::span<const Eigen::MatrixXcd> matrices,
                        std::optional<double> tol = std::nullopt);

/// Columns are vec(X) (column-major) for a basis of the commutant.
Eigen::MatrixXcd commutant_basis(std::span<const Eigen::MatrixXcd> matrices,
                                 std::optional<double> tol = std::nullopt);

struct IrreducibilityResult {
  bool irreducible = false;
  int star_commutant_dim = 0;
};

/// Exact for the truncation; a proxy for the infinite operator.
IrreducibilityResult irreducibility_probe(const Eigen::MatrixXcd& t);
IrreducibilityResult irreducibility_probe(const OperatorModel& model);

/// Always labelled HEURISTIC: the plain commutant of a truncated shift is
/// large, so this is a qualitative indicator only.
struct StrongIrreducibilityProbe {
  int plain_commutant_dim = 0;
  bool nontrivial_idempotent_found = false;
  double idempotent_residual = 0.0;
  int idempotent_rank = 0;
  std::uint64_t seed = 0;
  std::string label = "HEURISTIC";
};

StrongIrreducibilityProbe strong_irreducibility_probe(const Eigen::MatrixXcd& t,
                                                      std::uint64_t seed = kDefaultProbeSeed);
StrongIrreducibilityProbe strong_irreducibility_probe(const OperatorModel& model,
                                                      std::uint64_t seed = kDefaultProbeSeed);

}  // namespace flagcd
