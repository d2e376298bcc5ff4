#pragma once

// Unitary invariants of flag-structured Cowen-Douglas models: line-bundle
// curvature, the intertwiner-norm ratios, the second fundamental form
// coefficient, and the grid-based equivalence deciders built from them.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flagcd/flag_builder.hpp"
#include "flagcd/kernel_engine.hpp"
#include "flagcd/matrix_models.hpp"

namespace flagcd {

inline constexpr double kDefaultEquivalenceTol = 1e-6;

/// Radii {0.1, 0.2, 0.3, 0.4} x `angles` equispaced angles starting at 0.
std::vector<cplx> default_grid(std::span<const double> radii = {}, int angles = 8);

struct CurvatureGrid {
  std::vector<cplx> points;
  std::vector<double> values;
  std::string kernel_label;
};

struct RatioGrid {
  std::vector<cplx> points;
  std::vector<double> values;
  std::string label;
};

struct EquivalenceVerdict {
  bool equivalent = false;
  double max_curvature_gap = 0.0;
  std::vector<double> max_ratio_gap;
  std::vector<cplx> grid;
  double tol = kDefaultEquivalenceTol;
};

/// -d^2/dw dconj(w) log K(w,w) from the (0,0), (1,0), (0,1), (1,1) jets.
double curvature(const ScalarKernel& kernel, cplx w);
CurvatureGrid curvature_grid(const ScalarKernel& kernel, std::span<const cplx> points);

/// |S(t1)(w)|^2 / |t1(w)|^2 = K0(w,w) / K1(w,w).
double ratio_invariant(const ScalarKernel& k0, const ScalarKernel& k1, cplx w);
RatioGrid ratio_grid(const ScalarKernel& k0, const ScalarKernel& k1, std::span<const cplx> points);

/// Coefficient of the dconj(z) form: K / sqrt(-K + K1(z,z)/K0(z,z)), K the
/// curvature of K0.
double second_fundamental_form_coeff(const ScalarKernel& k0, const ScalarKernel& k1, cplx z);
RatioGrid second_fundamental_form_grid(const ScalarKernel& k0, const ScalarKernel& k1,
                                       std::span<const cplx> points);

/// |a - b| / min(|a|, |b|); 0 when a == b.
double relative_gap(double a, double b);

EquivalenceVerdict equivalent_fb2(const FlagKernel& a, const FlagKernel& b, std::span<const cplx> grid,
                                  double tol = kDefaultEquivalenceTol);

/// Curvature of K_0 plus the n-1 ratios K_{i-1}/K_i.
EquivalenceVerdict equivalent_fbn(std::span<const ScalarKernel> a, std::span<const ScalarKernel> b,
                                  std::span<const cplx> grid, double tol = kDefaultEquivalenceTol);

/// Kernels |t_i(w)|^2 of the frame t_{n-1} = eigenvector of T_{n-1} with
/// t_{n-1}(0) = e_0 and t_{i-1} = S_{i-1,i} t_i. Needs diagonal couplings on
/// a tridiagonal (fb2 / fbn_tridiagonal) model.
std::vector<ScalarKernel> induced_kernels(const OperatorModel& model);

/// Decision on matrix models through their induced kernels. Refuses
/// fbn_general shapes.
EquivalenceVerdict equivalent_models(const OperatorModel& a, const OperatorModel& b,
                                     std::span<const cplx> grid, double tol = kDefaultEquivalenceTol);

struct HomogeneityResult {
  bool homogeneous = false;
  double lambda_estimate = 0.0;
  double max_relative_deviation = 0.0;
  std::vector<double> lambda_values;
};

/// lambda(w) = -K(w) (1 - |w|^2)^2 on the grid; homogeneous iff its max
/// relative deviation from the grid mean is <= tol.
HomogeneityResult is_homogeneous_rank1(const ScalarKernel& kernel, std::span<const cplx> grid,
                                       double tol = kDefaultEquivalenceTol);

/// Coefficients c(k, j) in t_k = sum_j (-1)^j c(k,j) gamma_{k-j}^{(j)}.
struct FrameCoefficientRule {
  std::string name;
  std::function<double(int k, int j)> coefficient;

  /// c(k, j) = binom(k, j), the default reading of the frame formula.
  static FrameCoefficientRule binomial();
  /// c(k, j) = 1; kept as a deliberately wrong alternative for comparison.
  static FrameCoefficientRule unit();
};

struct FrameCheckReport {
  cplx w;
  int blocks = 0;
  bool vacuous = false;
  std::string coefficient_rule;
  int eigenframe_dimension = 0;
  double membership_residual = 0.0;     // max |gamma - P gamma| / |gamma|
  double max_orthogonality_residual = 0.0;
  std::vector<double> t_norms;          // |t_k(w)|, k = 1..n-1
  double step = 0.0;
};

/// Numerical check of the frame formula on a tridiagonal model: the
/// holomorphic frame gamma_0..gamma_{n-1} is projected onto the SVD
/// eigenframe at w and w +- h, derivatives are taken by central differences
/// (h = 1e-4, one Richardson level), t_k is formed with the given
/// coefficients and tested for orthogonality to gamma_i, i < k.
FrameCheckReport fbn_frame_check(const OperatorModel& model, cplx w,
                                 const FrameCoefficientRule& rule = FrameCoefficientRule::binomial(),
                                 double step = 1e-4, double eigen_tol = 1e-8);

}  // namespace flagcd
