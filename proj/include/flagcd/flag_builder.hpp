#pragma once

// The 2x2 flag kernel
//
//   K_G(z,w) = [ K0            dK0/dconj(w)             ]
//              [ dK0/dz        d2K0/dz dconj(w) + K1    ]
//
// built from a pair of scalar kernels, the k=2 jet localization kernel and
// the jet module action matrices.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flagcd/kernel_engine.hpp"

namespace flagcd {

class FlagKernel {
 public:
  FlagKernel(ScalarKernel k0, ScalarKernel k1);

  const ScalarKernel& k0() const noexcept { return k0_; }
  const ScalarKernel& k1() const noexcept { return k1_; }
  const DiskDomain& domain() const noexcept { return k0_.domain(); }

  Eigen::Matrix2cd operator()(cplx z, cplx w) const;

 private:
  ScalarKernel k0_;
  ScalarKernel k1_;
};

/// Lower-triangular k x k matrix of the jet module action at w.
struct JetActionMatrix {
  int k = 2;
  Eigen::MatrixXcd entries;
};

/// Inner products of the frame sections gamma0, gamma1 and t1 = d gamma0 - gamma1
/// at a point, read off from kernel jets.
struct FrameGram {
  cplx w;
  double g00 = 0.0;       // |gamma0(w)|^2
  cplx g01;               // <gamma1(w), gamma0(w)>
  double g11 = 0.0;       // |gamma1(w)|^2
  double t1_norm_sq = 0.0;
  cplx t1_gamma0;         // <t1(w), gamma0(w)>
};

/// Fixed 12-point screening grid: radii {1/3, 2/3, 1} x max_eval_radius at
/// 4 angles, offset by pi/4 to avoid the real axis.
std::vector<cplx> screening_grid(const DiskDomain& domain);

/// Requires matching domains and positivity of both kernels on the screening grid.
FlagKernel build_flag_kernel(const ScalarKernel& k0, const ScalarKernel& k1);

Eigen::Matrix2cd eval_flag_kernel(const FlagKernel& fk, cplx z, cplx w);

/// The k=2 localization of a line-bundle kernel: the flag kernel with K0 = K1 = K.
FlagKernel build_jet_localization_kernel(const ScalarKernel& k);

/// Entry (i,j) = binom(i+1, i-j) * f^(i-j)(w) for j <= i, for a polynomial f.
JetActionMatrix jet_action_matrix(std::span<const cplx> f, cplx w, int k = 2);

FrameGram frame_gram(const FlagKernel& fk, cplx w);

/// 2n x 2n block Gram matrix [K_G(p_i, p_j)].
Eigen::MatrixXcd block_gram_matrix(const FlagKernel& fk, std::span<const cplx> points);

}  // namespace flagcd
