#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "flagcd/errors.hpp"
#include "flagcd/flag_builder.hpp"
#include "flagcd/invariants.hpp"
#include "oracles.hpp"

using namespace flagcd;

namespace {

FlagKernel homogeneous(double lambda, double mu) {
  return build_flag_kernel(make_generalized_szego(lambda), make_generalized_szego(lambda + 2.0, mu));
}

bool near(const Eigen::Matrix2cd& a, std::initializer_list<double> want, double tol = 1e-13) {
  const auto* v = want.begin();
  return std::abs(a(0, 0) - v[0]) < tol && std::abs(a(0, 1) - v[1]) < tol && std::abs(a(1, 0) - v[2]) < tol &&
         std::abs(a(1, 1) - v[3]) < tol;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& f, const std::vector<cplx>& g) {
  std::vector<cplx> h(f.size() + g.size() - 1);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) h[i + j] += f[i] * g[j];
  return h;
}

}  // namespace

TEST_CASE("flag kernel examples") {
  const auto fk = homogeneous(2.0, 1.0);
  CHECK(near(fk(0, 0), {1, 0, 0, 3}));
  CHECK(std::abs(fk(0.5, 0)(0, 1) - 1.0) < 1e-13);
  CHECK(near(eval_flag_kernel(homogeneous(1.0, 1.0), 0, 0), {1, 0, 0, 2}));

  const auto c = make_power_series_kernel({1.0});
  const auto cc = build_flag_kernel(c, c);
  CHECK(near(cc(cplx(0.3, 0.1), cplx(-0.2, 0.4)), {1, 0, 0, 1}));
}

TEST_CASE("flag kernel is Hermitian on the diagonal and conjugate symmetric off it") {
  const auto fk = homogeneous(2.5, 0.7);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int t = 0; t < 30; ++t) {
    const cplx z(u(rng), u(rng)), w(u(rng), u(rng));
    const Eigen::Matrix2cd d = fk(w, w);
    CHECK((d - d.adjoint()).norm() == 0.0);
    CHECK((fk(z, w) - fk(w, z).adjoint()).norm() == 0.0);
  }
}

TEST_CASE("jet localization kernel") {
  CHECK(near(build_jet_localization_kernel(make_generalized_szego(1.0))(0, 0), {1, 0, 0, 2}));
  CHECK(near(build_jet_localization_kernel(make_power_series_kernel({1.0}))(0, 0), {1, 0, 0, 1}));
  CHECK(near(build_jet_localization_kernel(make_fock_kernel())(0, 0), {1, 0, 0, 2}));

  const auto k = make_generalized_szego(3.0, 2.0);
  const auto a = build_jet_localization_kernel(k);
  const auto b = build_flag_kernel(k, k);
  for (const auto& z : default_grid())
    for (const auto& w : {cplx(0.1, 0.2), cplx(-0.3, 0.0)}) CHECK((a(z, w).array() == b(z, w).array()).all());
}

TEST_CASE("jet action matrices") {
  const std::vector<cplx> z{0.0, 1.0};
  const auto m = jet_action_matrix(z, 0.0, 2).entries;
  CHECK(m(0, 0) == cplx(0.0));
  CHECK(m(0, 1) == cplx(0.0));
  CHECK(m(1, 0) == cplx(2.0));
  CHECK(m(1, 1) == cplx(0.0));

  const std::vector<cplx> one{1.0};
  for (int k = 2; k <= 4; ++k)
    CHECK(jet_action_matrix(one, cplx(0.3, -0.2), k).entries.isApprox(Eigen::MatrixXcd::Identity(k, k)));

  const std::vector<cplx> z2{0.0, 0.0, 1.0};
  const auto m2 = jet_action_matrix(z2, 1.0, 2).entries;
  CHECK(m2(0, 0) == cplx(1.0));
  CHECK(m2(1, 0) == cplx(4.0));
  CHECK(m2(1, 1) == cplx(1.0));
  CHECK_THROWS_AS(jet_action_matrix(one, 0.0, 1), DomainError);
}

TEST_CASE("jet action is multiplicative") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<cplx> f(4), g(4);
    for (auto& c : f) c = {u(rng), u(rng)};
    for (auto& c : g) c = {u(rng), u(rng)};
    const cplx w(u(rng), u(rng));
    for (int k : {2, 3}) {
      const auto lhs = jet_action_matrix(poly_mul(f, g), w, k).entries;
      const auto rhs = (jet_action_matrix(f, w, k).entries * jet_action_matrix(g, w, k).entries).eval();
      CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
    }
  }
}

TEST_CASE("frame gram examples") {
  const auto fk = homogeneous(2.0, 1.0);
  const auto g = frame_gram(fk, 0.0);
  CHECK(g.g00 == doctest::Approx(1.0));
  CHECK(std::abs(g.g01) < 1e-15);
  CHECK(g.g11 == doctest::Approx(3.0));
  CHECK(g.t1_norm_sq == doctest::Approx(1.0));
  CHECK(std::abs(g.t1_gamma0) == 0.0);
  CHECK(frame_gram(fk, 0.5).t1_norm_sq == doctest::Approx(std::pow(0.75, -4.0)).epsilon(1e-12));
}

TEST_CASE("frame condition against finite differences of the diagonal") {
  for (const auto& fk : {homogeneous(2.0, 1.0), homogeneous(1.5, 3.0),
                         build_flag_kernel(make_fock_kernel(), make_fock_kernel(2.0))}) {
    auto diag = [&](cplx w) { return fk.k0().diagonal(w); };
    for (const auto& w : default_grid()) {
      const auto g = frame_gram(fk, w);
      CHECK(std::abs(g.t1_gamma0) <= 1e-12);
      const cplx fd = oracle::d_dwbar(diag, w);
      CHECK(std::abs(fd - g.g01) <= 1e-9 * std::max(1.0, std::abs(g.g01)));
    }
  }
}

TEST_CASE("block Gram positivity for Szego pairs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double lambda : {0.5, 1.0, 2.0, 4.0})
    for (double mu : {0.25, 1.0, 3.0}) {
      const auto fk = homogeneous(lambda, mu);
      for (int n = 1; n <= 8; ++n) {
        std::vector<cplx> pts;
        for (int i = 0; i < n; ++i) pts.push_back(std::polar(0.9 * std::sqrt(u(rng)), 6.283185 * u(rng)));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block_gram_matrix(fk, pts), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
      }
    }
}

TEST_CASE("flag kernel construction errors") {
  const auto k = make_generalized_szego(2.0);
  const auto k2 = make_generalized_szego(2.0, 1.0, 64, DiskDomain::with_radius(2.0));
  CHECK_THROWS_AS(build_flag_kernel(k, k2), DomainError);
  // K1 with a negative coefficient fails the screening positivity check.
  const auto bad = make_power_series_kernel({1.0, -3.0, 0.0, 0.0});
  CHECK_THROWS_AS(build_flag_kernel(k, bad), NumericError);
}
