// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "flagcd/flag_builder.hpp"
#include "flagcd/invariants.hpp"
#include "flagcd/kernel_engine.hpp"
#include "flagcd/matrix_models.hpp"
#include "oracles.hpp"

using namespace flagcd;
namespace fs = std::filesystem;
using rational = boost::multiprecision::cpp_rational;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::vector<ScalarKernel> chain(double lambda, std::vector<double> mu) {
  std::vector<ScalarKernel> ks;
  for (std::size_t i = 0; i < mu.size(); ++i)
    ks.push_back(make_generalized_szego(lambda + 2.0 * static_cast<double>(i), mu[i]));
  return ks;
}

FlagKernel pair(double lambda, double mu) {
  return build_flag_kernel(make_generalized_szego(lambda), make_generalized_szego(lambda + 2.0, mu));
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Outcome ac1() {
  Outcome o;
  double worst = 0.0;
  for (double lambda : {1.0, 2.0, 3.5}) {
    const auto k = make_generalized_szego(lambda);
    for (const auto& w : default_grid()) {
      const double want = -lambda / std::pow(1.0 - std::norm(w), 2);
      worst = std::max(worst, std::abs(curvature(k, w) - want) / std::abs(want));
    }
  }
  o.require(worst <= 1e-9, "max relative error " + num(worst));
  o.detail = o.pass ? "max relative error " + num(worst) : o.detail;
  return o;
}

Outcome ac2() {
  Outcome o;
  const std::vector<cplx> f{1.0, cplx(0.25, -0.1)};
  std::vector<FlagKernel> pairs{pair(2, 1), pair(1, 1), pair(3.5, 0.5),
                                build_flag_kernel(make_fock_kernel(), make_fock_kernel(2.0)),
                                build_flag_kernel(gauge_transform(make_generalized_szego(2), f),
                                                  gauge_transform(make_generalized_szego(4), f))};
  double orth = 0.0, frame = 0.0;
  for (const auto& fk : pairs) {
    auto diag = [&](cplx w) { return fk.k0().diagonal(w); };
    for (const auto& w : default_grid()) {
      const auto g = frame_gram(fk, w);
      orth = std::max(orth, std::abs(g.t1_gamma0));
      frame = std::max(frame, std::abs(oracle::d_dwbar(diag, w) - g.g01) / std::max(1.0, std::abs(g.g01)));
    }
  }
  o.require(orth <= 1e-12, "<t1, gamma0> = " + num(orth));
  o.require(frame <= 1e-9, "frame identity error " + num(frame));
  if (o.pass) o.detail = "|<t1,gamma0>| <= " + num(orth) + ", frame identity error " + num(frame);
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto grid = default_grid();
  const auto a = pair(2, 1);
  o.require(equivalent_fb2(a, pair(2, 1), grid).equivalent, "(2,1) vs (2,1) not equivalent");

  const auto b = pair(2, 1.5);
  const double ratio_gap = relative_gap(ratio_invariant(a.k0(), a.k1(), 0.0), ratio_invariant(b.k0(), b.k1(), 0.0));
  o.require(!equivalent_fb2(a, b, grid).equivalent, "(2,1.5) judged equivalent");
  o.require(ratio_gap >= 0.33, "ratio gap at 0 is " + num(ratio_gap));

  const auto c = pair(3, 1);
  const double curv_gap = relative_gap(curvature(a.k0(), 0.0), curvature(c.k0(), 0.0));
  o.require(!equivalent_fb2(a, c, grid).equivalent, "(3,1) judged equivalent");
  o.require(curv_gap >= 0.33, "curvature gap at 0 is " + num(curv_gap));

  const std::vector<cplx> f{1.0, 1.0 / 3.0};
  const FlagKernel gauged(gauge_transform(a.k0(), f), gauge_transform(a.k1(), f));
  o.require(equivalent_fb2(a, gauged, grid, 1e-6).equivalent, "gauge copy judged not equivalent");
  if (o.pass) o.detail = "ratio gap " + num(ratio_gap) + ", curvature gap " + num(curv_gap);
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto grid = default_grid();
  const std::vector<double> mu{1.0, 1.5, 0.7};
  const auto base = chain(2.0, mu);
  o.require(equivalent_fbn(base, chain(2.0, mu), grid, 1e-6).equivalent, "identical chains not equivalent");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto m = mu;
    m[i] *= 1.1;
    o.require(!equivalent_fbn(base, chain(2.0, m), grid, 1e-6).equivalent,
              "10% change of scale " + std::to_string(i) + " not detected");
  }
  return o;
}

Outcome ac5() {
  Outcome o;
  const auto ks = chain(2.0, {1.0, 1.0});
  const double got = second_fundamental_form_coeff(ks[0], ks[1], 0.0);
  const double err = std::abs(got + 2.0 / std::sqrt(3.0));
  o.require(err <= 1e-10, "error " + num(err));
  if (o.pass) o.detail = "error " + num(err);
  return o;
}

Outcome ac6() {
  Outcome o;
  for (const auto& k : {make_generalized_szego(1.0), make_generalized_szego(2.5, 3.0), make_fock_kernel()}) {
    const auto a = build_jet_localization_kernel(k);
    const auto b = build_flag_kernel(k, k);
    for (const auto& z : default_grid())
      for (const auto& w : default_grid()) o.require((a(z, w).array() == b(z, w).array()).all(), "evaluations differ");
  }
  const std::vector<cplx> z{0.0, 1.0};
  Eigen::MatrixXcd want(2, 2);
  want << 0.0, 0.0, 2.0, 0.0;
  o.require(jet_action_matrix(z, 0.0, 2).entries == want, "jet action of z at 0 is wrong");
  const auto jb = jet_block_operator_form(shift_model(make_generalized_szego(2.0), 12));
  o.require(verify_intertwining(jb, 1e-12), "jet block intertwining fails");
  const auto irr = irreducibility_probe(jb);
  o.require(irr.star_commutant_dim == 1, "star commutant dimension " + std::to_string(irr.star_commutant_dim));
  return o;
}

Outcome ac7() {
  Outcome o;
  const std::vector<double> radii{0.0, 0.1, 0.2, 0.3};
  const auto grid = default_grid(radii, 8);
  for (int n = 1; n <= 3; ++n) {
    std::vector<double> mu(static_cast<std::size_t>(n), 1.0);
    const auto m = n == 1 ? rank_one_model(shift_model(make_generalized_szego(2.0), 24))
                          : kernel_chain_model(chain(2.0, mu), 24);
    for (const auto& w : grid) {
      const int d = eigenframe(m, w, 1e-8).dimension;
      o.require(d == n, "dimension " + std::to_string(d) + " for " + std::to_string(n) + " blocks");
    }
  }
  return o;
}

// Exact rank of the stacked Sylvester system over Q.
int exact_commutant_dim(const std::vector<std::vector<std::vector<rational>>>& mats) {
  const std::size_t n = mats.front().size();
  std::vector<std::vector<rational>> rows;
  for (const auto& a : mats)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        // (XA - AX)_{ij}, unknown X_{rc} at index r*n + c.
        std::vector<rational> row(n * n);
        for (std::size_t k = 0; k < n; ++k) {
          row[i * n + k] += a[k][j];
          row[k * n + j] -= a[i][k];
        }
        rows.push_back(row);
      }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n * n && rank < rows.size(); ++col) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][col] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      const rational factor = rows[r][col] / rows[rank][col];
      for (std::size_t c = col; c < n * n; ++c) rows[r][c] -= factor * rows[rank][c];
    }
    ++rank;
  }
  return static_cast<int>(n * n - rank);
}

Outcome ac8() {
  using RM = std::vector<std::vector<rational>>;
  auto shift = [](std::size_t n, rational w = 1) {
    RM m(n, std::vector<rational>(n));
    for (std::size_t i = 0; i + 1 < n; ++i) m[i][i + 1] = w;
    return m;
  };
  auto transpose = [](const RM& m) {
    RM t(m.size(), std::vector<rational>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) t[j][i] = m[i][j];
    return t;
  };
  auto diag = [](std::vector<rational> d) {
    RM m(d.size(), std::vector<rational>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m[i][i] = d[i];
    return m;
  };
  auto direct_sum = [](const RM& a, const RM& b) {
    const std::size_t n = a.size() + b.size();
    RM m(n, std::vector<rational>(n));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) m[i][j] = a[i][j];
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) m[a.size() + i][a.size() + j] = b[i][j];
    return m;
  };
  RM weighted(3, std::vector<rational>(3));
  weighted[0][1] = rational(1, 2);
  weighted[1][2] = rational(1, 3);
  RM dense{{1, 2}, {3, 4}};
  RM full{{rational(1, 2), 1, 0}, {0, rational(-2, 3), 5}, {1, 0, rational(7, 4)}};
  RM jordan_plus = direct_sum(shift(2), diag({1}));
  RM two_blocks = direct_sum(shift(3), shift(3));

  const std::vector<std::vector<RM>> sets{
      {shift(5), transpose(shift(5))},   // 1
      {diag({1, 2})},                    // 2
      {two_blocks, transpose(two_blocks)},  // 4
      {shift(5)},                        // 5
      {diag({1, 1, 2})},                 // 5
      {jordan_plus},                     // 3
      {dense},                           // 2
      {diag({1, 2, 3}), full},           // 1
      {diag({rational(1, 3), rational(1, 3), rational(1, 3)})},  // 9
      {weighted, transpose(weighted)},   // 1
  };

  Outcome o;
  std::vector<int> seen;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    std::vector<Eigen::MatrixXcd> mats;
    for (const auto& m : sets[s]) {
      Eigen::MatrixXcd e(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
      for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
          e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].convert_to<double>();
      mats.push_back(e);
    }
    const int exact = exact_commutant_dim(sets[s]);
    const int got = commutant_dimension(mats);
    seen.push_back(exact);
    o.require(exact == got, "set " + std::to_string(s) + ": exact " + std::to_string(exact) + ", numeric " +
                                std::to_string(got));
  }
  for (int want : {1, 2, 4, 5})
    o.require(std::find(seen.begin(), seen.end(), want) != seen.end(),
              "expected dimension " + std::to_string(want) + " missing from the set");
  if (o.pass) {
    o.detail = "dimensions";
    for (int d : seen) o.detail += " " + std::to_string(d);
  }
  return o;
}

Outcome ac9() {
  Outcome o;
  const auto a = kernel_chain_model(chain(2.0, {1.0, 1.5}), 24);
  auto rotated = a.couplings;
  for (auto& c : rotated) c.matrix *= std::polar(1.0, std::numbers::pi / 3.0);
  const auto b = build_block_operator(a.blocks, rotated, a.shape);
  const auto ia = induced_kernels(a);
  const auto ib = induced_kernels(b);
  const auto grid = default_grid();
  double worst = 0.0;
  for (const auto& w : grid) {
    worst = std::max(worst, std::abs(curvature(ia[0], w) - curvature(ib[0], w)));
    worst = std::max(worst, std::abs(curvature(ia[1], w) - curvature(ib[1], w)));
    worst = std::max(worst, std::abs(ratio_invariant(ia[0], ia[1], w) - ratio_invariant(ib[0], ib[1], w)));
    worst = std::max(worst, std::abs(second_fundamental_form_coeff(ia[0], ia[1], w) -
                                     second_fundamental_form_coeff(ib[0], ib[1], w)));
  }
  o.require(worst <= 1e-12, "invariant grids differ by " + num(worst));
  o.require(equivalent_models(a, b, grid).equivalent, "rotated model judged not equivalent");
  if (o.pass) o.detail = "max grid difference " + num(worst);
  return o;
}

Outcome ac10() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<cplx>> sets;
  for (int s = 0; s < 4; ++s) {
    std::vector<cplx> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(std::polar(0.9 * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng)));
    sets.push_back(pts);
  }
  std::vector<cplx> ring;
  for (int i = 0; i < 8; ++i) ring.push_back(std::polar(0.3 + 0.08 * i, 0.7 * i));
  sets.push_back(ring);

  double lowest = 1e300;
  for (double lambda : {1.5, 2.0, 4.0})
    for (double mu : {0.5, 1.0, 2.0}) {
      const auto fk = pair(lambda, mu);
      for (const auto& pts : sets) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block_gram_matrix(fk, pts), Eigen::EigenvaluesOnly);
        lowest = std::min(lowest, es.eigenvalues().minCoeff());
      }
    }
  o.require(lowest >= -1e-9, "minimum eigenvalue " + num(lowest));
  if (o.pass) o.detail = "minimum eigenvalue " + num(lowest);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac11() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "flagcd-acceptance";
  fs::remove_all(root);
  std::vector<fs::path> outs{root / "run1", root / "run2"};
  for (const auto& out : outs) {
    const std::string cmd = std::string("\"") + FLAGCD_CLI + "\" report --config \"" + FLAGCD_EXAMPLE_CONFIG +
                            "\" --out \"" + out.string() + "\" > \"" + (root / "log.txt").string() + "\" 2>&1";
    fs::create_directories(root);
    const int rc = std::system(cmd.c_str());
    o.require(rc == 0, "CLI exited with status " + std::to_string(rc));
  }
  if (!o.pass) return o;

  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(outs[0])) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t count2 = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(outs[1])) ++count2;
  o.require(names.size() == count2, "different file sets");
  for (const auto& name : names) {
    auto a = slurp(outs[0] / name);
    auto b = slurp(outs[1] / name);
    if (name == "report.json") {
      auto ja = nlohmann::json::parse(a);
      auto jb = nlohmann::json::parse(b);
      ja["metadata"].erase("timing_ms");
      jb["metadata"].erase("timing_ms");
      a = ja.dump(2);
      b = jb.dump(2);
    }
    o.require(a == b, name + " differs between runs");
  }
  if (o.pass) o.detail = std::to_string(names.size()) + " files identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 curvature closed form", ac1},
      {"AC2 flag-kernel frame identities", ac2},
      {"AC3 rank-two equivalence decisions", ac3},
      {"AC4 three-block equivalence decisions", ac4},
      {"AC5 second fundamental form at the origin", ac5},
      {"AC6 jet localization and jet block model", ac6},
      {"AC7 eigenframe dimensions", ac7},
      {"AC8 commutant against exact rational elimination", ac8},
      {"AC9 phase-rotated coupling", ac9},
      {"AC10 block Gram positivity", ac10},
      {"AC11 CLI determinism", ac11},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << (o.detail.empty() ? "" : " (" + o.detail + ")") << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
