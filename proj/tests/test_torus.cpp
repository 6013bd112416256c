#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "bvm/frequency_cut.hpp"
#include "bvm/grid_transform.hpp"
#include "bvm/rng.hpp"
#include "bvm/spectral_field.hpp"
#include "support/oracles.hpp"

using namespace bvm;

namespace {

SpectralField random_real_field(const CutPtr& cut, std::uint64_t seed,
                                double decay = 0.0) {
  Rng rng(seed);
  Eigen::VectorXd r(cut->size());
  for (int j = 0; j < cut->size(); ++j)
    r[j] = rng.normal() * std::exp(-decay * std::sqrt(cut->eigenvalue(j)) / (2.0 * M_PI));
  return from_real_coords(cut, r);
}

}  // namespace

TEST_CASE("lattice ordering, closure, lookup") {
  for (auto [d, K] : {std::pair{1, 4}, std::pair{2, 3}}) {
    CutPtr cut = make_cut(d, K);
    int expected = d == 1 ? 2 * K + 1 : (2 * K + 1) * (2 * K + 1);
    CHECK(cut->size() == expected);
    CHECK(cut->wavevector(0)[0] == 0);
    CHECK(cut->wavevector(0)[1] == 0);
    for (int j = 1; j < cut->size(); ++j)
      CHECK(cut->eigenvalue(j) >= cut->eigenvalue(j - 1));
    for (int j = 0; j < cut->size(); ++j) {
      int jn = cut->negation(j);
      CHECK(cut->wavevector(jn)[0] == -cut->wavevector(j)[0]);
      CHECK(cut->wavevector(jn)[1] == -cut->wavevector(j)[1]);
      CHECK(cut->negation(jn) == j);
      CHECK(cut->index_of(cut->wavevector(j)) == j);
    }
  }
  CHECK(make_cut(1, 5)->index_of({6, 0}) == -1);
}

TEST_CASE("laplacian eigenvalues") {
  CutPtr cut = make_cut(2, 3);
  int j = cut->index_of({3, 0});
  CHECK(cut->eigenvalue(j) == doctest::Approx(36.0 * M_PI * M_PI).epsilon(1e-15));
  j = cut->index_of({1, 2});
  CHECK(cut->eigenvalue(j) == doctest::Approx(20.0 * M_PI * M_PI).epsilon(1e-15));
  CHECK(make_cut(1, 2)->eigenvalue(0) == 0.0);
}

TEST_CASE("eigenvalue growth matches j^(2/d)") {
  for (auto [d, K] : {std::pair{1, 32}, std::pair{2, 8}}) {
    CutPtr cut = make_cut(d, K);
    // log-log slope over a mid range of the sorted spectrum
    int lo = cut->size() / 8, hi = cut->size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = lo; j < hi; ++j) {
      double x = std::log(static_cast<double>(j));
      double y = std::log(cut->eigenvalue(j));
      sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double want = 2.0 / d;
    CHECK(std::abs(slope - want) / want < 0.15);
  }
}

TEST_CASE("sobolev norms") {
  CutPtr cut = make_cut(1, 8);

  SpectralField e3(cut);
  int j3 = cut->index_of({3, 0});
  e3.set_coeff(j3, 1.0);
  double lam = cut->eigenvalue(j3);
  CHECK(sobolev_norm(e3, {2.0, false}) ==
        doctest::Approx(std::pow(1.0 + lam, 1.0)).epsilon(1e-14));
  CHECK(sobolev_norm(e3, {2.0, true}) == doctest::Approx(lam).epsilon(1e-14));
  CHECK(sobolev_norm(e3, {0.0, false}) == doctest::Approx(1.0).epsilon(1e-14));

  SpectralField with_mean(cut);
  with_mean.set_coeff(0, 1.0);
  CHECK_THROWS_AS(sobolev_norm(with_mean, {1.0, true}), std::invalid_argument);

  // Parseval against dense-grid quadrature
  SpectralField f = random_real_field(cut, 11, 0.5);
  auto callable = [&](double x) { return evaluate_field(f, {x, 0.0}); };
  CHECK(sobolev_norm(f, {0.0, false}) ==
        doctest::Approx(std::sqrt(oracle::dense_l2sq(callable))).epsilon(1e-10));
  CHECK(f.l2_norm() == doctest::Approx(sobolev_norm(f, {0.0, false})).epsilon(1e-14));
}

TEST_CASE("interpolation inequality is exact") {
  // ||h||_{H^1} <= ||h||_{H^3}^{1/2} ||h||_{H^-1}^{1/2}  (Cauchy-Schwarz in
  // the weights, exponent (gamma-xi)/(gamma+b) = 1/2 for gamma=3, xi=1, b=1)
  CutPtr cut = make_cut(1, 16);
  for (int trial = 0; trial < 100; ++trial) {
    SpectralField h = random_real_field(cut, 1000 + trial);
    double mid = sobolev_norm(h, {1.0, false});
    double hi = sobolev_norm(h, {3.0, false});
    double lo = sobolev_norm(h, {-1.0, false});
    CHECK(mid <= std::sqrt(hi * lo) * (1.0 + 1e-12));
  }
}

TEST_CASE("projection") {
  CutPtr cut = make_cut(1, 6);
  SpectralField basis(cut);
  basis.set_coeff(5, 1.0);
  CHECK(project(basis, 4).l2_norm() == 0.0);
  CHECK(project(basis, 5).l2_norm() == doctest::Approx(1.0));

  SpectralField f = random_real_field(cut, 3);
  SpectralField p = project(f, 7);
  // idempotent and L^2-orthogonal remainder
  CHECK((project(p, 7).coeffs() - p.coeffs()).norm() == 0.0);
  std::complex<double> inner = 0.0;
  for (int j = 0; j < cut->size(); ++j)
    inner += std::conj(f.coeff(j) - p.coeff(j)) * p.coeff(j);
  CHECK(std::abs(inner) == 0.0);
  double n2 = p.l2_norm() * p.l2_norm() +
              (f.coeffs() - p.coeffs()).squaredNorm();
  CHECK(f.l2_norm() * f.l2_norm() == doctest::Approx(n2).epsilon(1e-14));
}

TEST_CASE("synthesize/analyze round trip and naive-DFT oracle") {
  for (auto [d, K, M] : {std::tuple{1, 5, 16}, std::tuple{2, 3, 8}}) {
    CutPtr cut = make_cut(d, K);
    SpectralField f = random_real_field(cut, 7 * d, 0.3);
    Eigen::VectorXd grid = synthesize(f, M);
    Eigen::VectorXd ref = oracle::naive_synthesize(f, M);
    CHECK((grid - ref).lpNorm<Eigen::Infinity>() < 1e-11);
    SpectralField back = analyze(cut, grid, M);
    CHECK((back.coeffs() - f.coeffs()).norm() < 1e-11);
    Eigen::VectorXcd naive = oracle::naive_analyze(*cut, grid, M);
    CHECK((naive - f.coeffs()).norm() < 1e-10);
  }
}

TEST_CASE("aliasing guards") {
  CutPtr cut = make_cut(1, 8);
  SpectralField f = random_real_field(cut, 5);
  CHECK_THROWS_AS(synthesize(f, 2 * 8), std::invalid_argument);
  CHECK_NOTHROW(synthesize(f, 2 * 8 + 1));
  Eigen::VectorXd grid = synthesize(f, 17);
  CHECK_THROWS_AS(analyze(cut, grid, 16), std::invalid_argument);
  CHECK_THROWS_AS(pointwise_compose([](double x) { return x; }, f, 33),
                  std::invalid_argument);
}

TEST_CASE("pointwise composition") {
  CutPtr cut = make_cut(1, 4);
  // g = x^2 applied to cos(2 pi x) gives (1 + cos(4 pi x))/2
  SpectralField f(cut);
  f.set_coeff(cut->index_of({1, 0}), 0.5);
  f.set_coeff(cut->index_of({-1, 0}), 0.5);
  SpectralField sq = pointwise_compose([](double x) { return x * x; }, f,
                                       2 * (2 * 4 + 1));
  for (int j = 0; j < cut->size(); ++j) {
    const auto& k = cut->wavevector(j);
    std::complex<double> want = 0.0;
    if (k[0] == 0) want = 0.5;
    if (k[0] == 2 || k[0] == -2) want = 0.25;
    CHECK(std::abs(sq.coeff(j) - want) < 1e-13);
  }

  // smooth g on a rapidly decaying field, against dense-grid quadrature
  CutPtr cut16 = make_cut(1, 16);
  SpectralField h = random_real_field(cut16, 42, 1.5);
  auto g = [](double x) { return std::exp(-x * x) * std::sin(x); };
  SpectralField comp = pointwise_compose(g, h, next_smooth(2 * 33));
  auto callable = [&](double x) { return g(evaluate_field(h, {x, 0.0})); };
  for (int j = 0; j < cut16->size(); ++j) {
    auto want = oracle::dense_coeff(callable, cut16->wavevector(j)[0]);
    CHECK(std::abs(comp.coeff(j) - want) < 1e-8);
  }
  CHECK(comp.is_real(1e-12));
}

TEST_CASE("real chart") {
  for (auto [d, K] : {std::pair{1, 6}, std::pair{2, 2}}) {
    CutPtr cut = make_cut(d, K);
    SpectralField f = random_real_field(cut, 99 + d);
    Eigen::VectorXd r = to_real_coords(f);
    CHECK(r.norm() == doctest::Approx(f.l2_norm()).epsilon(1e-14));
    SpectralField back = from_real_coords(cut, r);
    CHECK((back.coeffs() - f.coeffs()).norm() < 1e-14);

    // slot basis functions evaluate consistently with the chart
    Rng rng(17);
    for (int j = 0; j < cut->size(); ++j) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(cut->size());
      unit[j] = 1.0;
      SpectralField phi = from_real_coords(cut, unit);
      std::array<double, 2> x = {rng.uniform(), rng.uniform()};
      CHECK(evaluate_field(phi, x) ==
            doctest::Approx(real_basis_at(*cut, x)[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("serialization") {
  CutPtr cut = make_cut(2, 2);
  SpectralField f = random_real_field(cut, 31);
  SpectralField back = field_from_json(field_to_json(f));
  CHECK(back.cut() == f.cut());
  CHECK((back.coeffs() - f.coeffs()).norm() == 0.0);

  std::string csv = grid_to_csv(f, 6);
  CHECK(csv.substr(0, 10) == std::string("x,y,value\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 37);
}

TEST_CASE("conjugate symmetry detection") {
  CutPtr cut = make_cut(1, 3);
  SpectralField f = random_real_field(cut, 8);
  CHECK(f.is_real(1e-14));
  f.set_coeff(cut->index_of({2, 0}), {0.1, 0.7});
  CHECK_FALSE(f.is_real(1e-6));
}
