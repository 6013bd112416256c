#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "bvm/grid_transform.hpp"
#include "bvm/linear_flow.hpp"
#include "bvm/rng.hpp"
#include "bvm/schrodinger.hpp"
#include "json.hpp"

using namespace bvm;

namespace {

SpectralField chart_unit(const CutPtr& cut, int slot) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(cut->size());
  r[slot] = 1.0;
  return from_real_coords(cut, r);
}

SpectralField random_real_field(const CutPtr& cut, std::uint64_t seed, double decay,
                                double scale = 1.0) {
  Rng rng(seed);
  Eigen::VectorXd r(cut->size());
  for (int j = 0; j < cut->size(); ++j)
    r[j] = scale * std::pow(1.0 + cut->eigenvalue(j), -0.5 * decay) * rng.normal();
  return from_real_coords(cut, r);
}

SpectralField constant_field(const CutPtr& cut, double c) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cut->size());
  v[0] = c;
  return SpectralField(cut, v);
}

// P_cut(W h) through collocation, exact for band-limited factors
SpectralField product_oracle(const SpectralField& W, const SpectralField& h) {
  const CutPtr& cut = h.cut_ptr();
  int M = next_smooth(2 * (2 * cut->radius() + 1));
  Eigen::VectorXd wg = synthesize(W, M);
  Eigen::VectorXd hg = synthesize(h, M);
  return analyze(cut, (wg.array() * hg.array()).matrix(), M);
}

}  // namespace

TEST_CASE("multiplication matrix matches the pointwise product") {
  CutPtr cut = make_cut(1, 12);
  CutPtr wcut = make_cut(1, 5);
  SpectralField W = random_real_field(wcut, 11, 1.2, 2.0);
  Eigen::MatrixXd A = multiplication_matrix(W, *cut);
  CHECK((A - A.transpose()).norm() <= 1e-12 * (1.0 + A.norm()));
  for (int trial = 0; trial < 5; ++trial) {
    SpectralField h = random_real_field(cut, 100 + trial, 0.8);
    Eigen::VectorXd got = A * to_real_coords(h);
    Eigen::VectorXd want = to_real_coords(product_oracle(W, h));
    CHECK((got - want).norm() <= 1e-12 * want.norm());
  }

  CutPtr cut2 = make_cut(2, 4);
  SpectralField W2 = random_real_field(make_cut(2, 2), 13, 1.5);
  Eigen::MatrixXd A2 = multiplication_matrix(W2, *cut2);
  SpectralField h2 = random_real_field(cut2, 17, 1.0);
  Eigen::VectorXd got2 = A2 * to_real_coords(h2);
  Eigen::VectorXd want2 = to_real_coords(product_oracle(W2, h2));
  CHECK((got2 - want2).norm() <= 1e-12 * (1.0 + want2.norm()));
}

TEST_CASE("free and constant potentials have explicit spectra") {
  CutPtr cut = make_cut(1, 16);
  const int J = cut->size();

  SchrodingerSpectrum free = elliptic_spectrum(constant_field(cut, 0.0), cut);
  CHECK(free.bound == 0.0);
  for (int j = 0; j < J; ++j) {
    CHECK(free.eigvals_shifted[j] ==
          doctest::Approx(cut->eigenvalue(j) + 1.0).epsilon(1e-12));
    CHECK(free.eigvals[j] == doctest::Approx(cut->eigenvalue(j)).epsilon(1e-12));
  }
  CHECK((free.eigvecs.transpose() * free.eigvecs - Eigen::MatrixXd::Identity(J, J))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);

  const double c = 0.7;
  SchrodingerSpectrum shifted = elliptic_spectrum(constant_field(cut, c), cut);
  CHECK(shifted.bound == doctest::Approx(c).epsilon(1e-14));
  for (int j = 0; j < J; ++j)
    CHECK(shifted.eigvals[j] ==
          doctest::Approx(cut->eigenvalue(j) + c).epsilon(1e-12));
}

TEST_CASE("eigenvalue bounds hold for cosine and random potentials") {
  CutPtr cut16 = make_cut(1, 16);
  SpectralField cosW(cut16);
  int p = cut16->index_of({1, 0});
  int n = cut16->index_of({-1, 0});
  cosW.set_coeff(p, 0.5);
  cosW.set_coeff(n, 0.5);
  SchrodingerSpectrum cs = elliptic_spectrum(cosW, cut16);
  CHECK(cs.bound == doctest::Approx(1.0).epsilon(1e-14));
  for (int j = 0; j < cut16->size(); ++j) {
    CHECK(cs.eigvals_shifted[j] >= cut16->eigenvalue(j) + 1.0 - 1e-8);
    CHECK(cs.eigvals_shifted[j] <= cut16->eigenvalue(j) + 3.0 + 1e-8);
  }

  CutPtr cut32 = make_cut(1, 32);
  CutPtr wcut = make_cut(1, 6);
  for (int trial = 0; trial < 10; ++trial) {
    SpectralField W = random_real_field(wcut, 900 + trial, 1.0, 3.0);
    SchrodingerSpectrum spec = elliptic_spectrum(W, cut32);
    const int J = cut32->size();
    CHECK((spec.eigvecs.transpose() * spec.eigvecs - Eigen::MatrixXd::Identity(J, J))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    for (int j = 0; j < J; ++j) {
      CHECK(spec.eigvals_shifted[j] >= cut32->eigenvalue(j) + 1.0 - 1e-8);
      CHECK(spec.eigvals_shifted[j] <=
            cut32->eigenvalue(j) + 2.0 * spec.bound + 1.0 + 1e-8);
    }
    auto dumped = nlohmann::json::parse(spectrum_to_json(spec));
    CHECK(dumped["bound_check"].get<bool>());
    CHECK(dumped["eigvals"].size() == static_cast<std::size_t>(J));
  }
}

TEST_CASE("kernel detection counts stalled modes") {
  const double lam1 = 4.0 * M_PI * M_PI;
  CutPtr cut = make_cut(1, 16);
  CHECK(kernel_dimension(elliptic_spectrum(constant_field(cut, 0.0), cut)) == 1);
  CHECK(kernel_dimension(elliptic_spectrum(constant_field(cut, 1.0), cut)) == 0);

  SchrodingerSpectrum stall = elliptic_spectrum(constant_field(cut, -lam1), cut);
  CHECK(kernel_dimension(stall) == 2);
  CutPtr cut2 = make_cut(1, 32);
  CHECK(kernel_dimension(elliptic_spectrum(constant_field(cut2, -lam1), cut2)) == 2);

  SpectralField h(cut);
  h.set_coeff(cut->index_of({1, 0}), std::complex<double>(0.3, -0.2));
  h.set_coeff(cut->index_of({-1, 0}), std::complex<double>(0.3, 0.2));
  SpectralField moved = frozen_step(h, stall, 0.3);
  CHECK((moved.coeffs() - h.coeffs()).norm() <= 1e-10 * h.l2_norm());
}

TEST_CASE("frozen steps compose as a semigroup") {
  CutPtr cut = make_cut(1, 10);
  SpectralField W = random_real_field(make_cut(1, 4), 21, 1.0, 1.5);
  SchrodingerSpectrum spec = elliptic_spectrum(W, cut);
  SpectralField h = random_real_field(cut, 22, 0.7);

  SpectralField same = frozen_step(h, spec, 0.0);
  CHECK((same.coeffs() - h.coeffs()).norm() <= 1e-14 * h.l2_norm());

  SpectralField two = frozen_step(frozen_step(h, spec, 0.013), spec, 0.028);
  SpectralField one = frozen_step(h, spec, 0.041);
  CHECK((two.coeffs() - one.coeffs()).norm() <= 1e-10 * one.l2_norm());

  CHECK_THROWS_AS(frozen_step(h, spec, -0.1), std::invalid_argument);

  // path construction guards
  CHECK_THROWS_AS(PotentialPath(cut, {0.0, 0.0}, {h.coeffs(), h.coeffs()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PotentialPath(cut, {0.0}, {h.coeffs(), h.coeffs()}),
                  std::invalid_argument);
}

TEST_CASE("linear solve reproduces diagonal closed forms") {
  CutPtr cut = make_cut(1, 12);
  SpectralField h = random_real_field(cut, 31, 0.6);

  PotentialPath zero = constant_potential(constant_field(cut, 0.0));
  Trajectory heat = solve_linear(h, zero, nullptr, 0.3, {1e-3});
  for (std::size_t nidx = 0; nidx < heat.times.size(); nidx += 50) {
    double t = heat.times[nidx];
    for (int j = 0; j < cut->size(); ++j) {
      std::complex<double> want = h.coeff(j) * std::exp(-cut->eigenvalue(j) * t);
      CHECK(std::abs(heat.states(j, nidx) - want) <= 1e-9 * (1e-30 + std::abs(want)));
    }
  }

  const double c = 2.0;
  PotentialPath lift = constant_potential(constant_field(cut, c));
  Trajectory grown = solve_linear(h, lift, nullptr, 0.3, {1e-3});
  int last = static_cast<int>(grown.times.size()) - 1;
  for (int j = 0; j < cut->size(); ++j) {
    std::complex<double> want = h.coeff(j) * std::exp(-(cut->eigenvalue(j) - c) * 0.3);
    CHECK(std::abs(grown.states(j, last) - want) <= 1e-9 * (1e-30 + std::abs(want)));
  }
}

TEST_CASE("trapezoidal source term is second-order accurate") {
  CutPtr cut = make_cut(1, 8);
  const double lam1 = cut->eigenvalue(cut->index_of({1, 0}));
  SpectralField s(cut);
  s.set_coeff(cut->index_of({1, 0}), std::complex<double>(0.0, -0.5));
  s.set_coeff(cut->index_of({-1, 0}), std::complex<double>(0.0, 0.5));
  PotentialPath zero = constant_potential(constant_field(cut, 0.0));
  const double T = 0.3;

  // manufactured solution U(t) = e^{-t} s, so m = (lam1 - 1) e^{-t} s
  auto run = [&](double dt) {
    int steps = static_cast<int>(std::llround(T / dt));
    Trajectory m;
    m.cut = cut;
    m.dt = dt;
    m.times.resize(steps + 1);
    m.states.resize(cut->size(), steps + 1);
    for (int ni = 0; ni <= steps; ++ni) {
      m.times[ni] = ni * dt;
      m.states.col(ni) = (lam1 - 1.0) * std::exp(-m.times[ni]) * s.coeffs();
    }
    SpectralField start(cut, s.coeffs());
    Trajectory got = solve_linear(start, zero, &m, T, {dt});
    double err = 0.0;
    for (int ni = 0; ni <= steps; ++ni) {
      Eigen::VectorXcd want = std::exp(-got.times[ni]) * s.coeffs();
      err = std::max(err, (got.states.col(ni) - want).norm() / want.norm());
    }
    return err;
  };

  double e_coarse = run(2e-3);
  double e_fine = run(1e-3);
  CHECK(e_fine <= 5e-4);
  CHECK(e_coarse / e_fine >= 3.2);
  CHECK(e_coarse / e_fine <= 4.8);

  // grid mismatch rejected
  Trajectory bad;
  bad.cut = cut;
  bad.dt = 1e-3;
  bad.times = {0.0, 1e-3};
  bad.states = Eigen::MatrixXcd::Zero(cut->size(), 2);
  SpectralField start(cut, s.coeffs());
  CHECK_THROWS_AS(solve_linear(start, zero, &bad, T, {1e-3}), std::invalid_argument);
}

TEST_CASE("frozen-potential stepping converges against a fine self-oracle") {
  CutPtr cut = make_cut(1, 8);
  SpectralField theta = random_real_field(cut, 41, 1.5, 0.4);
  ReactionFunction f = bump_reaction();
  const double T = 0.2;
  const double dt_f = 1.25e-5;

  SolverConfig fwd;
  fwd.dt = dt_f;
  Trajectory u = solve_rd(theta, f, T, fwd);

  SpectralField h = random_real_field(cut, 42, 0.8);
  PotentialPath fine = linearized_potential(u, f);
  Trajectory ref = solve_linear(h, fine, nullptr, T, {dt_f});

  auto path_rel_err = [&](const Trajectory& coarse) {
    int stride = static_cast<int>(std::llround(coarse.dt / dt_f));
    double num = 0.0, den = 0.0;
    for (std::size_t nidx = 0; nidx < coarse.times.size(); ++nidx) {
      const Eigen::VectorXcd& a = coarse.states.col(nidx);
      const Eigen::VectorXcd& b = ref.states.col(nidx * stride);
      double w = (nidx == 0 || nidx + 1 == coarse.times.size()) ? 0.5 : 1.0;
      num += w * (a - b).squaredNorm();
      den += w * b.squaredNorm();
    }
    return std::sqrt(num / den);
  };

  double err8 = path_rel_err(
      solve_linear(h, linearized_potential(u, f, 8), nullptr, T, {8 * dt_f}));
  double err16 = path_rel_err(
      solve_linear(h, linearized_potential(u, f, 16), nullptr, T, {16 * dt_f}));
  double err32 = path_rel_err(
      solve_linear(h, linearized_potential(u, f, 32), nullptr, T, {32 * dt_f}));

  CHECK(err8 <= 1e-4);
  CHECK(err16 / err8 >= 1.6);
  CHECK(err16 / err8 <= 2.4);
  CHECK(err32 / err16 >= 1.6);
  CHECK(err32 / err16 <= 2.4);

  // freezing the potential on blocks of length eps perturbs the flow by
  // O(eps) per time, so the squared H^{a+1} path ratio scales as eps^2
  auto freeze_ratio = [&](int stride) {
    PotentialPath frozen = linearized_potential(u, f, stride);
    Trajectory got = solve_linear(h, frozen, nullptr, T, {dt_f});
    double acc = 0.0;
    for (std::size_t nidx = 0; nidx < got.times.size(); ++nidx) {
      SpectralField diff(cut, got.states.col(nidx) - ref.states.col(nidx));
      double w = (nidx == 0 || nidx + 1 == got.times.size()) ? 0.5 : 1.0;
      double hn = sobolev_norm(diff, {1.0, false});
      acc += w * dt_f * hn * hn;
    }
    double base = h.l2_norm();
    return acc / (base * base);
  };

  double r64 = freeze_ratio(64);
  double r32 = freeze_ratio(32);
  CHECK(r64 / r32 >= 3.0);
  CHECK(r64 / r32 <= 5.0);
}

TEST_CASE("flow gram matches the heat-kernel time integral") {
  CutPtr cut = make_cut(1, 16);
  const int J = cut->size();
  const double T = 0.5;
  PotentialPath zero = constant_potential(constant_field(cut, 0.0));

  auto closed = [&](int j) {
    double lam = cut->eigenvalue(j);
    return (1.0 - std::exp(-2.0 * T * lam)) / (2.0 * lam);
  };

  Eigen::MatrixXd graded = flow_gram(zero, cut, graded_quadrature(T, 20000));
  double off = 0.0;
  for (int a = 0; a < J - 1; ++a)
    for (int b = 0; b < J - 1; ++b)
      if (a != b) off = std::max(off, std::abs(graded(a, b)));
  CHECK(off <= 1e-13 * graded.diagonal().maxCoeff());
  for (int j = 1; j < J; ++j)
    CHECK(std::abs(graded(j - 1, j - 1) - closed(j)) <= 1e-6 * closed(j));

  // uniform trapezoid converges toward the same integral from above
  Eigen::MatrixXd u64 = flow_gram(zero, cut, uniform_quadrature(T, 64));
  Eigen::MatrixXd u512 = flow_gram(zero, cut, uniform_quadrature(T, 512));
  double worst64 = 0.0, worst512 = 0.0;
  for (int j = 1; j < J; ++j) {
    worst64 = std::max(worst64, std::abs(u64(j - 1, j - 1) - closed(j)) / closed(j));
    worst512 = std::max(worst512, std::abs(u512(j - 1, j - 1) - closed(j)) / closed(j));
  }
  CHECK(worst512 < worst64);
  CHECK(worst512 <= worst64 / 4.0);
  // the first mode's layer is resolved at both resolutions: quadratic rate
  double lo64 = std::abs(u64(0, 0) - closed(1)) / closed(1);
  double lo512 = std::abs(u512(0, 0) - closed(1)) / closed(1);
  CHECK(lo512 <= lo64 / 16.0);
}

TEST_CASE("flow matrix stacks the quadrature-weighted propagators") {
  CutPtr cut = make_cut(1, 4);
  const int J = cut->size();
  SpectralField theta = random_real_field(cut, 51, 1.2, 0.4);
  ReactionFunction f = bump_reaction();
  SolverConfig fwd;
  fwd.dt = 1e-3;
  Trajectory u = solve_rd(theta, f, 0.25, fwd);
  PotentialPath V = linearized_potential(u, f);
  TimeQuadrature quad = uniform_quadrature(0.25, 32);
  const double dt = 0.25 / 320;  // divides the node gap: shared step grid

  LinearFlowMatrix M = build_flow_matrix(V, cut, quad, dt);
  CHECK(M.matrix.rows() == static_cast<int>(quad.nodes.size()) * J);
  CHECK(M.matrix.cols() == J - 1);

  CHECK(M.apply(Eigen::VectorXd::Zero(J - 1)).norm() == 0.0);

  Rng rng(7);
  Eigen::VectorXd hv(J - 1);
  Eigen::VectorXd g(M.matrix.rows());
  for (int i = 0; i < hv.size(); ++i) hv[i] = rng.normal();
  for (int i = 0; i < g.size(); ++i) g[i] = rng.normal();
  double lhs = M.apply(hv).dot(g);
  double rhs = hv.dot(M.adjoint_apply(g));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));

  Eigen::MatrixXd direct = M.gram();
  Eigen::MatrixXd streamed = flow_gram(V, cut, quad, dt);
  CHECK((direct - streamed).norm() <= 1e-12 * (1.0 + direct.norm()));

  // column propagation agrees with a one-off linear solve
  SpectralField e1 = chart_unit(cut, 1);
  Trajectory sol = solve_linear(e1, V, nullptr, 0.25, {dt});
  for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
    int nidx = static_cast<int>(std::llround(quad.nodes[q] / dt));
    Eigen::VectorXd want = to_real_coords(sol.at(nidx)) * std::sqrt(quad.weights[q]);
    Eigen::VectorXd got = M.matrix.block(static_cast<int>(q) * J, 0, J, J - 1).col(0);
    CHECK((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
  }
}

TEST_CASE("smoothing and stability probes have the expected scale") {
  CutPtr cut = make_cut(1, 16);
  PotentialPath zero = constant_potential(constant_field(cut, 0.0));
  const double lam1 = cut->eigenvalue(cut->index_of({1, 0}));

  double got = smoothing_ratio(zero, chart_unit(cut, 1), -2.0, 2.0, 0.05, 0.5);
  double want = std::exp(-lam1 * 0.05) * std::pow(1.0 + lam1, 2.0);
  CHECK(got == doctest::Approx(want).epsilon(1e-8));

  ProbeConfig small;
  small.trials = 40;
  small.seed = 5;
  double probe16 = smoothing_probe(zero, cut, -2.0, 2.0, 0.05, small);
  CutPtr cut32 = make_cut(1, 32);
  PotentialPath zero32 = constant_potential(constant_field(cut32, 0.0));
  double probe32 = smoothing_probe(zero32, cut32, -2.0, 2.0, 0.05, small);
  CHECK(probe16 > 0.0);
  CHECK(std::abs(probe32 - probe16) <= 0.2 * probe16);

  ProbeConfig st;
  st.trials = 100;
  st.seed = 9;
  st.quad_slices = 1024;
  CutPtr cut8 = make_cut(1, 8);
  PotentialPath zero8 = constant_potential(constant_field(cut8, 0.0));
  double ratio = stability_lower_probe(zero8, cut8, st);
  CHECK(ratio > 0.4);
  CHECK(ratio < 0.6);
}
