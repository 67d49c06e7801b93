#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chicap/detail/objective.hpp"
#include "chicap/detail/optimizer.hpp"
#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"

using namespace chicap;

namespace {

// Central difference of f along a random direction D, against 2 Re <G, D>.
template <class F>
void check_directional(F&& f, const Matrix& x, const Matrix& g, Rng& rng, double tol) {
  for (int t = 0; t < 5; ++t) {
    const Matrix d = random_ginibre(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()), rng);
    const double h = 1e-6;
    const double fd = (f(x + h * d) - f(x - h * d)) / (2.0 * h);
    const double an = 2.0 * (g.adjoint() * d).trace().real();
    CHECK(std::abs(fd - an) <= tol * (1.0 + std::abs(an)));
  }
}

Matrix random_psi(std::size_t d, std::size_t m, Rng& rng) {
  Matrix psi = random_ginibre(d, m, rng);
  return psi / std::sqrt(psi.squaredNorm());
}

}  // namespace

TEST_CASE("chi objective value equals chi of the encoded ensemble") {
  Rng rng(1);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const KrausChannel c = random_channel(2, 2, 2, s);
    const detail::ChiObjective obj(ChiObjectiveSpec::of(c));
    const Matrix psi = random_psi(2, 4, rng);
    std::vector<double> w;
    std::vector<DensityMatrix> st;
    for (Eigen::Index i = 0; i < psi.cols(); ++i) {
      w.push_back(psi.col(i).squaredNorm());
      st.push_back(DensityMatrix::pure(psi.col(i)));
    }
    const Ensemble e = Ensemble::normalized(w, st);
    CHECK(obj.evaluate(psi, nullptr) == doctest::Approx(chi_of_ensemble(c, e)).epsilon(1e-10));
  }
}

TEST_CASE("chi objective gradient matches finite differences") {
  Rng rng(2);
  for (std::uint64_t s = 0; s < 6; ++s) {
    ChiObjectiveSpec spec = ChiObjectiveSpec::of(random_channel(2 + s % 2, 2, 3, 10 + s));
    if (s % 2 == 1) spec = spec.with_linear(random_effect(spec.din, s).matrix());
    const detail::ChiObjective obj(spec);
    const Matrix psi = random_psi(spec.din, 3, rng);
    Matrix g;
    obj.evaluate(psi, &g);
    check_directional([&](const Matrix& x) { return obj.evaluate(x, nullptr); }, psi, g, rng, 1e-6);
  }
}

TEST_CASE("block objective gradient matches finite differences") {
  Rng rng(3);
  const BlockChannel bc({{0.3, noiseless(2)}, {0.7, random_channel(2, 3, 2, 4)}});
  const detail::ChiObjective obj(ChiObjectiveSpec::of(bc));
  const Matrix psi = random_psi(2, 4, rng);
  Matrix g;
  obj.evaluate(psi, &g);
  check_directional([&](const Matrix& x) { return obj.evaluate(x, nullptr); }, psi, g, rng, 1e-6);
}

TEST_CASE("divergence objective gradient matches finite differences") {
  Rng rng(4);
  for (std::uint64_t s = 0; s < 6; ++s) {
    const ChiObjectiveSpec spec = ChiObjectiveSpec::of(random_channel(2, 2, 2, 20 + s));
    const Matrix ref = random_state(2, 2, 30 + s).matrix();
    const Matrix extra = -0.3 * random_effect(2, s).matrix();
    const detail::DivergenceObjective obj(spec, ref, extra);
    const Vector psi = random_unit_vector(2, rng);
    Vector g;
    obj.evaluate(psi, &g);
    check_directional(
        [&](const Matrix& x) { return obj.evaluate(x.col(0), nullptr); }, Matrix(psi), Matrix(g), rng, 1e-6);
  }
}

TEST_CASE("divergence objective reduces to relative entropy for channels") {
  const KrausChannel c = random_channel(2, 3, 2, 8);
  const DensityMatrix ref = random_state(2, 2, 9);
  const detail::DivergenceObjective obj(ChiObjectiveSpec::of(c), ref.matrix(), Matrix());
  Rng rng(5);
  const Vector psi = random_unit_vector(2, rng);
  const double expect = relative_entropy(apply(c, DensityMatrix::pure(psi)), apply(c, ref));
  CHECK(obj.evaluate(psi, nullptr) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("constraint compilation") {
  Matrix a = projector(2, 1);
  SUBCASE("linear at the minimum eigenvalue restricts the subspace") {
    const auto cc = detail::compile_constraint(ConstraintSet::linear(a, 0.0), 2);
    CHECK(cc.subspace.cols() == 1);
  }
  SUBCASE("inactive linear is full") {
    const auto cc = detail::compile_constraint(ConstraintSet::linear(a, 1.0), 2);
    CHECK_FALSE(cc.has_functionals());
  }
  SUBCASE("singleton sets a fixed average") {
    const auto cc = detail::compile_constraint(ConstraintSet::singleton(DensityMatrix::maximally_mixed(2)), 2);
    CHECK(cc.fixed_average);
  }
  SUBCASE("marginals of singletons give equalities") {
    const ConstraintSet m = ConstraintSet::marginals(ConstraintSet::singleton(random_state(2, 2, 1)),
                                                     ConstraintSet::full(), 2, 3);
    const auto cc = detail::compile_constraint(m, 6);
    CHECK(cc.equalities.size() == 1);
    CHECK_THROWS_AS(detail::compile_constraint(m, 4), InvalidInput);
  }
  SUBCASE("nested marginals are unsupported") {
    const ConstraintSet inner = ConstraintSet::marginals(ConstraintSet::full(), ConstraintSet::full(), 1, 2);
    CHECK_THROWS_AS(detail::compile_constraint(ConstraintSet::marginals(inner, ConstraintSet::full(), 2, 2), 4),
                    Unsupported);
  }
}

TEST_CASE("feasibility repair lands exactly on the constraint") {
  const Matrix a = random_effect(2, 3).matrix();
  const double a_min = eigenvalues_h(a).minCoeff();
  const double alpha = a_min + 0.1;
  const auto cc = detail::compile_constraint(ConstraintSet::linear(a, alpha), 2);
  std::vector<double> w = {0.5, 0.5};
  std::vector<Matrix> st = {DensityMatrix::basis(2, 0).matrix(), DensityMatrix::basis(2, 1).matrix()};
  detail::repair_feasibility(cc, w, st);
  Matrix avg = Matrix::Zero(2, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    avg += w[i] * st[i];
    total += w[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((a * avg).trace().real() <= alpha + 1e-12);
}

TEST_CASE("decomposition engine keeps the average exact") {
  const KrausChannel c = random_channel(2, 2, 2, 6);
  const DensityMatrix rho = random_state(2, 2, 7);
  OptimizerConfig cfg;
  cfg.certify = false;
  const CapacityResult r = maximize_over_decompositions(ChiObjectiveSpec::of(c), rho, cfg);
  CHECK(max_abs(average_state(r.ensemble).matrix() - rho.matrix()) < 1e-10);
  CHECK(r.value == doctest::Approx(chi_of_ensemble(c, r.ensemble)).epsilon(1e-10));
}

TEST_CASE("optimizers") {
  SUBCASE("L-BFGS on a concave quadratic") {
    RealVector target(3);
    target << 1.0, -2.0, 0.5;
    const auto f = [&](const RealVector& x, RealVector& g) {
      g = -2.0 * (x - target);
      return -(x - target).squaredNorm();
    };
    const auto r = detail::lbfgs_maximize(f, RealVector::Zero(3), {});
    CHECK((r.x - target).norm() < 1e-6);
  }
  SUBCASE("Nelder-Mead on a convex quadratic") {
    const auto f = [](const RealVector& x) { return (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5); };
    const auto r = detail::nelder_mead_minimize(f, RealVector::Zero(2), 0.5, 2000, 1e-12);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-4));
  }
}
