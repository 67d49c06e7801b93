#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chicap/additivity.hpp"
#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"
#include "oracles.hpp"

using namespace chicap;

namespace {

OptimizerConfig fast() {
  OptimizerConfig cfg;
  cfg.certify = false;
  return cfg;
}

}  // namespace

TEST_CASE("proven classes are detected") {
  CHECK(subadditivity_proven(noiseless(2), random_channel(2, 2, 2, 1)));
  CHECK(subadditivity_proven(random_channel(2, 2, 2, 1), random_entanglement_breaking(2, 2, 3, 2)));
  CHECK_FALSE(subadditivity_proven(random_channel(2, 2, 2, 1), random_channel(2, 2, 2, 3)));
}

TEST_CASE("noiseless pair on a product state has zero gap") {
  const DensityMatrix sigma = tensor(random_state(2, 2, 1), random_state(2, 2, 2));
  const GapReport r = subadditivity_gap(noiseless(2), noiseless(2), sigma, fast());
  CHECK(std::abs(r.gap) < 1e-6);
  CHECK(r.pass);
  CHECK(r.proven);
  const GapReport h = hatH_superadditivity_gap(noiseless(2), noiseless(2), sigma, fast());
  CHECK(std::abs(h.lhs) < 1e-6);
  CHECK(std::abs(h.rhs) < 1e-6);
}

TEST_CASE("trivial directions on product inputs") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const KrausChannel phi = random_channel(2, 2, 2, 10 + s);
    const KrausChannel psi = random_channel(2, 2, 2, 20 + s);
    const DensityMatrix rho = random_state(2, 2, 30 + s);
    const DensityMatrix omega = random_state(2, 2, 40 + s);
    const DensityMatrix sigma = tensor(rho, omega);
    const GapReport sub = subadditivity_gap(phi, psi, sigma, fast());
    // chi_{Phi (x) Psi}(rho (x) omega) >= chi_Phi(rho) + chi_Psi(omega)
    CHECK(sub.gap <= 2.0 * sub.tolerance);
    const GapReport hat = hatH_superadditivity_gap(phi, psi, sigma, fast());
    // hatH_{Phi (x) Psi}(rho (x) omega) <= hatH_Phi(rho) + hatH_Psi(omega)
    CHECK(hat.gap <= 2.0 * hat.tolerance);
  }
}

TEST_CASE("sub- and superadditivity probes agree") {
  const DensityMatrix sigma = random_bipartite_state(2, 2, 2, 0.5, 3);
  const EquivalenceProbe p = equivalence_probe(depolarizing(0.3, 2), depolarizing(0.3, 2), sigma, fast());
  CHECK(p.consistent);
}

TEST_CASE("subadditivity in the proven cases") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const KrausChannel psi = random_channel(2, 2, 2, 50 + s);
    const DensityMatrix sigma = random_bipartite_state(2, 2, 1 + s % 4, 0.5, 60 + s);
    CHECK(subadditivity_gap(noiseless(2), psi, sigma, fast()).gap >= -2e-3);
    CHECK(subadditivity_gap(random_entanglement_breaking(2, 2, 3, 70 + s), psi, sigma, fast()).gap >= -2e-3);
  }
}

TEST_CASE("constrained additivity with singletons of pure states") {
  const ConstraintSet a = ConstraintSet::singleton(DensityMatrix::basis(2, 0));
  const GapReport r = constrained_additivity_gap(noiseless(2), a, noiseless(2), a, fast());
  CHECK(std::abs(r.lhs) < 1e-6);
  CHECK(std::abs(r.rhs) < 1e-6);
}

TEST_CASE("constrained additivity for a noiseless factor") {
  const KrausChannel psi = random_channel(2, 2, 2, 80);
  const GapReport r = constrained_additivity_gap(noiseless(2), ConstraintSet::linear(projector(2, 1), 0.3), psi,
                                                 ConstraintSet::full(), fast());
  CHECK(r.gap >= -2e-3);
  CHECK(r.gap <= 2e-3);
}

TEST_CASE("noiseless singleton identity") {
  const KrausChannel psi = random_channel(2, 2, 2, 90);
  SUBCASE("pure rho") {
    const DensityMatrix omega = random_state(2, 2, 91);
    const GapReport r = prop2_noiseless_check(psi, DensityMatrix::basis(2, 0), omega, fast());
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(chi_function(psi, omega, fast())).epsilon(1e-2));
  }
  SUBCASE("constant psi") {
    const DensityMatrix rho = random_state(2, 2, 92);
    const GapReport r = prop2_noiseless_check(constant_channel(2, random_state(2, 2, 93)), rho, random_state(2, 2, 94), fast());
    CHECK(r.lhs == doctest::Approx(entropy(rho)).epsilon(1e-2));
  }
  SUBCASE("repair lands on the PSD boundary") {
    const GapReport r = prop2_noiseless_check(random_channel(2, 2, 2, 1700), random_state(2, 2, 1800),
                                              random_state(2, 2, 1900), fast());
    CHECK(std::abs(r.gap) <= 1e-2);
  }
  SUBCASE("mixed inputs") {
    const GapReport r = prop2_noiseless_check(psi, random_state(2, 2, 95), random_state(2, 2, 96), fast());
    CHECK(std::abs(r.gap) <= 1e-2);
  }
}

TEST_CASE("direct-sum chain") {
  const KrausChannel phi0 = random_entanglement_breaking(2, 2, 3, 100);
  const KrausChannel psi = random_channel(2, 2, 2, 101);
  const DensityMatrix sigma = random_bipartite_state(2, 2, 2, 0.5, 102);
  for (double q : {0.0, 0.5, 1.0}) {
    const GapReport r = prop2_directsum_check(phi0, psi, q, sigma, fast());
    CHECK(r.pass);
  }
  const GapReport q1 = prop2_directsum_check(phi0, psi, 1.0, sigma, fast());
  const GapReport id = subadditivity_gap(noiseless(2), psi, sigma, fast());
  CHECK(q1.lhs == doctest::Approx(id.lhs).epsilon(1e-4));
  CHECK_THROWS_AS(prop2_directsum_check(phi0, psi, 1.5, sigma, fast()), InvalidInput);
}

TEST_CASE("weak additivity for the noiseless pair") {
  const Matrix a = projector(2, 1);
  const double gamma = 0.6;
  const GapReport r = weak_additivity_check(noiseless(2), a, noiseless(2), a, gamma, 7, fast());
  CHECK(r.rhs == doctest::Approx(2.0 * oracle::h2(gamma / 2.0)).epsilon(1e-5));
  CHECK(r.lhs == doctest::Approx(2.0 * oracle::h2(gamma / 2.0)).epsilon(1e-4));
  CHECK(r.pass);
  const GapReport slack = weak_additivity_check(noiseless(2), a, noiseless(2), a, 1.8, 5, fast());
  CHECK(slack.lhs == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(slack.gap) < 1e-6);
  CHECK_THROWS_AS(weak_additivity_check(noiseless(2), a, noiseless(2), a, 0.5, 1, fast()), InvalidInput);
}

TEST_CASE("GLO residual") {
  Rng rng(5);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const DensityMatrix sigma = random_bipartite_state(2, 2, 1 + s % 4, 0.3, s);
    CHECK(glo_check(sigma, 2, 2, random_unitary(2, rng)) >= -1e-9);
  }
  const DensityMatrix rho = random_state(2, 2, 6);
  const DensityMatrix prod = tensor(rho, DensityMatrix::basis(2, 0));
  CHECK(glo_check(prod, 2, 2, identity(2)) >= -1e-12);
  const DensityMatrix bell = random_bipartite_state(2, 2, 1, 1.0, 7);
  CHECK(std::abs(glo_check(bell, 2, 2, identity(2))) < 1e-9);
}

TEST_CASE("violation search") {
  SearchOptions opts;
  opts.budget = 3;
  opts.refine_steps = 2;
  const GapReport r = violation_search(noiseless(2), noiseless(2), opts, fast());
  CHECK(r.gap >= -2e-3);
  REQUIRE(r.state);
  const GapReport again = violation_search(noiseless(2), noiseless(2), opts, fast());
  CHECK(again.gap == r.gap);
  opts.budget = 0;
  CHECK_THROWS_AS(violation_search(noiseless(2), noiseless(2), opts, fast()), InvalidInput);
}
