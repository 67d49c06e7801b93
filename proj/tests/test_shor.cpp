#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"
#include "chicap/shor.hpp"
#include "oracles.hpp"

using namespace chicap;

namespace {

// Tr_H (A (x) I)(Id (x) Psi)(s), spelled out with explicit Kronecker products.
Matrix naive_reduced(const KrausChannel& psi, const Matrix& a, const Matrix& s) {
  const int dh = static_cast<int>(a.rows());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dh * psi.dout()), static_cast<Eigen::Index>(dh * psi.dout()));
  for (const Matrix& k : psi.kraus()) {
    const Matrix big = oracle::kron(Matrix::Identity(dh, dh), k);
    out += big * s * big.adjoint();
  }
  return oracle::trace_out_h(oracle::kron(a, Matrix::Identity(psi.dout(), psi.dout())) * out, dh,
                             static_cast<int>(psi.dout()));
}

}  // namespace

TEST_CASE("indexed states and the extension are validated") {
  CHECK_THROWS_AS(IndexedState({0.6 * Matrix::Identity(2, 2)}), InvalidInput);
  CHECK_THROWS_AS(ShorExtension(noiseless(2), 2.0 * identity(2), 0.1, 2), InvalidInput);
  CHECK_THROWS_AS(ShorExtension(noiseless(2), projector(2, 0), 1.2, 2), InvalidInput);
  CHECK_THROWS_AS(ShorExtension(noiseless(2), projector(3, 0), 0.2, 2), InvalidInput);
  CHECK_THROWS_AS(delta_embed(DensityMatrix::basis(2, 0), 3, 2), InvalidInput);
  const IndexedState s = delta_embed(DensityMatrix::basis(2, 1), 2, 3);
  CHECK(s.d() == 3);
  CHECK(max_abs(s.total() - projector(2, 1)) == 0.0);
}

TEST_CASE("extension output blocks") {
  const ShorExtension x(random_channel(2, 2, 2, 1), random_effect(2, 2).matrix(), 0.3, 3);
  const DensityMatrix rho = random_state(2, 2, 3);
  const BlockState out = apply_extension(x, delta_embed(rho, 2, 3));
  REQUIRE(out.size() == 2);
  const auto w = out.block_weights();
  CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-14));
  const Complex te = (x.effect() * rho.matrix()).trace();
  CHECK(out.block(1)(2, 2).real() == doctest::Approx(0.3 * te.real()));
  CHECK(std::abs(out.block(1)(1, 1)) < 1e-15);
}

TEST_CASE("reduced map against explicit Kronecker products") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const KrausChannel psi = random_channel(2, 2 + s % 2, 2, 10 + s);
    const Matrix a = random_effect(2, 20 + s).matrix();
    const DensityMatrix sigma = random_state(4, 3, 30 + s);
    CHECK(max_abs(reduced_map(psi, a, sigma.matrix()) - naive_reduced(psi, a, sigma.matrix())) < 1e-13);
  }
}

TEST_CASE("tensor extension output sums to a state") {
  const ShorExtension x(random_channel(2, 2, 2, 4), random_effect(2, 5).matrix(), 0.2, 2);
  const KrausChannel psi = random_channel(2, 2, 2, 6);
  const DensityMatrix s1 = random_state(4, 2, 7);
  const DensityMatrix s2 = random_state(4, 2, 8);
  const BlockState b = apply_extension_tensor(x, psi, {0.4 * s1.matrix(), 0.6 * s2.matrix()});
  CHECK(b.size() == 4);
  double total = 0.0;
  for (double w : b.block_weights()) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("f functional stays in range") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const KrausChannel psi = random_channel(2, 2, 2, 40 + s);
    const double f = f_functional(psi, random_effect(2, 50 + s).matrix(), random_ensemble(4, 4, 60 + s));
    CHECK(f >= -1e-12);
    CHECK(f <= std::log2(2.0) + 1.0 + 1e-12);
  }
}

TEST_CASE("closed-form and direct extension chi agree") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ShorExtension x(random_channel(2, 2, 2, 70 + s), random_effect(2, 80 + s).matrix(), 0.05 + 0.04 * s,
                          1 + s % 4);
    const KrausChannel psi = s % 3 == 0 ? trivial_channel() : random_channel(2, 2, 2, 90 + s);
    const ExtensionChi c = chi_extension_ensemble(x, psi, random_ensemble(2 * psi.din(), 3, 100 + s));
    CHECK(std::abs(c.closed_form - c.direct) < 1e-9);
  }
}

TEST_CASE("reduced and unreduced extension capacities agree") {
  const ShorExtension x(random_channel(2, 2, 2, 110), random_effect(2, 111).matrix(), 0.2, 2);
  const CapacityResult reduced = extension_capacity(x);
  const CapacityResult full = extension_capacity_unreduced(x);
  CHECK(reduced.value == doctest::Approx(full.value).epsilon(1e-4));
  CHECK_THROWS_AS(unreduced_extension(ShorExtension(noiseless(2), projector(2, 0), 0.2, 3)), Unsupported);
}

TEST_CASE("extension capacity of the noiseless base") {
  // With E = I the q-branch always reveals the index (log2 d bits) and nothing else.
  const ShorExtension x(noiseless(2), identity(2), 0.25, 4);
  CHECK(extension_capacity(x).value == doctest::Approx(0.75 * 1.0 + 0.25 * 2.0).epsilon(1e-6));
}

TEST_CASE("extension bound") {
  const KrausChannel phi = random_channel(2, 2, 2, 120);
  const KrausChannel psi = random_channel(2, 2, 2, 121);
  const Matrix e = random_effect(2, 122).matrix();
  const Prop3Report zero = prop3_check(phi, psi, e, 0.0, 4, ConstraintSet::full());
  CHECK(zero.deviation == 0.0);
  CHECK(zero.bound == 0.0);
  CHECK(zero.pass);
  const Prop3Report r = prop3_check(phi, psi, e, 0.2, 4, ConstraintSet::full());
  CHECK(r.bound == doctest::Approx(0.2 * 2.0));
  CHECK(r.pass);
  const Prop3Report broken = prop3_check(phi, psi, e, 0.2, 4, ConstraintSet::full(), {}, -1.0);
  CHECK_FALSE(broken.pass);
}

TEST_CASE("lagrangian joint maximum with a trivial second channel") {
  const KrausChannel phi = random_channel(2, 2, 2, 130);
  const Matrix e = random_effect(2, 131).matrix();
  const CapacityResult joint = lagrangian_joint_max(phi, trivial_channel(), e, 0.5, ConstraintSet::full());
  const CapacityResult single = lagrangian_capacity(phi, e, 0.5);
  CHECK(joint.value == doctest::Approx(single.value).epsilon(1e-6));
  CHECK_THROWS_AS(lagrangian_joint_max(phi, trivial_channel(), e, -1.0, ConstraintSet::full()), InvalidInput);
}
