#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chicap/channel.hpp"
#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"
#include "oracles.hpp"

using namespace chicap;

namespace {

double naive_chi(const std::vector<Matrix>& kraus, const Ensemble& e) {
  Matrix avg = Matrix::Zero(kraus.front().rows(), kraus.front().rows());
  double mixed = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Matrix out = oracle::apply(kraus, e.state(i).matrix());
    avg += e.weight(i) * out;
    mixed += e.weight(i) * oracle::entropy(out);
  }
  return oracle::entropy(avg) - mixed;
}

}  // namespace

TEST_CASE("factories are trace preserving") {
  std::vector<KrausChannel> cs = {noiseless(3), depolarizing(0.3, 2), completely_depolarizing(3),
                                  constant_channel(2, random_state(3, 2, 1)), random_channel(2, 3, 2, 5),
                                  random_entanglement_breaking(2, 2, 4, 6)};
  for (const auto& c : cs) {
    const ChannelDiagnostics d = validate_channel(c);
    CHECK(d.trace_preserving);
    CHECK(d.completeness_residual < 1e-10);
  }
}

TEST_CASE("invalid Kraus families are rejected") {
  Matrix k = Matrix::Identity(2, 2) * 0.9;
  CHECK_THROWS_AS(KrausChannel(2, 2, {k}), InvalidInput);
  CHECK_THROWS_AS(depolarizing(1.5, 2), InvalidInput);
  CHECK_THROWS_AS(random_channel(4, 1, 2, 1), InvalidInput);
}

TEST_CASE("depolarizing output shrinks the Bloch vector") {
  const KrausChannel c = depolarizing(0.4, 2);
  const DensityMatrix out = apply(c, DensityMatrix::basis(2, 0));
  CHECK(out.matrix()(0, 0).real() == doctest::Approx(1.0 - 0.2));
  CHECK(std::abs(out.matrix()(0, 1)) < 1e-15);
}

TEST_CASE("adjoint is dual to apply") {
  const KrausChannel c = random_channel(2, 3, 2, 9);
  const DensityMatrix rho = random_state(2, 2, 2);
  Rng rng(1);
  const Matrix y = hermitian_part(random_ginibre(3, 3, rng));
  const Complex lhs = (y * c.map().apply(rho.matrix())).trace();
  const Complex rhs = (c.map().adjoint_apply(y) * rho.matrix()).trace();
  CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("tensor channel acts as kron on products") {
  const KrausChannel a = random_channel(2, 2, 2, 3);
  const KrausChannel b = random_channel(2, 3, 2, 4);
  const DensityMatrix r = random_state(2, 2, 10);
  const DensityMatrix w = random_state(2, 1, 11);
  const Matrix lhs = apply(tensor_channels(a, b), tensor(r, w)).matrix();
  const Matrix rhs = oracle::kron(apply(a, r).matrix(), apply(b, w).matrix());
  CHECK(max_abs(lhs - rhs) < 1e-14);
}

TEST_CASE("entanglement-breaking channels carry their measure-prepare form") {
  const KrausChannel c = random_entanglement_breaking(2, 3, 3, 7);
  REQUIRE(c.is_entanglement_breaking());
  const auto& mp = *c.measure_prepare();
  const DensityMatrix rho = random_state(2, 2, 8);
  Matrix expect = Matrix::Zero(3, 3);
  for (std::size_t k = 0; k < mp.povm.size(); ++k) expect += (mp.povm[k] * rho.matrix()).trace() * mp.outputs[k].matrix();
  CHECK(max_abs(apply(c, rho).matrix() - expect) < 1e-13);
  CHECK_FALSE(random_channel(2, 2, 2, 1).is_entanglement_breaking());
}

TEST_CASE("chi of an ensemble against a naive evaluation") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const KrausChannel c = random_channel(2 + s % 2, 2, 3, s);
    const Ensemble e = random_ensemble(c.din(), 3, 200 + s);
    CHECK(chi_of_ensemble(c, e) == doctest::Approx(naive_chi(c.kraus(), e)).epsilon(1e-11));
  }
}

TEST_CASE("noiseless chi is H(avg) - sum p H") {
  const Ensemble e = random_ensemble(3, 4, 17);
  double mixed = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) mixed += e.weight(i) * entropy(e.state(i));
  CHECK(chi_of_ensemble(noiseless(3), e) == doctest::Approx(entropy(average_state(e)) - mixed).epsilon(1e-12));
  CHECK(chi_of_ensemble(constant_channel(3, random_state(2, 2, 1)), e) == doctest::Approx(0.0));
}

TEST_CASE("blockwise chi equals block-entropy chi") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double q = 0.1 + 0.04 * static_cast<double>(s);
    const BlockChannel bc({{q, random_channel(2, 2, 2, s)}, {1.0 - q, random_entanglement_breaking(2, 3, 3, 40 + s)}});
    const Ensemble e = random_ensemble(2, 3, 300 + s);
    const double blockwise = q * chi_of_ensemble(bc.components()[0].channel, e) +
                             (1.0 - q) * chi_of_ensemble(bc.components()[1].channel, e);
    CHECK(std::abs(chi_of_ensemble_direct(bc, e) - blockwise) < 1e-9);
    CHECK(std::abs(chi_of_ensemble(bc, e) - blockwise) < 1e-9);
  }
}

TEST_CASE("erasure channel chi is q times noiseless chi") {
  const BlockChannel er = erasure(0.35, 2);
  const Ensemble e = random_ensemble(2, 3, 5);
  CHECK(chi_of_ensemble(er, e) == doctest::Approx(0.35 * chi_of_ensemble(noiseless(2), e)).epsilon(1e-12));
}

TEST_CASE("tensor_block distributes over components") {
  const BlockChannel er = erasure(0.4, 2);
  const KrausChannel b = random_channel(2, 2, 2, 13);
  const BlockChannel tb = tensor_block(er, b);
  REQUIRE(tb.size() == 2);
  const DensityMatrix rho = random_state(4, 2, 3);
  const BlockState out = apply_block(tb, rho);
  CHECK(max_abs(out.block(0) - 0.4 * apply(tensor_channels(noiseless(2), b), rho).matrix()) < 1e-14);
}
