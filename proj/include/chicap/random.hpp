#pragma once

#include "chicap/state.hpp"

#include <cstdint>
#include <random>

namespace chicap {

using Rng = std::mt19937_64;

// Independent stream for sub-task `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

Vector random_vector(std::size_t dim, Rng& rng);      // Gaussian entries
Vector random_unit_vector(std::size_t dim, Rng& rng);  // Haar pure state
Matrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng);
Matrix random_unitary(std::size_t dim, Rng& rng);
Matrix random_isometry(std::size_t rows, std::size_t cols, Rng& rng);

DensityMatrix random_state(std::size_t dim, std::size_t rank, std::uint64_t seed);
HermitianOperator random_effect(std::size_t dim, std::uint64_t seed);
Ensemble random_ensemble(std::size_t dim, std::size_t n, std::uint64_t seed);

// Mixed state on H (x) K of the given rank. `bias` in [0, 1] pulls every purification
// vector toward a locally rotated maximally entangled vector.
DensityMatrix random_bipartite_state(std::size_t dh, std::size_t dk, std::size_t rank,
                                     double bias, std::uint64_t seed);

}  // namespace chicap
