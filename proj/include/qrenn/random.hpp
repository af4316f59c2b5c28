#pragma once

#include <cstdint>
#include <random>

#include "qrenn/numerics.hpp"

namespace qrenn {

using Rng = std::mt19937_64;

/// Deterministic substream seed for (seed, index); mixing is splitmix64 so
/// neighbouring indices give unrelated generators.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);
Rng substream(std::uint64_t seed, std::uint64_t index);

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of diag(R) divided out.
UnitaryOperator haar_unitary(Eigen::Index dim, Rng& rng);

/// Hermitian matrix with i.i.d. complex Gaussian entries (GUE up to scale).
HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng);

double uniform(Rng& rng, double lo, double hi);

}  // namespace qrenn
