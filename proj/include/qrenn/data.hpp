#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrenn/numerics.hpp"
#include "qrenn/random.hpp"

namespace qrenn {

enum class FeatureTag { kPauli, kInvolutory, kDiagonal, kHaar, kClusterIsing, kRandomIsing };

std::string to_string(FeatureTag tag);
FeatureTag parse_feature(std::string_view name);

struct LabeledHamiltonian {
  HermitianOperator op;
  int label = 0;
  FeatureTag tag = FeatureTag::kHaar;
  std::optional<double> meta;  // lambda for cluster-Ising samples
};

struct DatasetSplit {
  FeatureTag tag = FeatureTag::kPauli;
  int n = 1;
  std::uint64_t seed = 0;
  std::vector<LabeledHamiltonian> train;
  std::vector<LabeledHamiltonian> test;
};

/// Uniform over the 4^n - 1 non-identity Pauli words.
HermitianOperator gen_pauli(int n, Rng& rng);
/// V D V^dagger with D = diag(+-1), D != +-I, V Haar.
HermitianOperator gen_involutory(int n, Rng& rng);
/// Real diagonal with entries uniform in [0, pi).
HermitianOperator gen_diagonal(int n, Rng& rng);
/// Principal logarithm of a Haar unitary.
HermitianOperator gen_haar_hermitian(int n, Rng& rng);
/// -sum_j X_{j-1} Z_j X_{j+1} + lambda sum_j Y_j Y_{j+1}, periodic.
HermitianOperator gen_cluster_ising(int n, double lambda);
/// sum_k J_k Z_k Z_{k+1} + sum_k h_k X_k, open chain, J, h uniform in [-1, 1].
HermitianOperator gen_random_ising(int n, Rng& rng);

/// V D V^dagger with V Haar and D holding r distinct values drawn from
/// U[-1, 1] (each used at least once, multiplicities as equal as possible).
HermitianOperator gen_with_levels(int n, int r, Rng& rng);

HermitianOperator generate(FeatureTag tag, int n, Rng& rng);

/// (pi/2)(I - x) for Pauli and involutory data, x otherwise; then scaled.
HermitianOperator embedding_generator(FeatureTag tag, const HermitianOperator& x, double scale = 1.0);

/// M_0 = (I - Z^{(x)m})/2 and M_1 = (I + Z^{(x)m})/2 on the processing register.
std::pair<HermitianOperator, HermitianOperator> povm_binary(int m);

inline constexpr double kCriticalExclusion = 1e-6;

/// Raw pool of `total` samples split uniformly into train and test. For
/// cluster-Ising every sample is H(lambda), lambda ~ U[0, 2], labelled 0 iff
/// lambda < 1; otherwise half feature samples (label 1) and half Haar
/// samples (label 0). Sample k is drawn from substream (seed, k).
DatasetSplit build_dataset(FeatureTag tag, int n, int total, int train_size, std::uint64_t seed);

/// Writes <stem>.json (manifest) and <stem>.bin (operators as little-endian
/// f64 (re, im) pairs, row-major, train samples first).
void save_dataset(const DatasetSplit& split, const std::filesystem::path& dir, const std::string& stem);
DatasetSplit load_dataset(const std::filesystem::path& manifest);

/// SHA-1 of "blob <size>\0" followed by the file bytes, as lowercase hex.
std::string git_blob_hash(const std::filesystem::path& file);

}  // namespace qrenn
