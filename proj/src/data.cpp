#include "qrenn/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include <openssl/evp.h>

#include "qrenn/error.hpp"
#include "qrenn/model.hpp"

namespace qrenn {

namespace {

constexpr std::array<std::pair<FeatureTag, std::string_view>, 6> kTagNames{{
    {FeatureTag::kPauli, "pauli"},
    {FeatureTag::kInvolutory, "involutory"},
    {FeatureTag::kDiagonal, "diagonal"},
    {FeatureTag::kHaar, "haar"},
    {FeatureTag::kClusterIsing, "cluster_ising"},
    {FeatureTag::kRandomIsing, "random_ising"},
}};

void require_qubits(int n, int min, const char* what) {
  if (n < min) throw Error("data", std::string(what) + " needs n >= " + std::to_string(min));
  if (n > 14) throw Error("data", std::string(what) + ": n too large for dense matrices");
}

ComplexMatrix word_with(int n, std::initializer_list<std::pair<int, char>> letters) {
  std::string w(static_cast<std::size_t>(n), 'I');
  for (const auto& [q, c] : letters) w[static_cast<std::size_t>(q)] = c;
  return pauli::word(w);
}

nlohmann::json sample_record(const LabeledHamiltonian& s) {
  nlohmann::json j{{"label", s.label}, {"feature_tag", to_string(s.tag)}};
  j["meta"] = s.meta ? nlohmann::json(*s.meta) : nlohmann::json(nullptr);
  return j;
}

void write_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double read_f64(std::istream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if (!in) throw Error("data", "binary dataset file is truncated");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string to_string(FeatureTag tag) {
  for (const auto& [t, name] : kTagNames) {
    if (t == tag) return std::string(name);
  }
  throw Error("data", "unknown feature tag");
}

FeatureTag parse_feature(std::string_view name) {
  for (const auto& [t, n] : kTagNames) {
    if (n == name) return t;
  }
  throw Error("data", "unknown feature tag '" + std::string(name) + "'");
}

HermitianOperator gen_pauli(int n, Rng& rng) {
  require_qubits(n, 1, "gen_pauli");
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  auto code = std::uniform_int_distribution<std::uint64_t>(1, count - 1)(rng);
  std::string w(static_cast<std::size_t>(n), 'I');
  for (int q = n - 1; q >= 0; --q) {
    w[static_cast<std::size_t>(q)] = "IXYZ"[code & 3];
    code >>= 2;
  }
  return HermitianOperator(pauli::word(w));
}

HermitianOperator gen_involutory(int n, Rng& rng) {
  require_qubits(n, 1, "gen_involutory");
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::bernoulli_distribution coin(0.5);
  RealVector d(dim);
  for (;;) {
    for (Eigen::Index k = 0; k < dim; ++k) d(k) = coin(rng) ? 1.0 : -1.0;
    if (d.minCoeff() < 0.0 && d.maxCoeff() > 0.0) break;
  }
  const auto v = haar_unitary(dim, rng);
  const ComplexMatrix& vm = v.matrix();
  ComplexMatrix p = vm * d.cast<Complex>().asDiagonal() * vm.adjoint();
  return HermitianOperator(0.5 * (p + p.adjoint()));
}

HermitianOperator gen_diagonal(int n, Rng& rng) {
  require_qubits(n, 1, "gen_diagonal");
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
  ComplexMatrix d = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) d(k, k) = u(rng);
  return HermitianOperator(d);
}

HermitianOperator gen_haar_hermitian(int n, Rng& rng) {
  require_qubits(n, 1, "gen_haar_hermitian");
  return logm_unitary(haar_unitary(Eigen::Index{1} << n, rng));
}

HermitianOperator gen_cluster_ising(int n, double lambda) {
  require_qubits(n, 3, "gen_cluster_ising");
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    const int prev = (j + n - 1) % n;
    const int next = (j + 1) % n;
    h -= word_with(n, {{prev, 'X'}, {j, 'Z'}, {next, 'X'}});
    if (lambda != 0.0) h += lambda * word_with(n, {{j, 'Y'}, {next, 'Y'}});
  }
  return HermitianOperator(h);
}

HermitianOperator gen_random_ising(int n, Rng& rng) {
  require_qubits(n, 2, "gen_random_ising");
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k + 1 < n; ++k) h += u(rng) * word_with(n, {{k, 'Z'}, {k + 1, 'Z'}});
  for (int k = 0; k < n; ++k) h += u(rng) * word_with(n, {{k, 'X'}});
  return HermitianOperator(h);
}

HermitianOperator gen_with_levels(int n, int r, Rng& rng) {
  require_qubits(n, 1, "gen_with_levels");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (r < 1 || r > dim) throw Error("data", "level count must lie in [1, 2^n]");
  std::vector<double> levels;
  while (static_cast<int>(levels.size()) < r) {
    const double v = uniform(rng, -1.0, 1.0);
    if (std::all_of(levels.begin(), levels.end(), [&](double l) { return std::abs(l - v) > 1e-3; })) {
      levels.push_back(v);
    }
  }
  RealVector d(dim);
  for (Eigen::Index k = 0; k < dim; ++k) d(k) = levels[static_cast<std::size_t>(k % r)];
  const auto v = haar_unitary(dim, rng);
  const ComplexMatrix h = v.matrix() * d.cast<Complex>().asDiagonal() * v.matrix().adjoint();
  return HermitianOperator(0.5 * (h + h.adjoint()));
}

HermitianOperator generate(FeatureTag tag, int n, Rng& rng) {
  switch (tag) {
    case FeatureTag::kPauli: return gen_pauli(n, rng);
    case FeatureTag::kInvolutory: return gen_involutory(n, rng);
    case FeatureTag::kDiagonal: return gen_diagonal(n, rng);
    case FeatureTag::kHaar: return gen_haar_hermitian(n, rng);
    case FeatureTag::kRandomIsing: return gen_random_ising(n, rng);
    case FeatureTag::kClusterIsing:
      return gen_cluster_ising(n, uniform(rng, 0.0, 2.0));
  }
  throw Error("data", "unknown feature tag");
}

HermitianOperator embedding_generator(FeatureTag tag, const HermitianOperator& x, double scale) {
  if (tag == FeatureTag::kPauli || tag == FeatureTag::kInvolutory) {
    return HermitianOperator(scale * (std::numbers::pi / 2) * (identity(x.dim()) - x.matrix()));
  }
  if (scale == 1.0) return x;
  return HermitianOperator(scale * x.matrix());
}

std::pair<HermitianOperator, HermitianOperator> povm_binary(int m) {
  if (m < 1) throw Error("data", "povm_binary needs m >= 1");
  const ComplexMatrix z = parity_observable(m);
  const ComplexMatrix id = identity(z.rows());
  return {HermitianOperator(0.5 * (id - z)), HermitianOperator(0.5 * (id + z))};
}

DatasetSplit build_dataset(FeatureTag tag, int n, int total, int train_size, std::uint64_t seed) {
  if (total <= 0 || total % 2 != 0) throw Error("data", "dataset total must be positive and even");
  if (train_size < 0 || train_size >= total) throw Error("data", "train_size must lie in [0, total)");
  if (tag == FeatureTag::kHaar) throw Error("data", "haar is the contrast class, not a feature set");
  require_qubits(n, tag == FeatureTag::kClusterIsing ? 3 : tag == FeatureTag::kRandomIsing ? 2 : 1,
                 "build_dataset");

  const auto count = static_cast<std::size_t>(total);
  std::vector<LabeledHamiltonian> pool(count, LabeledHamiltonian{HermitianOperator(identity(1)), 0, tag, {}});
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = substream(seed, k);
    LabeledHamiltonian& s = pool[k];
    if (tag == FeatureTag::kClusterIsing) {
      double lambda = 0.0;
      do {
        lambda = uniform(rng, 0.0, 2.0);
      } while (std::abs(lambda - 1.0) < kCriticalExclusion);
      s = {gen_cluster_ising(n, lambda), lambda < 1.0 ? 0 : 1, tag, lambda};
    } else if (k < count / 2) {
      s = {generate(tag, n, rng), 1, tag, {}};
    } else {
      s = {gen_haar_hermitian(n, rng), 0, FeatureTag::kHaar, {}};
    }
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng = substream(seed, ~std::uint64_t{0});
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  std::sort(order.begin(), order.begin() + train_size);
  std::sort(order.begin() + train_size, order.end());

  DatasetSplit split;
  split.tag = tag;
  split.n = n;
  split.seed = seed;
  for (std::size_t i = 0; i < count; ++i) {
    auto& dst = i < static_cast<std::size_t>(train_size) ? split.train : split.test;
    dst.push_back(std::move(pool[order[i]]));
  }
  return split;
}

void save_dataset(const DatasetSplit& split, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::string bin_name = stem + ".bin";
  const Eigen::Index dim = Eigen::Index{1} << split.n;

  nlohmann::json manifest{
      {"format", "qrenn-dataset"}, {"version", 1},      {"feature_tag", to_string(split.tag)},
      {"n", split.n},              {"seed", split.seed}, {"dim", dim},
      {"binary", bin_name},
  };
  manifest["train"] = nlohmann::json::array();
  manifest["test"] = nlohmann::json::array();

  std::ofstream bin(dir / bin_name, std::ios::binary);
  if (!bin) throw Error("data", "cannot write " + (dir / bin_name).string());
  auto emit = [&](const std::vector<LabeledHamiltonian>& samples, nlohmann::json& records) {
    for (const auto& s : samples) {
      if (s.op.dim() != dim) throw Error("data", "sample dimension does not match n");
      records.push_back(sample_record(s));
      const ComplexMatrix& a = s.op.matrix();
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
          write_f64(bin, a(i, j).real());
          write_f64(bin, a(i, j).imag());
        }
      }
    }
  };
  emit(split.train, manifest["train"]);
  emit(split.test, manifest["test"]);
  if (!bin) throw Error("data", "failed writing " + (dir / bin_name).string());

  std::ofstream out(dir / (stem + ".json"));
  if (!out) throw Error("data", "cannot write " + (dir / (stem + ".json")).string());
  out << manifest.dump(2) << '\n';
}

DatasetSplit load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("data", "cannot read " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("data", "malformed dataset manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "qrenn-dataset") throw Error("data", "not a dataset manifest");

  DatasetSplit split;
  split.tag = parse_feature(manifest.at("feature_tag").get<std::string>());
  split.n = manifest.at("n").get<int>();
  split.seed = manifest.at("seed").get<std::uint64_t>();
  const Eigen::Index dim = Eigen::Index{1} << split.n;
  if (manifest.at("dim").get<Eigen::Index>() != dim) throw Error("data", "manifest dim does not match n");

  const auto bin_path = manifest_path.parent_path() / manifest.at("binary").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error("data", "cannot read " + bin_path.string());
  auto take = [&](const nlohmann::json& records, std::vector<LabeledHamiltonian>& dst) {
    for (const auto& r : records) {
      ComplexMatrix a(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
          const double re = read_f64(bin);
          a(i, j) = Complex(re, read_f64(bin));
        }
      }
      LabeledHamiltonian s{HermitianOperator(a), r.at("label").get<int>(),
                           parse_feature(r.at("feature_tag").get<std::string>()), {}};
      if (s.label != 0 && s.label != 1) throw Error("data", "labels must be 0 or 1");
      if (!r.at("meta").is_null()) s.meta = r.at("meta").get<double>();
      dst.push_back(std::move(s));
    }
  };
  take(manifest.at("train"), split.train);
  take(manifest.at("test"), split.test);
  if (bin.peek() != std::char_traits<char>::eof()) throw Error("data", "binary dataset file has trailing bytes");
  return split;
}

std::string git_blob_hash(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("data", "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string body = buf.str();
  const std::string header = "blob " + std::to_string(body.size()) + '\0';

  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) &&
                  EVP_DigestUpdate(ctx, body.data(), body.size()) &&
                  EVP_DigestFinal_ex(ctx, digest.data(), &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("data", "sha1 failed");

  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

}  // namespace qrenn
