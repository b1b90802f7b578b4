#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qens/error.hpp"
#include "qens/qsvm.hpp"

namespace qens {

namespace {

constexpr std::array<char, 8> kMagic{'Q', 'E', 'N', 'S', 'K', 'M', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "kernel cache assumes a little-endian host");

}  // namespace

KernelCache::KernelCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path KernelCache::path_for(std::uint64_t data_hash, const EncoderSpec& encoder) const {
  std::ostringstream name;
  name << std::hex << std::setw(16) << std::setfill('0') << data_hash << '_' << encoder_name(encoder.kind) << "_r"
       << std::dec << encoder.repetitions << ".kmat";
  return dir_ / name.str();
}

std::optional<Eigen::MatrixXd> KernelCache::load(std::uint64_t data_hash, const EncoderSpec& encoder) const {
  std::ifstream in(path_for(data_hash, encoder), std::ios::binary);
  if (!in) return std::nullopt;
  std::array<char, 8> magic{};
  std::uint64_t n = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || magic != kMagic) throw Error(ErrorCategory::io, "corrupt kernel cache entry");
  Eigen::MatrixXd K(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(K.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!in) throw Error(ErrorCategory::io, "truncated kernel cache entry");
  return K;
}

void KernelCache::store(std::uint64_t data_hash, const EncoderSpec& encoder, const Eigen::MatrixXd& K) const {
  std::filesystem::create_directories(dir_);
  const auto path = path_for(data_hash, encoder);
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
    const auto n = static_cast<std::uint64_t>(K.rows());
    out.write(kMagic.data(), kMagic.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(K.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
    if (!out) throw Error(ErrorCategory::io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

KernelMatrix KernelCache::quantum_kernel(const std::vector<std::vector<double>>& xs,
                                         const EncoderSpec& encoder) const {
  Dataset keyed;
  keyed.x = xs;
  keyed.y.assign(xs.size(), 1);
  const std::uint64_t h = hash_dataset(keyed);
  if (auto K = load(h, encoder)) return KernelMatrix{std::move(*K), KernelSpec::quantum(encoder)};
  KernelMatrix K = qens::quantum_kernel(xs, encoder);
  store(h, encoder, K.values);
  return K;
}

}  // namespace qens
