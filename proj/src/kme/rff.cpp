#include "declutter/kme/rff.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "declutter/simd/kernels.hpp"
#include "declutter/util/parallel.hpp"

namespace declutter::kme {

static_assert(sizeof(Vec3) == 3 * sizeof(double), "Vec3 must be three packed doubles");
static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw DomainError("kernel bandwidth gamma must be a positive finite number");
}

void accumulate(std::span<const Vec3> pts, const RffBasis& basis,
                std::vector<simd::FixedAccum>& cos_sum, std::vector<simd::FixedAccum>& sin_sum) {
  const std::size_t f = basis.num_pairs();
  cos_sum.assign(f, 0);
  sin_sum.assign(f, 0);
  simd::RffKernelArgs args{pts.data()->data(), pts.size(), basis.wx(), basis.wy(), basis.wz(),
                           f, cos_sum.data(), sin_sum.data()};
  simd::rff_accumulate(args);
}

std::vector<double> finish(const std::vector<simd::FixedAccum>& cos_sum,
                           const std::vector<simd::FixedAccum>& sin_sum, std::size_t count) {
  const std::size_t f = cos_sum.size();
  const double n = static_cast<double>(count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(f));
  std::vector<double> out(2 * f);
  for (std::size_t r = 0; r < f; ++r) {
    out[2 * r] = (static_cast<double>(cos_sum[r]) * simd::kFixedInvScale) / n * scale;
    out[2 * r + 1] = (static_cast<double>(sin_sum[r]) * simd::kFixedInvScale) / n * scale;
  }
  return out;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("basis file truncated");
  return v;
}

constexpr char kBasisMagic[8] = {'D', 'C', 'R', 'F', 'F', 'B', '\0', '\0'};

}  // namespace

double rbf_kernel(const Vec3& x, const Vec3& y, double gamma) {
  require_gamma(gamma);
  if (!is_finite(x) || !is_finite(y)) throw DomainError("rbf_kernel: non-finite point");
  return std::exp(-(x - y).squaredNorm() / (2.0 * gamma * gamma));
}

RffBasis::RffBasis(std::vector<Vec3> frequencies, double gamma, std::uint64_t seed)
    : frequencies_(std::move(frequencies)), gamma_(gamma), seed_(seed) {
  if (frequencies_.empty()) throw ConfigError("RFF basis needs at least one frequency pair");
  require_gamma(gamma);
  require_finite(frequencies_, "RFF frequencies");
  wx_.reserve(frequencies_.size());
  wy_.reserve(frequencies_.size());
  wz_.reserve(frequencies_.size());
  for (const auto& w : frequencies_) {
    wx_.push_back(w.x());
    wy_.push_back(w.y());
    wz_.push_back(w.z());
  }
}

bool RffBasis::operator==(const RffBasis& other) const {
  return gamma_ == other.gamma_ && seed_ == other.seed_ && frequencies_ == other.frequencies_;
}

RffBasis sample_rff_basis(std::size_t num_pairs, double gamma, std::uint64_t seed) {
  if (num_pairs == 0) throw ConfigError("sample_rff_basis: num_pairs must be >= 1");
  require_gamma(gamma);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / gamma);
  std::vector<Vec3> freqs(num_pairs);
  for (auto& w : freqs) {
    const double a = normal(rng);
    const double b = normal(rng);
    const double c = normal(rng);
    w = Vec3(a, b, c);
  }
  return RffBasis(std::move(freqs), gamma, seed);
}

RffBasis basis_for_output_dim(std::size_t output_dim, double gamma, std::uint64_t seed) {
  if (output_dim == 0 || output_dim % 2 != 0)
    throw ConfigError("embedding output_dim must be a positive even number, got " +
                      std::to_string(output_dim));
  return sample_rff_basis(output_dim / 2, gamma, seed);
}

double Embedding::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

std::vector<double> feature_map(const Vec3& x, const RffBasis& basis) {
  if (!is_finite(x)) throw DomainError("feature_map: non-finite point");
  std::vector<simd::FixedAccum> c, s;
  accumulate(std::span<const Vec3>(&x, 1), basis, c, s);
  return finish(c, s, 1);
}

Embedding embed_cloud(const PointCloud& cloud, const RffBasis& basis) {
  require_non_empty(cloud, "embed_cloud(" + std::string(to_string(cloud.tag)) + ")");
  require_finite(cloud.points, "embed_cloud");
  std::vector<simd::FixedAccum> c, s;
  accumulate(cloud.points, basis, c, s);
  return Embedding{finish(c, s, cloud.size()), cloud.size()};
}

std::vector<Embedding> embed_clouds(std::span<const PointCloud> clouds, const RffBasis& basis,
                                    unsigned threads) {
  std::vector<Embedding> out(clouds.size());
  parallel_for(clouds.size(), threads,
               [&](std::size_t i) { out[i] = embed_cloud(clouds[i], basis); });
  return out;
}

double inner(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) throw ContractError("embedding widths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double squared_distance(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) throw ContractError("embedding widths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return s;
}

double exact_mean_inner(const PointCloud& p, const PointCloud& q, double gamma) {
  require_gamma(gamma);
  require_non_empty(p, "exact_mean_inner(p)");
  require_non_empty(q, "exact_mean_inner(q)");
  require_finite(p.points, "exact_mean_inner(p)");
  require_finite(q.points, "exact_mean_inner(q)");
  const SoaPoints qs(q.points);
  const double inv_two_gamma_sq = 1.0 / (2.0 * gamma * gamma);
  std::vector<double> row(q.size());
  double total = 0.0;
  for (const auto& pi : p.points) {
    simd::squared_distances(pi.data(), qs.x.data(), qs.y.data(), qs.z.data(), qs.size(),
                            row.data());
    double row_sum = 0.0;
    for (double d : row) row_sum += std::exp(-d * inv_two_gamma_sq);
    total += row_sum;
  }
  return total / (static_cast<double>(p.size()) * static_cast<double>(q.size()));
}

double mmd2(const PointCloud& p, const PointCloud& q, double gamma) {
  return exact_mean_inner(p, p, gamma) + exact_mean_inner(q, q, gamma) -
         2.0 * exact_mean_inner(p, q, gamma);
}

void write_basis(std::ostream& out, const RffBasis& basis) {
  out.write(kBasisMagic, sizeof(kBasisMagic));
  put<std::uint32_t>(out, kBasisFormatVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, basis.num_pairs());
  put<double>(out, basis.gamma());
  put<std::uint64_t>(out, basis.seed());
  for (const auto& w : basis.frequencies()) {
    put(out, w.x());
    put(out, w.y());
    put(out, w.z());
  }
  if (!out) throw Error("failed to write RFF basis");
}

RffBasis read_basis(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBasisMagic, sizeof(magic)) != 0)
    throw FormatError("not an RFF basis file (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kBasisFormatVersion)
    throw FormatError("unsupported basis format version " + std::to_string(version));
  (void)get<std::uint32_t>(in);
  const auto pairs = get<std::uint64_t>(in);
  const auto gamma = get<double>(in);
  const auto seed = get<std::uint64_t>(in);
  if (pairs == 0 || pairs > (1u << 24)) throw FormatError("implausible basis size");
  std::vector<Vec3> freqs(pairs);
  for (auto& w : freqs) {
    const double a = get<double>(in);
    const double b = get<double>(in);
    const double c = get<double>(in);
    w = Vec3(a, b, c);
  }
  return RffBasis(std::move(freqs), gamma, seed);
}

void save_basis(const std::string& path, const RffBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_basis(out, basis);
}

RffBasis load_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_basis(in);
}

}  // namespace declutter::kme
