#include "eiv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eiv/errors.hpp"

namespace eiv {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // Hash the key into a starting state far from other streams' windows.
  state_ = mix64(mix64(seed + kGamma) + (stream_id ^ 0xD1B54A32D192ED03ull) * kGamma);
}

std::uint64_t RngStream::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double RngStream::uniform01() {
  // 53-bit mantissa centered on half-ulps: never exactly 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw ParameterError("RngStream::below: n must be positive");
  // Rejection sampling on the top bits keeps the draw unbiased.
  const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

std::vector<double> normal(RngStream& rng, double mu, double sigma, std::size_t n) {
  if (sigma < 0.0) throw ParameterError("normal: sigma must be >= 0");
  std::vector<double> out(n, mu);
  if (sigma == 0.0 || n == 0) return out;
  // Box-Muller in pairs; an odd tail consumes a pair and drops the sine half.
  for (std::size_t i = 0; i < n; i += 2) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    out[i] = mu + sigma * radius * std::cos(angle);
    if (i + 1 < n) out[i + 1] = mu + sigma * radius * std::sin(angle);
  }
  return out;
}

std::vector<double> chisq(RngStream& rng, int df, std::size_t n) {
  if (df < 1) throw ParameterError("chisq: df must be >= 1");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> z = normal(rng, 0.0, 1.0, static_cast<std::size_t>(df));
    double acc = 0.0;
    for (double v : z) acc += v * v;
    out[i] = acc;
  }
  return out;
}

std::vector<double> exp_median_zero(RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = -std::log(rng.uniform01()) - M_LN2;
  return out;
}

std::pair<std::vector<double>, std::vector<double>> bivariate_correlated(RngStream& rng,
                                                                         double sd, double r,
                                                                         std::size_t n) {
  if (!(sd > 0.0)) throw ParameterError("bivariate_correlated: sd must be > 0");
  if (!(std::abs(r) < 1.0)) throw ParameterError("bivariate_correlated: |r| must be < 1");
  std::vector<double> x = normal(rng, 0.0, sd, n);
  std::vector<double> w = normal(rng, 0.0, sd, n);
  const double mix = std::sqrt(1.0 - r * r);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r * x[i] + mix * w[i];
  return {std::move(x), std::move(z)};
}

namespace {

std::vector<std::size_t> sample_without_replacement(RngStream& rng,
                                                    std::vector<std::size_t> pool,
                                                    std::size_t m) {
  // Partial Fisher-Yates: the first m slots become the sample.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t mask_size(std::size_t n, double fraction) {
  if (fraction < 0.0 || fraction >= 0.5)
    throw ParameterError("contamination_mask: fraction must lie in [0, 0.5)");
  // Nearest integer, ties up.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

}  // namespace

std::vector<std::size_t> contamination_mask(RngStream& rng, std::size_t n, double fraction) {
  const std::size_t m = mask_size(n, fraction);
  if (m == 0) return {};
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return sample_without_replacement(rng, std::move(pool), m);
}

std::vector<std::size_t> contamination_mask(RngStream& rng, std::size_t n, double fraction,
                                            std::span<const std::size_t> exclude) {
  const std::size_t m = mask_size(n, fraction);
  if (m == 0) return {};
  std::vector<std::size_t> pool;
  pool.reserve(n - exclude.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < exclude.size() && exclude[k] == i) {
      ++k;
      continue;
    }
    pool.push_back(i);
  }
  if (m > pool.size())
    throw ParameterError("contamination_mask: not enough rows left outside the excluded set");
  return sample_without_replacement(rng, std::move(pool), m);
}

}  // namespace eiv
