#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace eiv {

/// Counter-based splitmix64 stream keyed by (seed, stream_id). Each stream is
/// an independent window of the splitmix64 orbit, so identical keys replay the
/// same sequence on any thread count, and distinct stream ids do not interact.
/// Streams are single-owner: create one per replication / resample / task.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform draw in the open interval (0, 1).
  double uniform01();
  /// Unbiased uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
};

/// n i.i.d. Gaussian draws; sigma is a standard deviation. sigma == 0 yields
/// n copies of mu without consuming the stream.
std::vector<double> normal(RngStream& rng, double mu, double sigma, std::size_t n);

/// n i.i.d. chi-square draws with integer df (sum of squared normals).
std::vector<double> chisq(RngStream& rng, int df, std::size_t n);

/// Unit-rate exponential shifted by -ln 2: median 0, mean 1 - ln 2, variance 1.
std::vector<double> exp_median_zero(RngStream& rng, std::size_t n);

/// Two jointly Gaussian columns, each N(0, sd), correlation r, built as
/// z = r*x + sqrt(1-r^2)*w with independent w.
std::pair<std::vector<double>, std::vector<double>> bivariate_correlated(RngStream& rng,
                                                                         double sd, double r,
                                                                         std::size_t n);

/// Uniformly random subset of exactly round(fraction*n) distinct row indices
/// (ties round up), returned sorted. fraction must stay below 0.5.
std::vector<std::size_t> contamination_mask(RngStream& rng, std::size_t n, double fraction);

/// Same, drawn from the complement of `exclude` (exclude must be sorted);
/// used for contamination groups whose masks may not overlap.
std::vector<std::size_t> contamination_mask(RngStream& rng, std::size_t n, double fraction,
                                            std::span<const std::size_t> exclude);

}  // namespace eiv
