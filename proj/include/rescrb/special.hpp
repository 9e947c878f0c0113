#pragma once

#include <array>
#include <cstdint>

namespace rescrb::special {

double ln_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double reg_inc_gamma_lower(double a, double x);

/// Regularized upper incomplete gamma 1 - P(a, x), accurate in the tail.
double reg_inc_gamma_upper(double a, double x);

double chi2_cdf(double x, double k);
double chi2_pdf(double x, double k);

/// Inverse of chi2_cdf, |chi2_cdf(q, k) - p| <= 1e-10.
double chi2_quantile(double p, double k);

/// Mixes two 64-bit words into a well-distributed stream id.
std::uint64_t mix_stream_id(std::uint64_t a, std::uint64_t b) noexcept;

/// xoshiro256** generator keyed by (seed, stream). The same key always
/// produces the same sequence; distinct keys give independent sequences.
/// Not thread-safe: use one instance per task.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::array<std::uint64_t, 4> state_{};
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;

    friend double sample_standard_normal(RngStream& rng);
};

double sample_standard_normal(RngStream& rng);

/// Unit-scale gamma variate (Marsaglia-Tsang; shape < 1 boosted through
/// shape + 1).
double sample_gamma(double shape, RngStream& rng);

}  // namespace rescrb::special
