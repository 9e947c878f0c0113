#include "rescrb/special.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "rescrb/errors.hpp"

namespace rescrb::special {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

void require_gamma_args(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw DomainError("incomplete gamma: shape must be positive");
    }
    if (!(x >= 0.0) || std::isnan(x)) {
        throw DomainError("incomplete gamma: argument must be non-negative");
    }
}

}  // namespace

double ln_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        std::ostringstream os;
        os << "ln_gamma: argument must be positive and finite, got " << x;
        throw DomainError(os.str());
    }
    return boost::math::lgamma(x);
}

double reg_inc_gamma_lower(double a, double x) {
    require_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(a, x);
}

double reg_inc_gamma_upper(double a, double x) {
    require_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(a, x);
}

double chi2_cdf(double x, double k) { return reg_inc_gamma_lower(0.5 * k, 0.5 * x); }

double chi2_pdf(double x, double k) {
    require_gamma_args(0.5 * k, x);
    if (x == 0.0) {
        if (k < 2.0) return std::numeric_limits<double>::infinity();
        return k == 2.0 ? 0.5 : 0.0;
    }
    return 0.5 * boost::math::gamma_p_derivative(0.5 * k, 0.5 * x);
}

double chi2_quantile(double p, double k) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream os;
        os << "chi2_quantile: probability must lie in (0, 1), got " << p;
        throw DomainError(os.str());
    }
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw DomainError("chi2_quantile: degrees of freedom must be positive");
    }

    // Bracket [lo, hi] with cdf(lo) < p <= cdf(hi).
    double lo = k;
    double hi = k;
    while (chi2_cdf(hi, k) < p) hi *= 2.0;
    while (lo > std::numeric_limits<double>::min() && chi2_cdf(lo, k) >= p) lo *= 0.5;
    if (hi == k) hi = 2.0 * k;

    // Newton on log P(q)/p in the lower half and on log Q(q)/(1-p) in the
    // upper half keeps both tails well conditioned.
    const bool lower = p < 0.5;
    const double log_target = lower ? std::log(p) : std::log1p(-p);
    auto residual = [&](double q) {
        const double tail = lower ? chi2_cdf(q, k) : reg_inc_gamma_upper(0.5 * k, 0.5 * q);
        return std::make_pair(std::log(tail) - log_target, tail);
    };

    double q = std::sqrt(lo * hi);
    for (int iter = 0; iter < 300; ++iter) {
        const auto [g, tail] = residual(q);
        if (g == 0.0) break;
        // g increases with q in the lower half and decreases in the upper half.
        const bool below = lower ? (g < 0.0) : (g > 0.0);
        if (below) {
            lo = q;
        } else {
            hi = q;
        }
        const double slope = (lower ? 1.0 : -1.0) * chi2_pdf(q, k) / tail;
        double next = q - g / slope;
        if (!std::isfinite(next) || next <= lo || next >= hi) {
            next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
        }
        if (std::abs(next - q) <= 4.0 * std::numeric_limits<double>::epsilon() * q) {
            q = next;
            break;
        }
        q = next;
    }
    return q;
}

std::uint64_t mix_stream_id(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t x = a;
    const std::uint64_t ha = splitmix64(x);
    x = b ^ rotl(ha, 17);
    return splitmix64(x) ^ ha;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {
    std::uint64_t x = mix_stream_id(seed, stream);
    for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t RngStream::next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_standard_normal(RngStream& rng) {
    if (rng.has_spare_normal_) {
        rng.has_spare_normal_ = false;
        return rng.spare_normal_;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
        u = 2.0 * rng.uniform() - 1.0;
        v = 2.0 * rng.uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    rng.spare_normal_ = v * f;
    rng.has_spare_normal_ = true;
    return u * f;
}

double sample_gamma(double shape, RngStream& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("sample_gamma: shape must be positive");
    }
    if (shape < 1.0) {
        const double boost = std::pow(rng.uniform(), 1.0 / shape);
        return sample_gamma(shape + 1.0, rng) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = sample_standard_normal(rng);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace rescrb::special
