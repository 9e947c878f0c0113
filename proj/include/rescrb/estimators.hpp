#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace rescrb::estimators {

/// Observations are stored one per row: an M x N matrix.
using Samples = Eigen::MatrixXd;

struct HuberConstants {
    double delta2;  // threshold on the Mahalanobis form, u-quantile of chi2_N
    double b;       // consistency factor
};

/// delta^2 = chi2_quantile(u, N);
/// b = F_{chi2_{N+2}}(delta^2) + delta^2 (1 - F_{chi2_N}(delta^2)) / N.
/// u = 1 gives delta^2 = inf and b = 1.
HuberConstants huber_constants(std::size_t n, double u);

class WeightSpec {
public:
    enum class Kind { Tyler, Huber };

    static WeightSpec tyler();
    static WeightSpec huber(std::size_t n, double u);

    Kind kind() const noexcept { return kind_; }
    double u() const noexcept { return u_; }
    const HuberConstants& constants() const noexcept { return constants_; }

    /// "tyler" or "huber(u)".
    std::string label() const;

private:
    WeightSpec(Kind kind, double u, HuberConstants c) : kind_(kind), u_(u), constants_(c) {}

    Kind kind_;
    double u_;
    HuberConstants constants_;
};

struct FixedPointOptions {
    double tolerance = 1e-9;  // relative Frobenius change between iterates
    int max_iterations = 1000;

    void validate() const;
};

struct FixedPointResult {
    Eigen::MatrixXd scatter;
    int iterations = 0;
    double residual = 0.0;
    /// Steps in the second half of the run where the residual went up.
    int non_monotone_steps = 0;
};

Eigen::VectorXd sample_mean(const Samples& x);

/// Trace-normalized sample covariance: N * S / tr(S).
Eigen::MatrixXd cscm(const Samples& x, const Eigen::VectorXd& mu_hat);

/// Tyler: N / t. Huber: 1/b for t <= delta^2, delta^2 / (t b) otherwise.
double weight(const WeightSpec& spec, double t, std::size_t n);

/// Trace-normalized M-estimator fixed point started from the identity.
/// Throws ConvergenceError (carrying the last iterate) when the tolerance is
/// not met within max_iterations, SingularityError for a zero centered sample
/// under Tyler weights.
FixedPointResult m_estimate_detailed(const Samples& x, const Eigen::VectorXd& mu_hat,
                                     const WeightSpec& spec, const FixedPointOptions& opts = {});

Eigen::MatrixXd m_estimate(const Samples& x, const Eigen::VectorXd& mu_hat, const WeightSpec& spec,
                           const FixedPointOptions& opts = {});

}  // namespace rescrb::estimators
