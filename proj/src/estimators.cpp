#include "rescrb/estimators.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rescrb/errors.hpp"
#include "rescrb/special.hpp"

namespace rescrb::estimators {

HuberConstants huber_constants(std::size_t n, double u) {
    if (!(u > 0.0 && u <= 1.0)) {
        std::ostringstream os;
        os << "Huber tuning parameter u must lie in (0, 1], got " << u;
        throw InvalidInput(os.str());
    }
    if (n < 1) throw InvalidInput("dimension must be at least 1");
    if (u == 1.0) return {std::numeric_limits<double>::infinity(), 1.0};
    const double nd = static_cast<double>(n);
    const double delta2 = special::chi2_quantile(u, nd);
    const double b = special::chi2_cdf(delta2, nd + 2.0) +
                     delta2 * special::reg_inc_gamma_upper(0.5 * nd, 0.5 * delta2) / nd;
    return {delta2, b};
}

WeightSpec WeightSpec::tyler() { return WeightSpec(Kind::Tyler, 0.0, {0.0, 1.0}); }

WeightSpec WeightSpec::huber(std::size_t n, double u) {
    return WeightSpec(Kind::Huber, u, huber_constants(n, u));
}

std::string WeightSpec::label() const {
    if (kind_ == Kind::Tyler) return "tyler";
    std::ostringstream os;
    os << "huber(" << u_ << ")";
    return os.str();
}

void FixedPointOptions::validate() const {
    if (!(tolerance > 0.0)) throw InvalidInput("fixed-point tolerance must be positive");
    if (max_iterations < 1) throw InvalidInput("fixed-point max iterations must be >= 1");
}

Eigen::VectorXd sample_mean(const Samples& x) {
    if (x.rows() == 0 || x.cols() == 0) throw InvalidInput("sample_mean: empty data set");
    return x.colwise().mean().transpose();
}

Eigen::MatrixXd cscm(const Samples& x, const Eigen::VectorXd& mu_hat) {
    if (x.rows() == 0) throw InvalidInput("cscm: empty data set");
    if (x.cols() != mu_hat.size()) throw InvalidInput("cscm: mean dimension mismatch");
    const Eigen::MatrixXd centered = x.rowwise() - mu_hat.transpose();
    Eigen::MatrixXd scm = centered.transpose() * centered / static_cast<double>(x.rows());
    const double tr = scm.trace();
    if (!(tr > 0.0)) throw DegenerateData("cscm: all samples coincide with the mean estimate");
    scm *= static_cast<double>(x.cols()) / tr;
    return 0.5 * (scm + scm.transpose());
}

double weight(const WeightSpec& spec, double t, std::size_t n) {
    switch (spec.kind()) {
        case WeightSpec::Kind::Tyler:
            if (!(t >= 1e-300)) {
                throw SingularityError("Tyler weight evaluated at a zero centered sample");
            }
            return static_cast<double>(n) / t;
        case WeightSpec::Kind::Huber: {
            if (!(t >= 0.0)) throw DomainError("Huber weight evaluated at a negative argument");
            const auto& c = spec.constants();
            if (t <= c.delta2) return 1.0 / c.b;
            return c.delta2 / (t * c.b);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

FixedPointResult m_estimate_detailed(const Samples& x, const Eigen::VectorXd& mu_hat,
                                     const WeightSpec& spec, const FixedPointOptions& opts) {
    opts.validate();
    const Eigen::Index m = x.rows();
    const Eigen::Index n = x.cols();
    if (mu_hat.size() != n) throw InvalidInput("m_estimate: mean dimension mismatch");
    if (m < n) {
        std::ostringstream os;
        os << "m_estimate: need at least N=" << n << " samples, got " << m;
        throw InvalidInput(os.str());
    }
    const Eigen::MatrixXd centered = x.rowwise() - mu_hat.transpose();
    const auto nu = static_cast<std::size_t>(n);

    FixedPointResult result;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd w(m);
    double prev_residual = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success) {
            throw NotPositiveDefinite("m_estimate: iterate lost positive-definiteness");
        }
        // Rows of `whitened` are L^{-1} xbar_m, so t_m is their squared norm.
        const Eigen::MatrixXd whitened =
            llt.matrixL().solve(centered.transpose()).transpose();
        for (Eigen::Index k = 0; k < m; ++k) {
            w(k) = weight(spec, whitened.row(k).squaredNorm(), nu);
        }
        Eigen::MatrixXd s = centered.transpose() * w.asDiagonal() * centered;
        s /= static_cast<double>(m);
        const double tr = s.trace();
        if (!(tr > 0.0) || !std::isfinite(tr)) {
            throw DegenerateData("m_estimate: weighted scatter has non-positive trace");
        }
        Eigen::MatrixXd next = (static_cast<double>(n) / tr) * s;
        next = (0.5 * (next + next.transpose())).eval();

        const double residual = (next - sigma).norm() / sigma.norm();
        if (iter > 5 && residual > prev_residual) ++result.non_monotone_steps;
        prev_residual = residual;
        sigma = std::move(next);
        result.iterations = iter;
        result.residual = residual;
        if (residual <= opts.tolerance) {
            result.scatter = std::move(sigma);
            return result;
        }
    }
    std::ostringstream os;
    os << spec.label() << " fixed point did not converge in " << opts.max_iterations
       << " iterations (relative change " << result.residual << ")";
    throw ConvergenceError(os.str(), sigma, result.residual, result.iterations);
}

Eigen::MatrixXd m_estimate(const Samples& x, const Eigen::VectorXd& mu_hat, const WeightSpec& spec,
                           const FixedPointOptions& opts) {
    return m_estimate_detailed(x, mu_hat, spec, opts).scatter;
}

}  // namespace rescrb::estimators
