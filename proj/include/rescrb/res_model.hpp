#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "rescrb/special.hpp"

namespace rescrb {

enum class Family { StudentT, GeneralizedGaussian };

/// Parses "t" / "student-t" / "gg" / "generalized-gaussian".
Family parse_family(const std::string& name);
std::string family_name(Family family);

/// Density generator g0 of a real elliptically symmetric law.
///
/// StudentT:             g0(t) ~ (lambda/eta + t)^{-(lambda+N)/2}, shape lambda > 2, scale eta.
/// GeneralizedGaussian:  g0(t) ~ exp(-t^s / (2b)),                  shape s > 0,      scale b.
///
/// Both carry the normalizing constants that make the RES pdf integrate to one
/// at the dimension N the generator is evaluated with.
class DensityGenerator {
public:
    static DensityGenerator student_t(double lambda, double eta);
    static DensityGenerator generalized_gaussian(double s, double b);

    Family family() const noexcept { return family_; }
    double shape() const noexcept { return shape_; }
    double scale() const noexcept { return scale_; }

    bool operator==(const DensityGenerator&) const = default;

private:
    DensityGenerator(Family family, double shape, double scale)
        : family_(family), shape_(shape), scale_(scale) {}

    Family family_;
    double shape_;
    double scale_;
};

struct RESParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    bool constrained = true;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mu.size()); }

    /// Checks dimensions, symmetry, positive-definiteness and, when
    /// constrained, |tr(sigma) - N| <= 1e-10.
    void validate() const;
};

struct ModelMoments {
    double eQpsi = 0.0;    // E{Q psi(Q)}
    double eQpsi2 = 0.0;   // E{Q psi(Q)^2}
    double eQ2psi2 = 0.0;  // E{Q^2 psi(Q)^2}
    double eQ = 0.0;       // E{Q}
};

/// ln g0(t) at dimension n.
double log_density_generator(const DensityGenerator& gen, std::size_t n, double t);

/// psi(t) = d/dt ln g0(t).
double psi(const DensityGenerator& gen, std::size_t n, double t);

/// Mahalanobis form (x - mu)^T sigma^{-1} (x - mu).
double mahalanobis(const RESParams& params, const Eigen::VectorXd& x);

double res_logpdf(const RESParams& params, const DensityGenerator& gen, const Eigen::VectorXd& x);

/// Density of the second-order modular variate Q = (x-mu)^T sigma^{-1} (x-mu).
double q_pdf(const DensityGenerator& gen, std::size_t n, double q);
double q_logpdf(const DensityGenerator& gen, std::size_t n, double q);

ModelMoments moments(const DensityGenerator& gen, std::size_t n);

/// Generator whose data power E{Q}/N equals sigma2.
DensityGenerator calibrate_scale(Family family, double shape, double sigma2, std::size_t n);

Eigen::VectorXd sample_uniform_sphere(std::size_t n, special::RngStream& rng);

double sample_q(const DensityGenerator& gen, std::size_t n, special::RngStream& rng);

/// M x N matrix; row m is mu + sqrt(Q_m) sigma^{1/2} u_m.
Eigen::MatrixXd sample_res(const RESParams& params, const DensityGenerator& gen, std::size_t m,
                           special::RngStream& rng);

/// Same draw as sample_res with a precomputed sigma^{1/2}, for hot loops.
Eigen::MatrixXd sample_res(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_sqrt,
                           const DensityGenerator& gen, std::size_t m, special::RngStream& rng);

}  // namespace rescrb
