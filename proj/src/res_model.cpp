#include "rescrb/res_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rescrb/errors.hpp"
#include "rescrb/matcalc.hpp"

namespace rescrb {

using special::ln_gamma;

namespace {

constexpr double kLn2 = std::numbers::ln2;
const double kLnPi = std::log(std::numbers::pi);

void require_finite_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << what << " must be positive and finite, got " << v;
        throw DomainError(os.str());
    }
}

}  // namespace

Family parse_family(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "t" || lower == "student-t" || lower == "studentt") return Family::StudentT;
    if (lower == "gg" || lower == "generalized-gaussian" || lower == "generalizedgaussian") {
        return Family::GeneralizedGaussian;
    }
    throw InvalidInput("unknown family '" + name + "' (expected t or gg)");
}

std::string family_name(Family family) {
    return family == Family::StudentT ? "t" : "gg";
}

DensityGenerator DensityGenerator::student_t(double lambda, double eta) {
    require_finite_positive(eta, "t scale eta");
    if (!(lambda > 2.0) || !std::isfinite(lambda)) {
        std::ostringstream os;
        os << "t shape lambda must exceed 2 for a finite data power, got " << lambda;
        throw DomainError(os.str());
    }
    return DensityGenerator(Family::StudentT, lambda, eta);
}

DensityGenerator DensityGenerator::generalized_gaussian(double s, double b) {
    require_finite_positive(s, "GG shape s");
    require_finite_positive(b, "GG scale b");
    return DensityGenerator(Family::GeneralizedGaussian, s, b);
}

void RESParams::validate() const {
    const auto n = mu.size();
    if (n < 1) throw InvalidInput("RES parameters: empty mean vector");
    if (sigma.rows() != n || sigma.cols() != n) {
        throw InvalidInput("RES parameters: scatter dimension does not match mean");
    }
    matcalc::require_spd(sigma);
    if (constrained) {
        const double tr = sigma.trace();
        if (std::abs(tr - static_cast<double>(n)) > 1e-10) {
            std::ostringstream os;
            os << "RES parameters: constrained scatter has trace " << tr << ", expected " << n;
            throw InvalidInput(os.str());
        }
    }
}

double log_density_generator(const DensityGenerator& gen, std::size_t n, double t) {
    if (!(t >= 0.0)) throw DomainError("density generator evaluated at a negative argument");
    const double nd = static_cast<double>(n);
    const double lam = gen.shape();
    switch (gen.family()) {
        case Family::StudentT: {
            const double ratio = lam / gen.scale();
            return 0.5 * nd * kLn2 + ln_gamma(0.5 * (lam + nd)) - 0.5 * nd * kLnPi -
                   ln_gamma(0.5 * lam) + 0.5 * lam * std::log(ratio) -
                   0.5 * (lam + nd) * std::log(ratio + t);
        }
        case Family::GeneralizedGaussian: {
            const double s = gen.shape();
            const double b = gen.scale();
            return 0.5 * nd * kLn2 + std::log(s) + ln_gamma(0.5 * nd) - 0.5 * nd * kLnPi -
                   nd / (2.0 * s) * std::log(2.0 * b) - ln_gamma(nd / (2.0 * s)) -
                   std::pow(t, s) / (2.0 * b);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double psi(const DensityGenerator& gen, std::size_t n, double t) {
    if (!(t >= 0.0)) throw DomainError("psi evaluated at a negative argument");
    switch (gen.family()) {
        case Family::StudentT:
            return -0.5 * (gen.shape() + static_cast<double>(n)) /
                   (gen.shape() / gen.scale() + t);
        case Family::GeneralizedGaussian: {
            const double s = gen.shape();
            if (t == 0.0) {
                if (s < 1.0) throw SingularityError("GG psi is singular at t = 0 for s < 1");
                if (s > 1.0) return 0.0;
            }
            return -s * std::pow(t, s - 1.0) / (2.0 * gen.scale());
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double mahalanobis(const RESParams& params, const Eigen::VectorXd& x) {
    if (x.size() != params.mu.size()) throw InvalidInput("observation dimension mismatch");
    const Eigen::VectorXd d = x - params.mu;
    return d.dot(params.sigma.llt().solve(d));
}

double res_logpdf(const RESParams& params, const DensityGenerator& gen, const Eigen::VectorXd& x) {
    matcalc::require_spd(params.sigma);
    if (x.size() != params.mu.size()) throw InvalidInput("observation dimension mismatch");
    const auto n = params.dim();
    const Eigen::LLT<Eigen::MatrixXd> llt(params.sigma);
    const Eigen::VectorXd d = x - params.mu;
    const double q = d.dot(llt.solve(d));
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * static_cast<double>(n) * kLn2 - 0.5 * log_det +
           log_density_generator(gen, n, q);
}

double q_logpdf(const DensityGenerator& gen, std::size_t n, double q) {
    if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n);
    // s_N = 2 pi^{N/2} / Gamma(N/2), the unit-sphere surface area.
    const double log_sphere = kLn2 + 0.5 * nd * kLnPi - ln_gamma(0.5 * nd);
    return log_sphere - (0.5 * nd + 1.0) * kLn2 + (0.5 * nd - 1.0) * std::log(q) +
           log_density_generator(gen, n, q);
}

double q_pdf(const DensityGenerator& gen, std::size_t n, double q) {
    if (q < 0.0) return 0.0;
    if (q == 0.0) {
        if (n == 1) return std::numeric_limits<double>::infinity();
        if (n > 2) return 0.0;
        // N = 2: q^{N/2-1} = 1.
        return std::exp(kLnPi - kLn2 + log_density_generator(gen, n, 0.0));
    }
    return std::exp(q_logpdf(gen, n, q));
}

ModelMoments moments(const DensityGenerator& gen, std::size_t n) {
    const double nd = static_cast<double>(n);
    ModelMoments mm;
    mm.eQpsi = -0.5 * nd;
    switch (gen.family()) {
        case Family::StudentT: {
            const double lam = gen.shape();
            const double eta = gen.scale();
            if (!(lam > 2.0)) throw MomentUndefined("E{Q} is infinite for lambda <= 2");
            mm.eQpsi2 = eta * nd * (lam + nd) / (4.0 * (nd + lam + 2.0));
            mm.eQ2psi2 = nd * (nd + 2.0) * (lam + nd) / (4.0 * (nd + lam + 2.0));
            mm.eQ = lam * nd / (eta * (lam - 2.0));
            break;
        }
        case Family::GeneralizedGaussian: {
            const double s = gen.shape();
            const double b = gen.scale();
            const double lg_base = ln_gamma(nd / (2.0 * s));
            mm.eQpsi2 = s * s *
                        std::exp(ln_gamma((nd + 4.0 * s - 2.0) / (2.0 * s)) - lg_base -
                                 std::log(2.0 * b) / s);
            mm.eQ2psi2 = nd * (nd + 2.0 * s) / 4.0;
            mm.eQ = std::exp(std::log(2.0 * b) / s + ln_gamma((nd + 2.0) / (2.0 * s)) - lg_base);
            break;
        }
    }
    return mm;
}

DensityGenerator calibrate_scale(Family family, double shape, double sigma2, std::size_t n) {
    require_finite_positive(sigma2, "data power");
    if (n < 1) throw InvalidInput("dimension must be at least 1");
    const double nd = static_cast<double>(n);
    switch (family) {
        case Family::StudentT: {
            if (!(shape > 2.0)) throw DomainError("t shape lambda must exceed 2");
            return DensityGenerator::student_t(shape, shape / (sigma2 * (shape - 2.0)));
        }
        case Family::GeneralizedGaussian: {
            require_finite_positive(shape, "GG shape s");
            // E{Q} = (2b)^{1/s} Gamma((N+2)/(2s)) / Gamma(N/(2s)) = sigma2 N.
            const double log_ratio =
                ln_gamma(nd / (2.0 * shape)) - ln_gamma((nd + 2.0) / (2.0 * shape));
            const double b = 0.5 * std::exp(shape * (std::log(sigma2 * nd) + log_ratio));
            return DensityGenerator::generalized_gaussian(shape, b);
        }
    }
    throw InvalidInput("unknown family");
}

Eigen::VectorXd sample_uniform_sphere(std::size_t n, special::RngStream& rng) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    double norm2 = 0.0;
    do {
        for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = special::sample_standard_normal(rng);
        norm2 = u.squaredNorm();
    } while (norm2 == 0.0);
    return u / std::sqrt(norm2);
}

double sample_q(const DensityGenerator& gen, std::size_t n, special::RngStream& rng) {
    const double nd = static_cast<double>(n);
    switch (gen.family()) {
        case Family::StudentT: {
            // Q = (N/eta) F(N, lambda) = (lambda/eta) G1 / G2.
            const double g1 = special::sample_gamma(0.5 * nd, rng);
            const double g2 = special::sample_gamma(0.5 * gen.shape(), rng);
            return gen.shape() / gen.scale() * g1 / g2;
        }
        case Family::GeneralizedGaussian: {
            const double g = special::sample_gamma(nd / (2.0 * gen.shape()), rng);
            return std::pow(2.0 * gen.scale() * g, 1.0 / gen.shape());
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Eigen::MatrixXd sample_res(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_sqrt,
                           const DensityGenerator& gen, std::size_t m, special::RngStream& rng) {
    const auto n = static_cast<std::size_t>(mu.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(m), mu.size());
    for (Eigen::Index row = 0; row < x.rows(); ++row) {
        const double q = sample_q(gen, n, rng);
        const Eigen::VectorXd u = sample_uniform_sphere(n, rng);
        x.row(row) = (mu + std::sqrt(q) * (sigma_sqrt * u)).transpose();
    }
    return x;
}

Eigen::MatrixXd sample_res(const RESParams& params, const DensityGenerator& gen, std::size_t m,
                           special::RngStream& rng) {
    params.validate();
    return sample_res(params.mu, matcalc::sym_sqrt(params.sigma), gen, m, rng);
}

}  // namespace rescrb
