#include "rescrb/bounds.hpp"

#include <sstream>

#include "rescrb/errors.hpp"
#include "rescrb/matcalc.hpp"

namespace rescrb::bounds {

namespace {

struct Prepared {
    Matrix sigma_inv;
    Vector d;
    double q;
    std::size_t n;
};

Prepared prepare(const RESParams& params, const Vector& x) {
    if (x.size() != params.mu.size()) throw InvalidInput("observation dimension mismatch");
    if (params.sigma.rows() != params.mu.size()) {
        throw InvalidInput("scatter dimension does not match mean");
    }
    Prepared p;
    p.sigma_inv = matcalc::spd_inverse(params.sigma);
    p.d = x - params.mu;
    p.q = p.d.dot(p.sigma_inv * p.d);
    if (p.q < 0.0) p.q = 0.0;
    p.n = params.dim();
    return p;
}

// D_N^T vec(A) for symmetric A.
Vector dup_t(const Matrix& a) {
    return matcalc::duplication_matrix(static_cast<std::size_t>(a.rows())).transpose() *
           matcalc::vec(a);
}

void require_samples(std::size_t m) {
    if (m < 1) throw InvalidInput("sample count M must be at least 1");
}

}  // namespace

Vector score_mu(const RESParams& params, const DensityGenerator& gen, const Vector& x) {
    const auto p = prepare(params, x);
    return -2.0 * psi(gen, p.n, p.q) * (p.sigma_inv * p.d);
}

Vector score_sigma(const RESParams& params, const DensityGenerator& gen, const Vector& x) {
    const auto p = prepare(params, x);
    const Vector sid = p.sigma_inv * p.d;
    const double ps = p.q == 0.0 ? 0.0 : psi(gen, p.n, p.q);
    // (S^{-1} kron S^{-1}) vec(d d^T) = vec(S^{-1} d d^T S^{-1}).
    const Matrix inner = 0.5 * p.sigma_inv + ps * (sid * sid.transpose());
    return -dup_t(inner);
}

Vector nuisance_projection_sigma(const RESParams& params, const DensityGenerator& gen,
                                 const Vector& x) {
    const auto p = prepare(params, x);
    const double qpsi = p.q == 0.0 ? 0.0 : p.q * psi(gen, p.n, p.q);
    return -(0.5 + qpsi / static_cast<double>(p.n)) * dup_t(p.sigma_inv);
}

Vector efficient_score_sigma(const RESParams& params, const DensityGenerator& gen, const Vector& x) {
    const auto p = prepare(params, x);
    if (p.q == 0.0) return Vector::Zero(static_cast<Eigen::Index>(matcalc::vecs_size(p.n)));
    const Matrix inv_sqrt = matcalc::sym_inv_sqrt(params.sigma);
    const Vector u = inv_sqrt * p.d / std::sqrt(p.q);
    const Matrix kron_inv_sqrt = matcalc::kron(inv_sqrt, inv_sqrt);
    const Vector direction = kron_inv_sqrt * matcalc::vec(u * u.transpose()) -
                             matcalc::vec(p.sigma_inv) / static_cast<double>(p.n);
    const double qpsi = p.q * psi(gen, p.n, p.q);
    return -qpsi * (matcalc::duplication_matrix(p.n).transpose() * direction);
}

ACoefficients a_coefficients(const ModelMoments& mm, std::size_t n) {
    const double nd = static_cast<double>(n);
    const double a2 = 2.0 * mm.eQ2psi2 / (nd * (nd + 2.0));
    const double a1 = 0.25 + mm.eQpsi / nd + 0.5 * a2;
    return {a1, a2};
}

FimBlocks fim_blocks(const Matrix& sigma, const ModelMoments& mm) {
    const auto n = static_cast<std::size_t>(sigma.rows());
    const Matrix inv = matcalc::spd_inverse(sigma);
    const auto [a1, a2] = a_coefficients(mm, n);
    const Matrix dup = matcalc::duplication_matrix(n);
    const Vector v = matcalc::vec(inv);
    FimBlocks blocks;
    blocks.c_mu = 4.0 * mm.eQpsi2 / static_cast<double>(n) * inv;
    blocks.c_sigma =
        dup.transpose() * (a1 * v * v.transpose() + a2 * matcalc::kron(inv, inv)) * dup;
    blocks.c_sigma = (0.5 * (blocks.c_sigma + blocks.c_sigma.transpose())).eval();
    return blocks;
}

Matrix sfim_sigma_block(const Matrix& sigma, const ModelMoments& mm) {
    const auto n = static_cast<std::size_t>(sigma.rows());
    const double nd = static_cast<double>(n);
    const Matrix inv = matcalc::spd_inverse(sigma);
    const Matrix dup = matcalc::duplication_matrix(n);
    const Vector v = matcalc::vec(inv);
    const double scale = 2.0 * mm.eQ2psi2 / (nd * (nd + 2.0));
    Matrix block = scale * dup.transpose() * (matcalc::kron(inv, inv) - v * v.transpose() / nd) * dup;
    return 0.5 * (block + block.transpose());
}

Matrix trace_constraint_basis(std::size_t n) {
    const Eigen::RowVectorXd j = matcalc::diag_indicator(n).transpose();
    return matcalc::nullspace_basis(j, matcalc::vecs_size(n) - 1);
}

Matrix constrained_inverse(const Matrix& info, const Matrix& basis) {
    if (basis.rows() != info.rows()) throw InvalidInput("basis does not match information size");
    Matrix reduced = basis.transpose() * info * basis;
    reduced = (0.5 * (reduced + reduced.transpose())).eval();
    Matrix inv;
    try {
        inv = matcalc::spd_inverse(reduced);
    } catch (const NotPositiveDefinite& e) {
        throw NumericalRankError(std::string("reduced information matrix is singular: ") +
                                 e.what());
    }
    Matrix bound = basis * inv * basis.transpose();
    return 0.5 * (bound + bound.transpose());
}

BoundReport ccrb(const RESParams& params, const ModelMoments& mm, std::size_t m,
                 const std::optional<Matrix>& basis) {
    require_samples(m);
    const auto blocks = fim_blocks(params.sigma, mm);
    const Matrix u = basis ? *basis : trace_constraint_basis(params.dim());
    const double md = static_cast<double>(m);
    BoundReport report;
    report.samples = m;
    report.ccrb_mu = matcalc::spd_inverse(md * blocks.c_mu);
    report.ccrb_sigma = constrained_inverse(md * blocks.c_sigma, u);
    bound_indices(report);
    return report;
}

BoundReport cscrb(const RESParams& params, const ModelMoments& mm, std::size_t m,
                  const std::optional<Matrix>& basis) {
    require_samples(m);
    const auto n = params.dim();
    const Matrix u = basis ? *basis : trace_constraint_basis(n);
    const double md = static_cast<double>(m);
    BoundReport report;
    report.samples = m;
    report.cscrb_mu = static_cast<double>(n) / (4.0 * mm.eQpsi2 * md) * params.sigma;
    report.cscrb_sigma = constrained_inverse(md * sfim_sigma_block(params.sigma, mm), u);
    bound_indices(report);
    return report;
}

BoundReport compute_bounds(const RESParams& params, const DensityGenerator& gen, std::size_t m) {
    params.validate();
    const auto mm = moments(gen, params.dim());
    const Matrix u = trace_constraint_basis(params.dim());
    BoundReport report = ccrb(params, mm, m, u);
    const BoundReport semi = cscrb(params, mm, m, u);
    report.cscrb_mu = semi.cscrb_mu;
    report.cscrb_sigma = semi.cscrb_sigma;
    bound_indices(report);
    return report;
}

void bound_indices(BoundReport& report) {
    auto norm = [](const Matrix& a) { return a.size() == 0 ? 0.0 : matcalc::frobenius_norm(a); };
    report.eps_ccrb_mu = norm(report.ccrb_mu);
    report.eps_ccrb_sigma = norm(report.ccrb_sigma);
    report.eps_cscrb_mu = norm(report.cscrb_mu);
    report.eps_cscrb_sigma = norm(report.cscrb_sigma);
}

}  // namespace rescrb::bounds
