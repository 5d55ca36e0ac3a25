#include "qfi/ensemble.hpp"

#include "qfi/error.hpp"
#include "qfi/qfi_engine.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace qfi {

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_same_dim(Index a, Index b) {
    if (a != b) {
        throw Error(ErrorKind::DimensionMismatch, "generator dimension " + std::to_string(b) +
                                                      " differs from state dimension " +
                                                      std::to_string(a));
    }
}

}  // namespace

PureEnsemble::PureEnsemble(std::vector<EnsembleMember> members) : members_(std::move(members)) {
    if (members_.empty()) throw Error(ErrorKind::InvalidEnsemble, "ensemble has no members");
    const Index n = members_.front().psi.size();
    double total = 0.0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
        const EnsembleMember& m = members_[k];
        if (!(m.weight > 0.0)) {
            throw Error(ErrorKind::InvalidEnsemble, "member " + std::to_string(k) +
                                                        " has non-positive weight " + fmt_num(m.weight));
        }
        if (m.psi.size() != n || n == 0) {
            throw Error(ErrorKind::InvalidEnsemble, "member " + std::to_string(k) +
                                                        " has inconsistent dimension");
        }
        if (std::abs(m.psi.norm() - 1.0) > 1e-10) {
            throw Error(ErrorKind::InvalidEnsemble, "member " + std::to_string(k) +
                                                        " is not normalized (norm " +
                                                        fmt_num(m.psi.norm()) + ")");
        }
        total += m.weight;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw Error(ErrorKind::InvalidEnsemble, "weights sum to " + fmt_num(total));
    }
}

Matrix PureEnsemble::reconstruct() const {
    Matrix rho = Matrix::Zero(dim(), dim());
    for (const EnsembleMember& m : members_) rho += m.weight * m.psi * m.psi.adjoint();
    return rho;
}

double ensemble_average_variance(const PureEnsemble& ensemble, const HermitianMatrix& generator) {
    require_same_dim(ensemble.dim(), generator.dim());
    double total = 0.0;
    for (const EnsembleMember& m : ensemble.members()) {
        total += m.weight * variance(m.psi, generator.matrix());
    }
    return 4.0 * total;
}

OptimalityVerdict eigen_ensemble_is_optimal(const SpectralDecomposition& decomp,
                                            const HermitianMatrix& generator, double tol) {
    require_same_dim(decomp.full_dim, generator.dim());
    const Matrix& psi = decomp.eigenvectors;
    const Matrix h = psi.adjoint() * generator.matrix() * psi;
    OptimalityVerdict v;
    for (Index i = 0; i < h.rows(); ++i) {
        for (Index j = 0; j < h.cols(); ++j) {
            if (i == j) continue;
            const double mag = std::abs(h(i, j));
            if (mag > v.witness.magnitude) v.witness = {i, j, mag};
        }
    }
    v.optimal = v.witness.magnitude <= tol;
    return v;
}

YObservable y_observable(const SpectralDecomposition& decomp, const HermitianMatrix& generator) {
    require_same_dim(decomp.full_dim, generator.dim());
    const Matrix& psi = decomp.eigenvectors;
    const Eigen::VectorXd& p = decomp.eigenvalues;
    const Index s = decomp.support_dim();
    if (s == 0) throw Error(ErrorKind::InvalidArgument, "empty support");
    const Matrix h = psi.adjoint() * generator.matrix() * psi;
    Matrix y(s, s);
    for (Index i = 0; i < s; ++i)
        for (Index j = 0; j < s; ++j) y(i, j) = 2.0 * std::sqrt(p(i) * p(j)) / (p(i) + p(j)) * h(i, j);
    y = 0.5 * (y + y.adjoint());

    Eigen::SelfAdjointEigenSolver<Matrix> es(y);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigensolverFailure, "Y eigensolver did not converge");
    }
    Matrix vecs = es.eigenvectors();
    fix_gauge_columns(vecs);
    return YObservable{std::move(y), es.eigenvalues(), std::move(vecs)};
}

EnsembleResult optimal_ensemble(const SpectralDecomposition& decomp, const HermitianMatrix& generator) {
    const YObservable y = y_observable(decomp, generator);
    const Eigen::VectorXd sqrt_p = decomp.eigenvalues.cwiseSqrt();
    std::vector<EnsembleMember> members;
    std::vector<std::string> diagnostics;
    double kept = 0.0;
    for (Index k = 0; k < y.eigenvectors.cols(); ++k) {
        const Vector c = y.eigenvectors.col(k).cwiseProduct(sqrt_p.cast<cplx>());
        const double u = c.squaredNorm();
        if (u < decomp.threshold) {
            diagnostics.push_back("member " + std::to_string(k) + " dropped: weight " + fmt_num(u) +
                                  " below threshold (DegenerateWeight)");
            continue;
        }
        members.push_back({u, decomp.eigenvectors * c / std::sqrt(u)});
        kept += u;
    }
    for (EnsembleMember& m : members) m.weight /= kept;
    return EnsembleResult{PureEnsemble(std::move(members)), std::move(diagnostics)};
}

PureEnsemble ensemble_from_isometry(const SpectralDecomposition& decomp, const Matrix& isometry) {
    const Index s = decomp.support_dim();
    if (isometry.cols() != s || isometry.rows() < s) {
        throw Error(ErrorKind::InvalidSize, "isometry must be r x s with r >= s = " + std::to_string(s));
    }
    const Matrix scaled = decomp.eigenvectors * decomp.eigenvalues.cwiseSqrt().cast<cplx>().asDiagonal();
    std::vector<EnsembleMember> members;
    for (Index k = 0; k < isometry.rows(); ++k) {
        const Vector tilde = scaled * isometry.row(k).transpose();
        const double q = tilde.squaredNorm();
        if (q <= 0.0) continue;
        members.push_back({q, tilde / std::sqrt(q)});
    }
    return PureEnsemble(std::move(members));
}

PureEnsemble eigen_ensemble(const SpectralDecomposition& decomp) {
    const Index s = decomp.support_dim();
    return ensemble_from_isometry(decomp, Matrix::Identity(s, s));
}

std::vector<PureEnsemble> random_ensembles(const SpectralDecomposition& decomp, std::uint64_t seed,
                                           std::size_t count, Index size) {
    const Index s = decomp.support_dim();
    if (size < s || s == 0) {
        throw Error(ErrorKind::InvalidSize, "ensemble size " + std::to_string(size) +
                                                " is smaller than the support dimension " +
                                                std::to_string(s));
    }
    std::vector<PureEnsemble> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        Matrix g(size, s);
        for (Index c = 0; c < s; ++c)
            for (Index r = 0; r < size; ++r) g(r, c) = cplx(normal(gen), normal(gen));
        Eigen::HouseholderQR<Matrix> qr(g);
        const Matrix v = qr.householderQ() * Matrix::Identity(size, s);
        out.push_back(ensemble_from_isometry(decomp, v));
    }
    return out;
}

const StateFamily::Unitary& require_unitary(const StateFamily& family) {
    if (const auto* u = std::get_if<StateFamily::Unitary>(&family.kind())) return *u;
    throw Error(ErrorKind::UnsupportedParametrization,
                "convex-roof analysis applies to unitary parametrization only");
}

}  // namespace qfi
