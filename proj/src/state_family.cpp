#include "qfi/state_family.hpp"

#include "qfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qfi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_in_domain(const Domain& domain, double theta) {
    if (!domain.contains(theta)) {
        throw Error(ErrorKind::EvaluationFailure, "theta = " + fmt_num(theta) +
                                                      " is outside the family domain [" +
                                                      fmt_num(domain.lo) + ", " +
                                                      fmt_num(domain.hi) + "]");
    }
}

void require_stencil(const Domain& domain, double theta, double h) {
    if (!domain.contains(theta - h) || !domain.contains(theta + h)) {
        throw Error(ErrorKind::StepTooLarge,
                    "stencil [" + fmt_num(theta - h) + ", " + fmt_num(theta + h) +
                        "] leaves the family domain [" + fmt_num(domain.lo) + ", " +
                        fmt_num(domain.hi) + "]");
    }
}

SpectralDecomposition decompose(const DensityMatrix& rho, double threshold, Eigensolver solver) {
    return solver == Eigensolver::support ? spectral_decompose_support(rho, threshold)
                                          : spectral_decompose(rho, threshold);
}

SpectralDecomposition decompose(const DensityMatrix& rho, const HermitianMatrix& drho,
                                double threshold, Eigensolver solver) {
    return solver == Eigensolver::support ? spectral_decompose_support(rho, drho, threshold)
                                          : spectral_decompose(rho, drho, threshold);
}

Matrix outer_sum(const Eigen::VectorXd& p, const Matrix& v) {
    return v * p.cast<cplx>().asDiagonal() * v.adjoint();
}

// Eigenpairs from a spectral family, sorted descending with the same
// permutation applied to the optional derivative data.
struct SortedSpectral {
    Eigen::VectorXd p;
    Matrix v;
    Eigen::VectorXd dp;
    Matrix dv;
};

SortedSpectral sorted_spectral(const StateFamily::Spectral& fam, double theta, bool with_derivs) {
    const Eigen::VectorXd p = fam.probabilities(theta);
    const Matrix v = fam.vectors(theta);
    Eigen::VectorXd dp;
    Matrix dv;
    if (with_derivs) {
        dp = fam.dprobabilities(theta);
        dv = fam.dvectors(theta);
        if (dp.size() != p.size() || dv.rows() != v.rows() || dv.cols() != v.cols()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "spectral derivative evaluators disagree with eigenpair shapes");
        }
    }
    if (v.cols() != p.size()) {
        throw Error(ErrorKind::DimensionMismatch, "spectral family returned " +
                                                      std::to_string(p.size()) + " eigenvalues but " +
                                                      std::to_string(v.cols()) + " vectors");
    }
    std::vector<Index> order(static_cast<std::size_t>(p.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p(a) > p(b); });

    SortedSpectral out;
    out.p.resize(p.size());
    out.v.resize(v.rows(), v.cols());
    if (with_derivs) {
        out.dp.resize(p.size());
        out.dv.resize(v.rows(), v.cols());
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Index src = order[k];
        const auto dst = static_cast<Index>(k);
        out.p(dst) = p(src);
        out.v.col(dst) = v.col(src);
        if (with_derivs) {
            out.dp(dst) = dp(src);
            out.dv.col(dst) = dv.col(src);
        }
    }
    return out;
}

DerivativeBundle unitary_bundle(const StateFamily::Unitary& fam, double theta, double threshold,
                                Eigensolver solver) {
    SpectralDecomposition decomp = decompose(fam.rho0, threshold, solver);
    if (theta != 0.0) {
        decomp.eigenvectors = unitary_propagator(fam.generator, theta) * decomp.eigenvectors;
        fix_gauge_columns(decomp.eigenvectors);
    }
    const Matrix& psi = decomp.eigenvectors;
    const Matrix h_psi = fam.generator.matrix() * psi;
    const Matrix p_psi_dag = decomp.eigenvalues.cast<cplx>().asDiagonal() * psi.adjoint();
    // -i[H, rho] with rho = Psi P Psi^H, never forming rho itself.
    const Matrix h_rho = h_psi * p_psi_dag;
    Matrix drho = cplx(0.0, -1.0) * (h_rho - h_rho.adjoint());

    Matrix dpsi = cplx(0.0, -1.0) * h_psi;
    Matrix overlaps = psi.adjoint() * dpsi;
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(decomp.support_dim());
    return DerivativeBundle{std::move(decomp), HermitianMatrix::symmetrized(drho), std::move(dp),
                            std::move(dpsi), std::move(overlaps)};
}

DerivativeBundle spectral_exact_bundle(const StateFamily::Spectral& fam, double theta,
                                       double threshold) {
    if (!fam.dprobabilities || !fam.dvectors) {
        throw Error(ErrorKind::EvaluationFailure,
                    "spectral family has no derivative evaluators; use central differences");
    }
    SortedSpectral sp = sorted_spectral(fam, theta, true);
    SpectralDecomposition decomp = decomposition_from_eigenpairs(sp.p, sp.v, threshold);
    const Index s = decomp.support_dim();
    Eigen::VectorXd dp = sp.dp.head(s);
    Matrix dpsi = sp.dv.leftCols(s);
    const Matrix& psi = decomp.eigenvectors;
    const Matrix cross = dpsi * decomp.eigenvalues.cast<cplx>().asDiagonal() * psi.adjoint();
    const Matrix drho = psi * dp.cast<cplx>().asDiagonal() * psi.adjoint() + cross + cross.adjoint();
    Matrix overlaps = psi.adjoint() * dpsi;
    return DerivativeBundle{std::move(decomp), HermitianMatrix::symmetrized(drho), std::move(dp),
                            std::move(dpsi), std::move(overlaps)};
}

}  // namespace

// ---------------------------------------------------------------------------

StateFamily StateFamily::unitary(const HermitianMatrix& generator, const DensityMatrix& rho0,
                                 Domain domain) {
    if (generator.dim() != rho0.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "generator dimension " +
                                                      std::to_string(generator.dim()) +
                                                      " differs from state dimension " +
                                                      std::to_string(rho0.dim()));
    }
    return StateFamily(Unitary{generator, rho0}, domain);
}

StateFamily StateFamily::analytic(DensityFn rho, DerivativeFn drho, Domain domain) {
    if (!rho || !drho) throw Error(ErrorKind::InvalidArgument, "analytic family needs both evaluators");
    return StateFamily(Analytic{std::move(rho), std::move(drho)}, domain);
}

StateFamily StateFamily::sampled(DensityFn rho, Domain domain) {
    if (!rho) throw Error(ErrorKind::InvalidArgument, "sampled family needs an evaluator");
    return StateFamily(Sampled{std::move(rho)}, domain);
}

StateFamily StateFamily::spectral(ProbabilitiesFn probabilities, VectorsFn vectors,
                                  ProbabilitiesFn dprobabilities, VectorsFn dvectors,
                                  Domain domain) {
    if (!probabilities || !vectors) {
        throw Error(ErrorKind::InvalidArgument, "spectral family needs eigenvalue and eigenvector evaluators");
    }
    if (static_cast<bool>(dprobabilities) != static_cast<bool>(dvectors)) {
        throw Error(ErrorKind::InvalidArgument,
                    "spectral derivative evaluators must be given together or not at all");
    }
    return StateFamily(Spectral{std::move(probabilities), std::move(vectors),
                                std::move(dprobabilities), std::move(dvectors)},
                       domain);
}

DensityMatrix StateFamily::evaluate(double theta) const {
    require_in_domain(domain_, theta);
    return std::visit(
        overloaded{
            [&](const Unitary& u) -> DensityMatrix {
                if (theta == 0.0) return u.rho0;
                const Matrix prop = unitary_propagator(u.generator, theta);
                return DensityMatrix(
                    HermitianMatrix::symmetrized(prop * u.rho0.matrix() * prop.adjoint()));
            },
            [&](const Analytic& a) { return a.rho(theta); },
            [&](const Sampled& s) { return s.rho(theta); },
            [&](const Spectral& s) -> DensityMatrix {
                const Eigen::VectorXd p = s.probabilities(theta);
                const Matrix v = s.vectors(theta);
                if (v.cols() != p.size()) {
                    throw Error(ErrorKind::DimensionMismatch,
                                "spectral family eigenvalue/eigenvector counts differ");
                }
                if (std::abs(p.sum() - 1.0) > kTraceTol) {
                    throw Error(ErrorKind::TraceNotOne, "spectral eigenvalues sum to " +
                                                            fmt_num(p.sum()) + " at theta = " +
                                                            fmt_num(theta));
                }
                return DensityMatrix(HermitianMatrix::symmetrized(outer_sum(p, v)));
            },
        },
        kind_);
}

void DerivativeSpec::validate() const {
    if (!(step > 0.0 && step <= 0.1)) {
        throw Error(ErrorKind::InvalidArgument,
                    "finite-difference step must lie in (0, 0.1], got " + fmt_num(step));
    }
}

Matrix unitary_propagator(const HermitianMatrix& generator, double theta) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(generator.matrix());
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigensolverFailure, "generator eigensolver did not converge");
    }
    const Eigen::VectorXcd phases =
        (es.eigenvalues() * (-theta)).unaryExpr([](double a) { return std::polar(1.0, a); });
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

HermitianMatrix evaluate_derivative(const StateFamily& family, double theta,
                                    const DerivativeSpec& spec) {
    spec.validate();
    if (spec.mode == DerivativeSpec::Mode::central_difference) {
        require_stencil(family.domain(), theta, spec.step);
        const double h = spec.step;
        const Matrix plus = family.evaluate(theta + h).matrix();
        const Matrix minus = family.evaluate(theta - h).matrix();
        return HermitianMatrix::symmetrized((plus - minus) / (2.0 * h));
    }

    require_in_domain(family.domain(), theta);
    return std::visit(
        overloaded{
            [&](const StateFamily::Unitary& u) {
                const Matrix rho = family.evaluate(theta).matrix();
                const Matrix& h = u.generator.matrix();
                return HermitianMatrix::symmetrized(cplx(0.0, -1.0) * (h * rho - rho * h));
            },
            [&](const StateFamily::Analytic& a) {
                HermitianMatrix d = a.drho(theta);
                if (d.dim() != a.rho(theta).dim()) {
                    throw Error(ErrorKind::DimensionMismatch,
                                "derivative evaluator dimension differs from the state's");
                }
                return d;
            },
            [&](const StateFamily::Sampled&) -> HermitianMatrix {
                throw Error(ErrorKind::EvaluationFailure,
                            "sampled families have no exact derivative; use central differences");
            },
            [&](const StateFamily::Spectral& s) {
                return spectral_exact_bundle(s, theta, kDefaultThreshold).drho;
            },
        },
        family.kind());
}

PerturbationOverlaps overlaps_from_perturbation(const SpectralDecomposition& decomp,
                                                const HermitianMatrix& drho) {
    if (drho.dim() != decomp.full_dim) {
        throw Error(ErrorKind::DimensionMismatch, "derivative dimension " +
                                                      std::to_string(drho.dim()) +
                                                      " differs from decomposition dimension " +
                                                      std::to_string(decomp.full_dim));
    }
    const Matrix& psi = decomp.eigenvectors;
    const Eigen::VectorXd& p = decomp.eigenvalues;
    const Index s = decomp.support_dim();
    const Matrix d = psi.adjoint() * drho.matrix() * psi;
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());

    PerturbationOverlaps out{Matrix::Zero(s, s), d.diagonal().real()};
    for (Index i = 0; i < s; ++i) {
        for (Index j = 0; j < s; ++j) {
            if (i == j) continue;
            const double gap = p(j) - p(i);
            if (std::abs(gap) < kDegeneracyGap) {
                if (std::abs(d(i, j)) > 1e-9 * scale) {
                    throw Error(ErrorKind::DegenerateGap,
                                "eigenvalues " + std::to_string(i) + " and " + std::to_string(j) +
                                    " differ by " + fmt_num(std::abs(gap)) +
                                    " but the derivative couples them with |drho_ij| = " +
                                    fmt_num(std::abs(d(i, j))) + "; align the cluster first");
                }
                continue;
            }
            out.overlaps(i, j) = d(i, j) / gap;
        }
    }
    return out;
}

DerivativeBundle bundle_from_perturbation(SpectralDecomposition decomp, const HermitianMatrix& drho) {
    PerturbationOverlaps pert = overlaps_from_perturbation(decomp, drho);
    const Matrix& psi = decomp.eigenvectors;
    const Matrix x = drho.matrix() * psi;
    const Matrix d = psi.adjoint() * x;
    const Eigen::VectorXd inv_p = decomp.eigenvalues.cwiseInverse();
    Matrix dpsi = psi * pert.overlaps + (x - psi * d) * inv_p.cast<cplx>().asDiagonal();
    return DerivativeBundle{std::move(decomp), drho, std::move(pert.dp), std::move(dpsi),
                            std::move(pert.overlaps)};
}

DerivativeBundle eigen_derivatives(const StateFamily& family, double theta, double h,
                                   double threshold, Eigensolver solver) {
    if (const auto* u = std::get_if<StateFamily::Unitary>(&family.kind())) {
        require_in_domain(family.domain(), theta);
        return unitary_bundle(*u, theta, threshold, solver);
    }
    DerivativeSpec::central(h).validate();
    require_stencil(family.domain(), theta, h);

    const auto* spectral = std::get_if<StateFamily::Spectral>(&family.kind());
    auto decompose_at = [&](double t) {
        if (spectral != nullptr) {
            SortedSpectral sp = sorted_spectral(*spectral, t, false);
            return decomposition_from_eigenpairs(sp.p, sp.v, threshold);
        }
        return decompose(family.evaluate(t), threshold, solver);
    };
    SpectralDecomposition center = decompose_at(theta);
    SpectralDecomposition minus = decompose_at(theta - h);
    SpectralDecomposition plus = decompose_at(theta + h);

    const Index s = center.support_dim();
    if (minus.support_dim() != s || plus.support_dim() != s) {
        throw Error(ErrorKind::SupportDimensionChanged,
                    "support dimension is " + std::to_string(minus.support_dim()) + ", " +
                        std::to_string(s) + ", " + std::to_string(plus.support_dim()) +
                        " across the stencil at theta = " + fmt_num(theta));
    }
    for (const SpectralDecomposition* d : {&minus, &center, &plus}) {
        const auto clusters = degenerate_clusters(d->eigenvalues);
        if (!clusters.empty()) {
            throw Error(ErrorKind::DegenerateGap,
                        "eigenvalues " + std::to_string(clusters.front().first) + " and " +
                            std::to_string(clusters.front().first + 1) +
                            " are degenerate within the stencil; eigenvector paths are not differentiable");
        }
    }
    for (SpectralDecomposition* d : {&minus, &plus}) {
        for (Index i = 0; i < s; ++i) {
            const cplx c = center.eigenvectors.col(i).dot(d->eigenvectors.col(i));
            if (std::abs(c) < 0.5) {
                throw Error(ErrorKind::DegenerateGap,
                            "eigenvector " + std::to_string(i) +
                                " changes abruptly across the stencil (overlap " +
                                fmt_num(std::abs(c)) + "); eigenvalue paths cross");
            }
            d->eigenvectors.col(i) *= std::conj(c) / std::abs(c);
        }
    }

    Matrix dpsi = (plus.eigenvectors - minus.eigenvectors) / (2.0 * h);
    Eigen::VectorXd dp = (plus.eigenvalues - minus.eigenvalues) / (2.0 * h);
    Matrix overlaps = center.eigenvectors.adjoint() * dpsi;
    HermitianMatrix drho = evaluate_derivative(family, theta, DerivativeSpec::central(h));
    return DerivativeBundle{std::move(center), std::move(drho), std::move(dp), std::move(dpsi),
                            std::move(overlaps)};
}

DerivativeBundle derivative_bundle(const StateFamily& family, double theta,
                                   const DerivativeSpec& spec, double threshold,
                                   Eigensolver solver) {
    spec.validate();
    if (spec.mode == DerivativeSpec::Mode::central_difference) {
        return eigen_derivatives(family, theta, spec.step, threshold, solver);
    }
    require_in_domain(family.domain(), theta);
    return std::visit(
        overloaded{
            [&](const StateFamily::Unitary& u) {
                return unitary_bundle(u, theta, threshold, solver);
            },
            [&](const StateFamily::Analytic& a) {
                const DensityMatrix rho = a.rho(theta);
                const HermitianMatrix drho = a.drho(theta);
                return bundle_from_perturbation(decompose(rho, drho, threshold, solver), drho);
            },
            [&](const StateFamily::Sampled&) -> DerivativeBundle {
                throw Error(ErrorKind::EvaluationFailure,
                            "sampled families have no exact derivative; use central differences");
            },
            [&](const StateFamily::Spectral& s) {
                return spectral_exact_bundle(s, theta, threshold);
            },
        },
        family.kind());
}

}  // namespace qfi
