// ensemble.hpp: convex-roof machinery for unitary parametrization

#pragma once

#include "qfi/hermitian.hpp"
#include "qfi/state_family.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qfi {

struct EnsembleMember {
    double weight;
    Vector psi;
};

/// Pure-state decomposition sum_k q_k |Psi_k><Psi_k|.
class PureEnsemble {
public:
    /// Throws InvalidEnsemble unless weights are positive, sum to 1 within
    /// 1e-10, and every member is normalized with a common dimension.
    explicit PureEnsemble(std::vector<EnsembleMember> members);

    const std::vector<EnsembleMember>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    Index dim() const noexcept { return members_.front().psi.size(); }

    Matrix reconstruct() const;

private:
    std::vector<EnsembleMember> members_;
};

/// 4 sum_k q_k Var_{Psi_k}(H).
double ensemble_average_variance(const PureEnsemble& ensemble, const HermitianMatrix& generator);

/// Largest inter-eigenstate transition |<psi_i|H|psi_j>|, i != j, on the support.
struct OptimalityWitness {
    Index i = 0;
    Index j = 0;
    double magnitude = 0.0;
};

struct OptimalityVerdict {
    bool optimal = true;
    OptimalityWitness witness;
};

/// The eigen-ensemble attains the convex roof iff every transition element
/// between distinct support eigenstates vanishes (to `tol`).
OptimalityVerdict eigen_ensemble_is_optimal(const SpectralDecomposition& decomp,
                                            const HermitianMatrix& generator, double tol = 1e-9);

/// Y_ij = 2 sqrt(p_i p_j) / (p_i + p_j) H_ij on the support, with its
/// eigenpairs (ascending; vectors as columns in support coordinates).
struct YObservable {
    Matrix kernel;
    Eigen::VectorXd eigenvalues;
    Matrix eigenvectors;
};

YObservable y_observable(const SpectralDecomposition& decomp, const HermitianMatrix& generator);

struct EnsembleResult {
    PureEnsemble ensemble;
    std::vector<std::string> diagnostics;
};

/// |U_k> ~ sum_i <psi_i|y_k> sqrt(p_i) |psi_i> with weight
/// u_k = sum_i |<psi_i|y_k>|^2 p_i. Members with u_k below the support
/// threshold are dropped (weights renormalized) and reported.
EnsembleResult optimal_ensemble(const SpectralDecomposition& decomp, const HermitianMatrix& generator);

/// |Psi~_k> = sum_i V_ki sqrt(p_i) |psi_i> for an r x s isometry V.
PureEnsemble ensemble_from_isometry(const SpectralDecomposition& decomp, const Matrix& isometry);

/// The eigen-ensemble {p_i, |psi_i>}.
PureEnsemble eigen_ensemble(const SpectralDecomposition& decomp);

/// `count` ensembles of `size` members each, isometries from orthonormalized
/// complex Gaussian matrices. Ensemble k is seeded from (seed, k), so
/// results do not depend on evaluation order.
std::vector<PureEnsemble> random_ensembles(const SpectralDecomposition& decomp, std::uint64_t seed,
                                           std::size_t count, Index size);

/// Guard for APIs that take a family: convex-roof results hold for unitary
/// parametrization only.
const StateFamily::Unitary& require_unitary(const StateFamily& family);

}  // namespace qfi
