// matrix_repr.hpp: trace-form QFI: D, G, C = D*I - G, transfer matrix P, qubit and blocked forms

#pragma once

#include "qfi/hermitian.hpp"
#include "qfi/qfi_engine.hpp"
#include "qfi/state_family.hpp"

#include <optional>
#include <vector>

namespace qfi {

/// P_ij = |<psi_i|d psi_j>|^2 on an active index range of size n >= s.
/// Indices beyond the active range are summed analytically into
/// `outside(i)` = sum_{j inactive} P_ji for each support column i, so the
/// trace formula never needs the inactive eigenvectors. When the active
/// range is the whole space, outside is zero.
struct TransferMatrix {
    Eigen::MatrixXd entries;
    Eigen::VectorXd outside;

    Index dim() const noexcept { return entries.rows(); }
};

/// From a bundle's overlap table and |d psi_i>; active range = support.
TransferMatrix transfer_matrix(const DerivativeBundle& bundle);

/// Unitary families: P_ij = |<phi_i|H|phi_j>|^2 for the columns of `basis`
/// (N x n, orthonormal, first s columns the support). With a complete basis
/// (n = N) this is the full N-dimensional transfer matrix.
TransferMatrix transfer_matrix_unitary(const Matrix& basis, Index support_dim,
                                       const HermitianMatrix& generator);

/// D = diag(p) (zero-padded to the active size), G = harmonic means on the
/// support block, C = D*I - G.
struct CoefficientMatrices {
    Eigen::VectorXd p;
    Index support_dim = 0;
    Eigen::MatrixXd D;
    Eigen::MatrixXd G;
    Eigen::MatrixXd C;
};

CoefficientMatrices coefficient_matrices(const SpectralDecomposition& decomp);
CoefficientMatrices coefficient_matrices(const Eigen::VectorXd& support_eigenvalues,
                                         Index active_dim);

/// d sqrt(p_i) = dp_i / (2 sqrt(p_i)) on the support.
Eigen::VectorXd sqrt_eigenvalue_derivatives(const Eigen::VectorXd& p, const Eigen::VectorXd& dp);

/// F_ct = 4 sum (d sqrt p_i)^2, F_qt = 4 Tr(C P) (+ completion).
QfiReport qfi_matrix_form(const CoefficientMatrices& coeffs, const TransferMatrix& transfer,
                          const Eigen::VectorXd& dsqrt_p);

/// Qubit closed forms: F_qt = 4 (1 - 4 det rho) P_12, F_ct = (dp)^2 / det rho.
QfiReport qubit_closed_form(const DensityMatrix& rho, double p12,
                            std::optional<double> dp = std::nullopt,
                            double threshold = kDefaultThreshold);

/// P_12 for a qubit transfer matrix: the explicit entry for a rank-2 state,
/// the completion term for a pure one.
double qubit_transition(const TransferMatrix& transfer);

// ------------------------------------------------------------------------
// Superselection blocks

struct StateBlock {
    double weight;
    DensityMatrix rho;
    HermitianMatrix generator;
};

/// Generator elements <block from| H |block to>, shape d_from x d_to.
/// The Hermitian counterpart is implied.
struct CrossGenerator {
    std::size_t from;
    std::size_t to;
    Matrix entries;
};

/// rho = direct sum of Q_n rho^(n); generator block-diagonal plus optional
/// cross blocks.
struct BlockedState {
    std::vector<StateBlock> blocks;
    std::vector<CrossGenerator> cross_generators;

    /// Throws WeightMismatch or InconsistentBlockDims.
    void validate() const;
    Index total_dim() const;
    DensityMatrix assembled_state() const;
    HermitianMatrix assembled_generator() const;
};

/// Per-block inputs to the weighted sum.
struct BlockTerm {
    CoefficientMatrices coeffs;   // from the normalized block state
    TransferMatrix transfer;
};

/// Cross contribution 4 Tr[C^(nn') P^(n'n)] for an ordered pair (from, to).
/// coeff rows: support of `from`; columns: support of `to`. transfer rows:
/// support of `to`; columns: support of `from`. `outside` sums P over the
/// non-support states of `to`, weighted in the trace by `row_weight`.
struct CrossTerm {
    std::size_t from;
    std::size_t to;
    Eigen::MatrixXd coeff;
    Eigen::VectorXd row_weight;
    Eigen::MatrixXd transfer;
    Eigen::VectorXd outside;
};

struct BlockInputs {
    std::vector<BlockTerm> within;
    std::vector<CrossTerm> cross;
    std::vector<SpectralDecomposition> decompositions;
};

/// Decomposes each block and forms the within- and cross-block terms.
BlockInputs block_inputs(const BlockedState& state, double threshold = kDefaultThreshold);

/// F = sum_n Q_n F^(n) (+ sum_{n != n'} 4 Tr[C^(nn') P^(n'n)] when cross
/// terms are supplied).
QfiReport block_qfi(const std::vector<double>& weights, const std::vector<BlockTerm>& within,
                    const std::vector<CrossTerm>* cross = nullptr);

QfiReport block_qfi(const BlockedState& state, double threshold = kDefaultThreshold);

/// Sum of the cross terms alone.
double cross_contribution(const std::vector<CrossTerm>& cross);

}  // namespace qfi
