// hermitian.hpp: Hermitian/density matrix validation and support-restricted spectral decomposition

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace qfi {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kDefaultThreshold = 1e-12;
inline constexpr double kHermiticityTol = 1e-10;  // relative to max-abs entry
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kDegeneracyGap = 1e-9;
inline constexpr double kNearThresholdFactor = 100.0;

/// Square complex matrix equal to its adjoint. The stored entries are the
/// exact Hermitian part of the input, so downstream code can rely on
/// m == m.adjoint() bit-for-bit.
class HermitianMatrix {
public:
    /// Throws NotHermitian when max |m_ij - conj(m_ji)| exceeds
    /// kHermiticityTol times the largest entry magnitude.
    explicit HermitianMatrix(const Matrix& m);

    /// Takes the Hermitian part without checking; for matrices that are
    /// Hermitian only up to rounding (finite differences, products).
    static HermitianMatrix symmetrized(const Matrix& m);

    Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    cplx operator()(Index i, Index j) const { return m_(i, j); }

private:
    struct Unchecked {};
    HermitianMatrix(Unchecked, Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

/// Unit-trace positive semidefinite Hermitian matrix.
class DensityMatrix {
public:
    /// Validates trace and positivity; see validate_density.
    explicit DensityMatrix(const HermitianMatrix& m);

    Index dim() const noexcept { return m_.dim(); }
    const HermitianMatrix& hermitian() const noexcept { return m_; }
    const Matrix& matrix() const noexcept { return m_.matrix(); }

private:
    HermitianMatrix m_;
};

DensityMatrix validate_density(const HermitianMatrix& m);

/// Support eigenpairs of a density matrix. Eigenvalues are sorted
/// descending and all exceed `threshold`; eigenvectors are the columns of
/// `eigenvectors` (full_dim x support_dim).
struct SpectralDecomposition {
    Index full_dim = 0;
    double threshold = kDefaultThreshold;
    Eigen::VectorXd eigenvalues;
    Matrix eigenvectors;
    std::vector<std::string> diagnostics;

    Index support_dim() const noexcept { return eigenvalues.size(); }
};

/// Dense route: full Hermitian eigensolve, then the support cut.
/// With `drho`, eigenvectors of degenerate clusters are rotated to
/// diagonalize the cluster-projected derivative.
SpectralDecomposition spectral_decompose(const DensityMatrix& rho,
                                         double threshold = kDefaultThreshold);
SpectralDecomposition spectral_decompose(const DensityMatrix& rho, const HermitianMatrix& drho,
                                         double threshold = kDefaultThreshold);

/// Support-only route for rank-deficient states: pivoted Cholesky until the
/// residual trace is negligible, then an s x s eigensolve. Costs O(N s^2)
/// instead of O(N^3); falls back to the dense route once the pivoted rank
/// passes N/2.
SpectralDecomposition spectral_decompose_support(const DensityMatrix& rho,
                                                 double threshold = kDefaultThreshold);
SpectralDecomposition spectral_decompose_support(const DensityMatrix& rho,
                                                 const HermitianMatrix& drho,
                                                 double threshold = kDefaultThreshold);

/// Builds a decomposition from caller-supplied support eigenpairs
/// (columns of `vectors`). Sorts descending, drops pairs at or below
/// threshold, checks orthonormality and unit sum.
SpectralDecomposition decomposition_from_eigenpairs(const Eigen::VectorXd& probabilities,
                                                    const Matrix& vectors,
                                                    double threshold = kDefaultThreshold);

/// Global phase rule: the largest-magnitude component becomes real positive
/// (lowest index wins ties). Idempotent.
void fix_gauge(Vector& v);
void fix_gauge_columns(Matrix& columns);

/// Rotates degenerate clusters (gap < kDegeneracyGap) so that the projected
/// derivative block is diagonal. Returns true when any rotation was applied.
bool align_degenerate(SpectralDecomposition& decomp, const HermitianMatrix& drho);

/// Index ranges [first, last] of consecutive support eigenvalues closer
/// than kDegeneracyGap.
std::vector<std::pair<Index, Index>> degenerate_clusters(const Eigen::VectorXd& eigenvalues);

/// Sum_i p_i |psi_i><psi_i|.
Matrix reconstruct(const SpectralDecomposition& decomp);

}  // namespace qfi
