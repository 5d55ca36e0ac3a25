// state_family.hpp: parameterized states theta -> rho_theta and their first-derivative data

#pragma once

#include "qfi/hermitian.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <variant>

namespace qfi {

/// Closed interval of admissible theta values. Finite-difference stencils
/// must stay inside it.
struct Domain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double theta) const noexcept { return theta >= lo && theta <= hi; }
};

enum class Eigensolver { dense, support };

class StateFamily {
public:
    using DensityFn = std::function<DensityMatrix(double)>;
    using DerivativeFn = std::function<HermitianMatrix(double)>;
    using ProbabilitiesFn = std::function<Eigen::VectorXd(double)>;
    using VectorsFn = std::function<Matrix(double)>;

    /// rho_theta = exp(-i H theta) rho0 exp(+i H theta).
    struct Unitary {
        HermitianMatrix generator;
        DensityMatrix rho0;
    };
    struct Analytic {
        DensityFn rho;
        DerivativeFn drho;
    };
    struct Sampled {
        DensityFn rho;
    };
    /// Support eigenpairs as functions of theta; vectors are columns.
    /// The derivative evaluators are optional and enable exact bundles.
    struct Spectral {
        ProbabilitiesFn probabilities;
        VectorsFn vectors;
        ProbabilitiesFn dprobabilities;
        VectorsFn dvectors;
    };
    using Kind = std::variant<Unitary, Analytic, Sampled, Spectral>;

    static StateFamily unitary(const HermitianMatrix& generator, const DensityMatrix& rho0,
                               Domain domain = {});
    static StateFamily analytic(DensityFn rho, DerivativeFn drho, Domain domain = {});
    static StateFamily sampled(DensityFn rho, Domain domain = {});
    static StateFamily spectral(ProbabilitiesFn probabilities, VectorsFn vectors,
                                ProbabilitiesFn dprobabilities = {}, VectorsFn dvectors = {},
                                Domain domain = {});

    DensityMatrix evaluate(double theta) const;

    const Kind& kind() const noexcept { return kind_; }
    const Domain& domain() const noexcept { return domain_; }
    bool is_unitary() const noexcept { return std::holds_alternative<Unitary>(kind_); }

private:
    StateFamily(Kind kind, Domain domain) : kind_(std::move(kind)), domain_(domain) {}

    Kind kind_;
    Domain domain_;
};

inline constexpr double kDefaultStep = 1e-5;

struct DerivativeSpec {
    enum class Mode { exact, central_difference };

    Mode mode = Mode::exact;
    double step = kDefaultStep;

    static DerivativeSpec exact() { return {Mode::exact, kDefaultStep}; }
    static DerivativeSpec central(double h = kDefaultStep) { return {Mode::central_difference, h}; }

    /// Throws InvalidArgument unless step lies in (0, 0.1].
    void validate() const;
};

/// Everything the support-restricted formulas consume at one theta.
/// dpsi columns are |d psi_i>; overlaps(i, j) = <psi_i | d psi_j>.
struct DerivativeBundle {
    SpectralDecomposition rho;
    HermitianMatrix drho;
    Eigen::VectorXd dp;
    std::optional<Matrix> dpsi;
    std::optional<Matrix> overlaps;
};

/// d rho / d theta. Unitary uses -i[H, rho_theta]; Analytic its derivative
/// evaluator; Spectral the product rule when derivative evaluators exist.
/// Central differences are symmetrized to exact Hermitian.
HermitianMatrix evaluate_derivative(const StateFamily& family, double theta,
                                    const DerivativeSpec& spec);

struct PerturbationOverlaps {
    Matrix overlaps;
    Eigen::VectorXd dp;
};

/// First-order perturbation data from d rho in the support eigenbasis:
/// dp_i = (drho)_ii, overlaps_ij = (drho)_ij / (p_j - p_i), zero diagonal
/// (parallel transport). Degenerate pairs must already be aligned.
PerturbationOverlaps overlaps_from_perturbation(const SpectralDecomposition& decomp,
                                                const HermitianMatrix& drho);

/// Complete bundle from (decomposition, d rho). The out-of-support part of
/// |d psi_i> is (1 - Pi) drho |psi_i> / p_i, so no eigenvector outside the
/// support is ever formed.
DerivativeBundle bundle_from_perturbation(SpectralDecomposition decomp, const HermitianMatrix& drho);

/// Finite-difference eigen-derivatives on the stencil theta - h, theta, theta + h.
/// Unitary families bypass differencing with |d psi_i> = -i H |psi_i>.
DerivativeBundle eigen_derivatives(const StateFamily& family, double theta, double h,
                                   double threshold = kDefaultThreshold,
                                   Eigensolver solver = Eigensolver::dense);

/// Dispatches on the derivative mode: exact uses closed forms (unitary,
/// analytic perturbation, spectral evaluators); central_difference goes
/// through eigen_derivatives.
DerivativeBundle derivative_bundle(const StateFamily& family, double theta,
                                   const DerivativeSpec& spec,
                                   double threshold = kDefaultThreshold,
                                   Eigensolver solver = Eigensolver::dense);

/// exp(-i H theta) via the generator's eigendecomposition.
Matrix unitary_propagator(const HermitianMatrix& generator, double theta);

}  // namespace qfi
