// qfi_engine.hpp: QFI via the SLD definition and via the support-restricted formula

#pragma once

#include "qfi/hermitian.hpp"
#include "qfi/state_family.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace qfi {

enum class Method { sld, support, matrix_repr, qubit_closed, block };

std::string_view to_string(Method m) noexcept;

/// F = F_ct + F_qt. F_ct is clamped to zero when round-off pushes it below
/// zero by less than 1e-12; F_qt is never clamped, only flagged.
struct QfiReport {
    double F = 0.0;
    double F_ct = 0.0;
    double F_qt = 0.0;
    Index support_dim = 0;
    Method method = Method::sld;
    std::vector<std::string> diagnostics;
};

inline constexpr double kClampTol = 1e-12;

/// Builds a report from the two contributions, applying the clamping rule.
QfiReport make_report(double f_ct, double f_qt, Index support_dim, Method method,
                      std::vector<std::string> diagnostics = {});

/// Symmetric logarithmic derivative in the original basis, with the
/// out-of-support block set to zero.
struct SldMatrix {
    Matrix entries;
    Index support_dim = 0;
    bool out_of_support_zeroed = true;
};

SldMatrix build_sld(const SpectralDecomposition& decomp, const HermitianMatrix& drho);

/// tr(rho L^2), the defining expression.
double sld_trace_qfi(const Matrix& rho, const Matrix& sld);

/// Eigenbasis double sum over support rows; the columns outside the support
/// enter only through ||drho psi_i||^2 (completeness), so no out-of-support
/// eigenvector is needed. Degenerate clusters are aligned internally before
/// the classical/quantum split.
QfiReport qfi_sld(const SpectralDecomposition& decomp, const HermitianMatrix& drho);

/// Support-restricted formula from eigenvalue and eigenvector derivatives.
QfiReport qfi_support(const DerivativeBundle& bundle);

/// 4(<dpsi|dpsi> - |<psi|dpsi>|^2) for a normalized pure state.
double qfi_pure(const Vector& psi, const Vector& dpsi);

/// Unitary specialization: weighted eigenstate variances minus the
/// inter-eigenstate coupling. F_ct is identically zero.
QfiReport qfi_unitary(const SpectralDecomposition& decomp, const HermitianMatrix& generator);

/// <psi|H^2|psi> - <psi|H|psi>^2.
double variance(const Vector& psi, const Matrix& generator);

}  // namespace qfi
