#include "qfi/qfi_engine.hpp"

#include "qfi/error.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace qfi {

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_same_dim(const SpectralDecomposition& decomp, Index n, const char* what) {
    if (n != decomp.full_dim) {
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " dimension " +
                                                      std::to_string(n) +
                                                      " differs from state dimension " +
                                                      std::to_string(decomp.full_dim));
    }
}

}  // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::sld: return "sld";
        case Method::support: return "support";
        case Method::matrix_repr: return "matrix_repr";
        case Method::qubit_closed: return "qubit_closed";
        case Method::block: return "block";
    }
    return "unknown";
}

QfiReport make_report(double f_ct, double f_qt, Index support_dim, Method method,
                      std::vector<std::string> diagnostics) {
    if (f_ct < 0.0) {
        if (f_ct > -kClampTol) {
            diagnostics.push_back("classical contribution " + fmt_num(f_ct) +
                                  " clamped to 0 (round-off)");
            f_ct = 0.0;
        } else {
            diagnostics.push_back("classical contribution is negative: " + fmt_num(f_ct));
        }
    }
    if (f_qt < 0.0) {
        diagnostics.push_back("quantum contribution is negative: " + fmt_num(f_qt) +
                              (f_qt > -kClampTol ? " (within round-off)" : ""));
    }
    double f = f_ct + f_qt;
    if (f < 0.0 && f > -kClampTol) {
        diagnostics.push_back("total " + fmt_num(f) + " clamped to 0 (round-off)");
        f = 0.0;
    }
    return QfiReport{f, f_ct, f_qt, support_dim, method, std::move(diagnostics)};
}

SldMatrix build_sld(const SpectralDecomposition& decomp, const HermitianMatrix& drho) {
    require_same_dim(decomp, drho.dim(), "derivative");
    const Matrix& psi = decomp.eigenvectors;
    const Eigen::VectorXd& p = decomp.eigenvalues;
    const Index s = decomp.support_dim();

    const Matrix x = drho.matrix() * psi;
    const Matrix d = psi.adjoint() * x;
    Matrix k(s, s);
    for (Index i = 0; i < s; ++i)
        for (Index j = 0; j < s; ++j) k(i, j) = 2.0 * d(i, j) / (p(i) + p(j));

    // Support/complement cross block: L_ij = 2 (drho)_ij / p_i for i in the
    // support and j outside it, summed via (1 - Pi) drho psi_i.
    const Matrix y = x - psi * d;
    const Matrix a = psi * (2.0 * p.cwiseInverse()).cast<cplx>().asDiagonal() * y.adjoint();
    Matrix l = psi * k * psi.adjoint() + a + a.adjoint();
    return SldMatrix{0.5 * (l + l.adjoint()), s, true};
}

double sld_trace_qfi(const Matrix& rho, const Matrix& sld) {
    if (rho.rows() != sld.rows() || rho.cols() != sld.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "state and SLD dimensions differ");
    }
    return (rho * sld * sld).trace().real();
}

QfiReport qfi_sld(const SpectralDecomposition& decomp, const HermitianMatrix& drho) {
    require_same_dim(decomp, drho.dim(), "derivative");
    SpectralDecomposition aligned = decomp;
    align_degenerate(aligned, drho);

    const Matrix& psi = aligned.eigenvectors;
    const Eigen::VectorXd& p = aligned.eigenvalues;
    const Index s = aligned.support_dim();
    const Matrix x = drho.matrix() * psi;
    const Matrix d = psi.adjoint() * x;
    const Matrix outside = x - psi * d;

    double f_ct = 0.0;
    double f_qt = 0.0;
    for (Index i = 0; i < s; ++i) {
        const double dii = d(i, i).real();
        f_ct += dii * dii / p(i);
        for (Index j = 0; j < s; ++j) {
            if (j == i) continue;
            assert(p(i) + p(j) > 0.0);
            const double denom = p(i) + p(j);
            f_qt += 4.0 * p(i) / (denom * denom) * std::norm(d(i, j));
        }
        // j outside the support: 4 p_i / p_i^2 |(drho)_ij|^2 summed by completeness
        f_qt += 4.0 / p(i) * outside.col(i).squaredNorm();
    }
    return make_report(f_ct, f_qt, s, Method::sld, aligned.diagnostics);
}

QfiReport qfi_support(const DerivativeBundle& bundle) {
    if (!bundle.dpsi || !bundle.overlaps) {
        throw Error(ErrorKind::IncompleteBundle,
                    "support formula needs eigenvector derivatives and the overlap table");
    }
    const SpectralDecomposition& decomp = bundle.rho;
    const Index s = decomp.support_dim();
    const Matrix& dpsi = *bundle.dpsi;
    const Matrix& overlaps = *bundle.overlaps;
    if (bundle.dp.size() != s || dpsi.cols() != s || dpsi.rows() != decomp.full_dim ||
        overlaps.rows() != s || overlaps.cols() != s) {
        throw Error(ErrorKind::IncompleteBundle,
                    "bundle shapes do not match support dimension " + std::to_string(s));
    }
    const Eigen::VectorXd& p = decomp.eigenvalues;

    double f_ct = 0.0;
    double motion = 0.0;
    double coupling = 0.0;
    for (Index i = 0; i < s; ++i) {
        f_ct += bundle.dp(i) * bundle.dp(i) / p(i);
        motion += 4.0 * p(i) * dpsi.col(i).squaredNorm();
        for (Index j = 0; j < s; ++j) {
            coupling += 8.0 * p(i) * p(j) / (p(i) + p(j)) * std::norm(overlaps(i, j));
        }
    }
    return make_report(f_ct, motion - coupling, s, Method::support, decomp.diagnostics);
}

double qfi_pure(const Vector& psi, const Vector& dpsi) {
    if (psi.size() != dpsi.size()) {
        throw Error(ErrorKind::DimensionMismatch, "state and derivative lengths differ");
    }
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-10) {
        throw Error(ErrorKind::NotNormalized, "||psi|| = " + fmt_num(norm) + " deviates from 1");
    }
    const double f = 4.0 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
    return std::max(0.0, f);
}

double variance(const Vector& psi, const Matrix& generator) {
    const Vector h_psi = generator * psi;
    const double mean = psi.dot(h_psi).real();
    return h_psi.squaredNorm() - mean * mean;
}

QfiReport qfi_unitary(const SpectralDecomposition& decomp, const HermitianMatrix& generator) {
    require_same_dim(decomp, generator.dim(), "generator");
    const Matrix& psi = decomp.eigenvectors;
    const Eigen::VectorXd& p = decomp.eigenvalues;
    const Index s = decomp.support_dim();
    const Matrix x = generator.matrix() * psi;
    const Matrix h = psi.adjoint() * x;

    double weighted = 0.0;
    double coupling = 0.0;
    for (Index i = 0; i < s; ++i) {
        const double mean = h(i, i).real();
        weighted += p(i) * 4.0 * (x.col(i).squaredNorm() - mean * mean);
        for (Index j = 0; j < s; ++j) {
            if (j == i) continue;
            coupling += 8.0 * p(i) * p(j) / (p(i) + p(j)) * std::norm(h(i, j));
        }
    }
    return make_report(0.0, weighted - coupling, s, Method::support, decomp.diagnostics);
}

}  // namespace qfi
