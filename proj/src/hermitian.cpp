#include "qfi/hermitian.hpp"

#include "qfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qfi {

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_square(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected square");
    }
    if (m.rows() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "matrix dimension must be positive");
    }
}

void require_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    "support threshold must lie in (0, 1), got " + fmt_num(threshold));
    }
}

void flag_near_threshold(SpectralDecomposition& d) {
    for (Index i = 0; i < d.support_dim(); ++i) {
        if (d.eigenvalues(i) < kNearThresholdFactor * d.threshold) {
            d.diagnostics.push_back("eigenvalue " + std::to_string(i) + " = " +
                                    fmt_num(d.eigenvalues(i)) +
                                    " is within 100x of the support threshold " +
                                    fmt_num(d.threshold) + "; 1/p terms are ill-conditioned");
        }
    }
}

// Applied to every decomposition leaving this module.
void finish(SpectralDecomposition& d, const HermitianMatrix* drho) {
    if (drho != nullptr) {
        if (drho->dim() != d.full_dim) {
            throw Error(ErrorKind::DimensionMismatch, "derivative dimension " +
                                                          std::to_string(drho->dim()) +
                                                          " differs from state dimension " +
                                                          std::to_string(d.full_dim));
        }
        align_degenerate(d, *drho);
    }
    fix_gauge_columns(d.eigenvectors);
    flag_near_threshold(d);
}

SpectralDecomposition dense_decompose(const DensityMatrix& rho, double threshold,
                                      const HermitianMatrix* drho) {
    require_threshold(threshold);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigensolverFailure, "Hermitian eigensolver did not converge");
    }
    const Index n = rho.dim();
    Index s = 0;
    while (s < n && es.eigenvalues()(n - 1 - s) > threshold) ++s;

    SpectralDecomposition d;
    d.full_dim = n;
    d.threshold = threshold;
    d.eigenvalues.resize(s);
    d.eigenvectors.resize(n, s);
    for (Index k = 0; k < s; ++k) {
        d.eigenvalues(k) = es.eigenvalues()(n - 1 - k);
        d.eigenvectors.col(k) = es.eigenvectors().col(n - 1 - k);
    }
    finish(d, drho);
    return d;
}

SpectralDecomposition support_decompose(const DensityMatrix& rho, double threshold,
                                        const HermitianMatrix* drho) {
    require_threshold(threshold);
    const Index n = rho.dim();
    const Index max_rank = std::max<Index>(1, n / 2);
    const Matrix& a = rho.matrix();
    const double tol = std::min(1e-14, threshold);

    Eigen::VectorXd residual = a.diagonal().real();
    Matrix l(n, max_rank);
    Index k = 0;
    double trace_left = residual.sum();
    while (trace_left > tol && k < max_rank) {
        Index pivot = 0;
        const double dmax = residual.maxCoeff(&pivot);
        if (dmax <= 0.0) break;
        Vector col = a.col(pivot);
        if (k > 0) col.noalias() -= l.leftCols(k) * l.row(pivot).leftCols(k).adjoint();
        col /= std::sqrt(dmax);
        l.col(k) = col;
        residual -= col.cwiseAbs2();
        residual(pivot) = 0.0;
        residual = residual.cwiseMax(0.0);
        trace_left = residual.sum();
        ++k;
    }
    if (trace_left > tol) return dense_decompose(rho, threshold, drho);

    // rho ~= L L^H = Q (R R^H) Q^H
    Eigen::HouseholderQR<Matrix> qr(l.leftCols(k));
    const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Matrix small = r * r.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(small);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigensolverFailure, "projected eigensolver did not converge");
    }
    Index s = 0;
    while (s < k && es.eigenvalues()(k - 1 - s) > threshold) ++s;

    SpectralDecomposition d;
    d.full_dim = n;
    d.threshold = threshold;
    d.eigenvalues.resize(s);
    d.eigenvectors.resize(n, s);
    for (Index i = 0; i < s; ++i) {
        d.eigenvalues(i) = es.eigenvalues()(k - 1 - i);
        d.eigenvectors.col(i) = q * es.eigenvectors().col(k - 1 - i);
    }
    finish(d, drho);
    return d;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Matrix& m) {
    require_square(m);
    if (!m.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "matrix contains non-finite entries");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermiticityTol * scale) {
        throw Error(ErrorKind::NotHermitian,
                    "max |M_ij - conj(M_ji)| = " + fmt_num(dev) + " exceeds tolerance " +
                        fmt_num(kHermiticityTol) + " x max|M_ij| = " +
                        fmt_num(kHermiticityTol * scale));
    }
    m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::symmetrized(const Matrix& m) {
    require_square(m);
    return HermitianMatrix(Unchecked{}, 0.5 * (m + m.adjoint()));
}

DensityMatrix::DensityMatrix(const HermitianMatrix& m) : m_(m) {
    const double trace = m.matrix().trace().real();
    if (std::abs(trace - 1.0) > kTraceTol) {
        throw Error(ErrorKind::TraceNotOne, "trace = " + fmt_num(trace) + " deviates from 1 by " +
                                                fmt_num(std::abs(trace - 1.0)) +
                                                " (tolerance " + fmt_num(kTraceTol) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigensolverFailure, "Hermitian eigensolver did not converge");
    }
    const double lowest = es.eigenvalues()(0);
    if (lowest < -kPsdTol) {
        throw Error(ErrorKind::NotPositiveSemidefinite,
                    "smallest eigenvalue " + fmt_num(lowest) + " is below -" + fmt_num(kPsdTol));
    }
}

DensityMatrix validate_density(const HermitianMatrix& m) { return DensityMatrix(m); }

SpectralDecomposition spectral_decompose(const DensityMatrix& rho, double threshold) {
    return dense_decompose(rho, threshold, nullptr);
}

SpectralDecomposition spectral_decompose(const DensityMatrix& rho, const HermitianMatrix& drho,
                                         double threshold) {
    return dense_decompose(rho, threshold, &drho);
}

SpectralDecomposition spectral_decompose_support(const DensityMatrix& rho, double threshold) {
    return support_decompose(rho, threshold, nullptr);
}

SpectralDecomposition spectral_decompose_support(const DensityMatrix& rho,
                                                 const HermitianMatrix& drho, double threshold) {
    return support_decompose(rho, threshold, &drho);
}

SpectralDecomposition decomposition_from_eigenpairs(const Eigen::VectorXd& probabilities,
                                                    const Matrix& vectors, double threshold) {
    require_threshold(threshold);
    if (vectors.cols() != probabilities.size() || vectors.rows() < vectors.cols() ||
        vectors.rows() == 0) {
        throw Error(ErrorKind::DimensionMismatch,
                    "expected N x s eigenvector columns matching " +
                        std::to_string(probabilities.size()) + " eigenvalues");
    }
    const double total = probabilities.sum();
    if (std::abs(total - 1.0) > kTraceTol) {
        throw Error(ErrorKind::TraceNotOne,
                    "eigenvalues sum to " + fmt_num(total) + " (tolerance " + fmt_num(kTraceTol) + ")");
    }
    if (probabilities.size() > 0 && probabilities.minCoeff() < -kPsdTol) {
        throw Error(ErrorKind::NotPositiveSemidefinite,
                    "eigenvalue " + fmt_num(probabilities.minCoeff()) + " is negative");
    }
    const Index m = vectors.cols();
    const double gram_dev = (vectors.adjoint() * vectors - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (gram_dev > kHermiticityTol) {
        throw Error(ErrorKind::InvalidArgument,
                    "eigenvectors are not orthonormal (Gram deviation " + fmt_num(gram_dev) + ")");
    }

    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return probabilities(a) > probabilities(b); });
    Index s = 0;
    while (s < m && probabilities(order[static_cast<std::size_t>(s)]) > threshold) ++s;

    SpectralDecomposition d;
    d.full_dim = vectors.rows();
    d.threshold = threshold;
    d.eigenvalues.resize(s);
    d.eigenvectors.resize(vectors.rows(), s);
    for (Index i = 0; i < s; ++i) {
        d.eigenvalues(i) = probabilities(order[static_cast<std::size_t>(i)]);
        d.eigenvectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
    }
    flag_near_threshold(d);
    return d;
}

void fix_gauge(Vector& v) {
    if (v.size() == 0) return;
    const double top = v.cwiseAbs().maxCoeff();
    if (top == 0.0) return;
    Index pick = 0;
    while (std::abs(v(pick)) < top * (1.0 - 1e-12)) ++pick;
    const cplx c = v(pick);
    if (c.imag() == 0.0 && c.real() > 0.0) return;
    const double mag = std::abs(c);
    v *= std::conj(c) / mag;
    v(pick) = cplx(mag, 0.0);
}

void fix_gauge_columns(Matrix& columns) {
    for (Index k = 0; k < columns.cols(); ++k) {
        Vector col = columns.col(k);
        fix_gauge(col);
        columns.col(k) = col;
    }
}

std::vector<std::pair<Index, Index>> degenerate_clusters(const Eigen::VectorXd& eigenvalues) {
    std::vector<std::pair<Index, Index>> clusters;
    const Index s = eigenvalues.size();
    Index start = 0;
    for (Index i = 1; i <= s; ++i) {
        if (i == s || std::abs(eigenvalues(i - 1) - eigenvalues(i)) >= kDegeneracyGap) {
            if (i - 1 > start) clusters.emplace_back(start, i - 1);
            start = i;
        }
    }
    return clusters;
}

bool align_degenerate(SpectralDecomposition& decomp, const HermitianMatrix& drho) {
    const auto clusters = degenerate_clusters(decomp.eigenvalues);
    for (const auto& [first, last] : clusters) {
        const Index len = last - first + 1;
        const Matrix vc = decomp.eigenvectors.middleCols(first, len);
        const Matrix block = vc.adjoint() * drho.matrix() * vc;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (block + block.adjoint()));
        if (es.info() != Eigen::Success) {
            throw Error(ErrorKind::EigensolverFailure, "cluster eigensolver did not converge");
        }
        // Descending derivative eigenvalues; Rayleigh quotients keep the
        // cluster's spectrum consistent with the rotated vectors.
        const Matrix w = es.eigenvectors().rowwise().reverse();
        const Eigen::VectorXd p = decomp.eigenvalues.segment(first, len);
        decomp.eigenvectors.middleCols(first, len) = vc * w;
        decomp.eigenvalues.segment(first, len) = w.cwiseAbs2().transpose() * p;
        decomp.diagnostics.push_back("degenerate cluster at indices " + std::to_string(first) +
                                     ".." + std::to_string(last) +
                                     " aligned to the derivative's projected block");
    }
    return !clusters.empty();
}

Matrix reconstruct(const SpectralDecomposition& decomp) {
    const Matrix& v = decomp.eigenvectors;
    return v * decomp.eigenvalues.cast<cplx>().asDiagonal() * v.adjoint();
}

}  // namespace qfi
