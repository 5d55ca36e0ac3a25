#include "qfi/matrix_repr.hpp"

#include "qfi/error.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace qfi {

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

Eigen::MatrixXd harmonic_block(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::MatrixXd g(a.size(), b.size());
    for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < b.size(); ++j) g(i, j) = 2.0 * a(i) * b(j) / (a(i) + b(j));
    return g;
}

// 4 [ sum_ij C_ij P_ji + sum_i w_i outside_i ]
double trace_term(const Eigen::MatrixXd& coeff, const Eigen::MatrixXd& transfer,
                  const Eigen::VectorXd& row_weight, const Eigen::VectorXd& outside) {
    double t = (coeff.array() * transfer.transpose().array()).sum();
    if (outside.size() > 0) t += row_weight.head(outside.size()).dot(outside);
    return 4.0 * t;
}

}  // namespace

TransferMatrix transfer_matrix(const DerivativeBundle& bundle) {
    if (!bundle.overlaps || !bundle.dpsi) {
        throw Error(ErrorKind::IncompleteBundle,
                    "transfer matrix needs the overlap table and eigenvector derivatives");
    }
    const Matrix& o = *bundle.overlaps;
    const Matrix& dpsi = *bundle.dpsi;
    if (o.rows() != o.cols() || dpsi.cols() != o.cols()) {
        throw Error(ErrorKind::IncompleteBundle, "overlap table and derivatives disagree in size");
    }
    TransferMatrix t;
    t.entries = o.cwiseAbs2();
    t.outside = dpsi.colwise().squaredNorm().transpose() - t.entries.colwise().sum().transpose();
    return t;
}

TransferMatrix transfer_matrix_unitary(const Matrix& basis, Index support_dim,
                                       const HermitianMatrix& generator) {
    if (basis.rows() != generator.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "basis and generator dimensions differ");
    }
    if (support_dim > basis.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "support larger than the supplied basis");
    }
    const Matrix x = generator.matrix() * basis;
    const Matrix h = basis.adjoint() * x;
    TransferMatrix t;
    t.entries = h.cwiseAbs2();
    t.outside = (x.leftCols(support_dim).colwise().squaredNorm() -
                 t.entries.leftCols(support_dim).colwise().sum())
                    .transpose();
    if (basis.cols() == basis.rows()) t.outside.setZero();
    return t;
}

CoefficientMatrices coefficient_matrices(const Eigen::VectorXd& support_eigenvalues,
                                         Index active_dim) {
    const Index s = support_eigenvalues.size();
    if (active_dim < s) {
        throw Error(ErrorKind::DimensionMismatch, "active dimension smaller than the support");
    }
    CoefficientMatrices c;
    c.p = Eigen::VectorXd::Zero(active_dim);
    c.p.head(s) = support_eigenvalues;
    c.support_dim = s;
    c.D = c.p.asDiagonal();
    c.G = Eigen::MatrixXd::Zero(active_dim, active_dim);
    c.G.topLeftCorner(s, s) = harmonic_block(support_eigenvalues, support_eigenvalues);
    c.C = c.p * Eigen::RowVectorXd::Ones(active_dim) - c.G;
    return c;
}

CoefficientMatrices coefficient_matrices(const SpectralDecomposition& decomp) {
    return coefficient_matrices(decomp.eigenvalues, decomp.support_dim());
}

Eigen::VectorXd sqrt_eigenvalue_derivatives(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) {
    if (p.size() != dp.size()) {
        throw Error(ErrorKind::DimensionMismatch, "eigenvalue and derivative counts differ");
    }
    return dp.cwiseQuotient(2.0 * p.cwiseSqrt());
}

QfiReport qfi_matrix_form(const CoefficientMatrices& coeffs, const TransferMatrix& transfer,
                          const Eigen::VectorXd& dsqrt_p) {
    const Index n = coeffs.C.rows();
    const Index s = coeffs.support_dim;
    if (transfer.dim() != n || transfer.entries.cols() != n) {
        throw Error(ErrorKind::DimensionMismatch, "transfer matrix is " +
                                                      std::to_string(transfer.dim()) +
                                                      "-dimensional, coefficients are " +
                                                      std::to_string(n) + "-dimensional");
    }
    if (transfer.outside.size() != 0 && transfer.outside.size() != s) {
        throw Error(ErrorKind::DimensionMismatch, "completion vector does not match the support");
    }
    if (dsqrt_p.size() != s) {
        throw Error(ErrorKind::DimensionMismatch, "d sqrt(p) has " + std::to_string(dsqrt_p.size()) +
                                                      " entries, support has " + std::to_string(s));
    }
    const double f_ct = 4.0 * dsqrt_p.squaredNorm();
    const double f_qt = trace_term(coeffs.C, transfer.entries, coeffs.p, transfer.outside);
    return make_report(f_ct, f_qt, s, Method::matrix_repr);
}

QfiReport qubit_closed_form(const DensityMatrix& rho, double p12, std::optional<double> dp,
                            double threshold) {
    if (rho.dim() != 2) {
        throw Error(ErrorKind::NotQubit, "closed forms need a 2x2 state, got dimension " +
                                             std::to_string(rho.dim()));
    }
    const Matrix& m = rho.matrix();
    const double det = m(0, 0).real() * m(1, 1).real() - std::norm(m(0, 1));
    const double f_qt = 4.0 * (1.0 - 4.0 * det) * p12;
    std::vector<std::string> diagnostics;
    double f_ct = 0.0;
    const bool pure = det <= threshold;
    if (pure) {
        if (dp && std::abs(*dp) > 1e-12) {
            throw Error(ErrorKind::SingularDeterminant,
                        "det rho = " + fmt_num(det) + " is at or below the threshold " +
                            fmt_num(threshold) + " but a nonzero eigenvalue derivative was supplied");
        }
    } else if (dp) {
        f_ct = (*dp) * (*dp) / det;
    } else {
        diagnostics.emplace_back("no eigenvalue derivative supplied; classical contribution not evaluated");
    }
    return make_report(f_ct, f_qt, pure ? 1 : 2, Method::qubit_closed, std::move(diagnostics));
}

double qubit_transition(const TransferMatrix& transfer) {
    if (transfer.dim() == 2) return transfer.entries(0, 1);
    if (transfer.dim() == 1 && transfer.outside.size() == 1) return transfer.outside(0);
    throw Error(ErrorKind::NotQubit, "transfer matrix does not describe a qubit");
}

// ---------------------------------------------------------------------------

void BlockedState::validate() const {
    if (blocks.empty()) throw Error(ErrorKind::InconsistentBlockDims, "no blocks");
    double total = 0.0;
    for (std::size_t n = 0; n < blocks.size(); ++n) {
        const StateBlock& b = blocks[n];
        if (!(b.weight >= 0.0)) {
            throw Error(ErrorKind::WeightMismatch, "block " + std::to_string(n) +
                                                       " has negative weight " + fmt_num(b.weight));
        }
        total += b.weight;
        if (b.generator.dim() != b.rho.dim()) {
            throw Error(ErrorKind::InconsistentBlockDims,
                        "block " + std::to_string(n) + " generator is " +
                            std::to_string(b.generator.dim()) + "-dimensional, state is " +
                            std::to_string(b.rho.dim()) + "-dimensional");
        }
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw Error(ErrorKind::WeightMismatch, "block weights sum to " + fmt_num(total));
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const CrossGenerator& c : cross_generators) {
        if (c.from >= blocks.size() || c.to >= blocks.size() || c.from == c.to) {
            throw Error(ErrorKind::InconsistentBlockDims,
                        "cross generator indices (" + std::to_string(c.from) + ", " +
                            std::to_string(c.to) + ") are invalid");
        }
        if (c.entries.rows() != blocks[c.from].rho.dim() || c.entries.cols() != blocks[c.to].rho.dim()) {
            throw Error(ErrorKind::InconsistentBlockDims,
                        "cross generator (" + std::to_string(c.from) + ", " + std::to_string(c.to) +
                            ") has shape " + std::to_string(c.entries.rows()) + "x" +
                            std::to_string(c.entries.cols()));
        }
        if (!seen.insert(std::minmax(c.from, c.to)).second) {
            throw Error(ErrorKind::InconsistentBlockDims, "cross generator pair given twice");
        }
    }
}

Index BlockedState::total_dim() const {
    Index n = 0;
    for (const StateBlock& b : blocks) n += b.rho.dim();
    return n;
}

namespace {

std::vector<Index> block_offsets(const BlockedState& s) {
    std::vector<Index> off{0};
    for (const StateBlock& b : s.blocks) off.push_back(off.back() + b.rho.dim());
    return off;
}

}  // namespace

DensityMatrix BlockedState::assembled_state() const {
    validate();
    const auto off = block_offsets(*this);
    Matrix rho = Matrix::Zero(off.back(), off.back());
    for (std::size_t n = 0; n < blocks.size(); ++n) {
        const Index d = blocks[n].rho.dim();
        rho.block(off[n], off[n], d, d) = blocks[n].weight * blocks[n].rho.matrix();
    }
    return DensityMatrix(HermitianMatrix(rho));
}

HermitianMatrix BlockedState::assembled_generator() const {
    validate();
    const auto off = block_offsets(*this);
    Matrix h = Matrix::Zero(off.back(), off.back());
    for (std::size_t n = 0; n < blocks.size(); ++n) {
        const Index d = blocks[n].rho.dim();
        h.block(off[n], off[n], d, d) = blocks[n].generator.matrix();
    }
    for (const CrossGenerator& c : cross_generators) {
        h.block(off[c.from], off[c.to], c.entries.rows(), c.entries.cols()) = c.entries;
        h.block(off[c.to], off[c.from], c.entries.cols(), c.entries.rows()) = c.entries.adjoint();
    }
    return HermitianMatrix(h);
}

BlockInputs block_inputs(const BlockedState& state, double threshold) {
    state.validate();
    BlockInputs in;
    for (const StateBlock& b : state.blocks) {
        SpectralDecomposition d = spectral_decompose(b.rho, threshold);
        in.within.push_back(BlockTerm{coefficient_matrices(d),
                                      transfer_matrix_unitary(d.eigenvectors, d.support_dim(),
                                                              b.generator)});
        in.decompositions.push_back(std::move(d));
    }

    // Ordered pair (n, n2) with h_cross = <n2| H |n>.
    auto add_term = [&](std::size_t n, std::size_t n2, const Matrix& h_cross) {
        const double qn = state.blocks[n].weight;
        const double qn2 = state.blocks[n2].weight;
        if (qn == 0.0) return;
        const SpectralDecomposition& dn = in.decompositions[n];
        const SpectralDecomposition& dn2 = in.decompositions[n2];
        const Eigen::VectorXd a = qn * dn.eigenvalues;
        const Index s2 = qn2 > 0.0 ? dn2.support_dim() : 0;
        const Eigen::VectorXd b = qn2 * dn2.eigenvalues.head(s2);
        const Matrix phi2 = dn2.eigenvectors.leftCols(s2);

        CrossTerm t;
        t.from = n;
        t.to = n2;
        t.coeff = a * Eigen::RowVectorXd::Ones(s2) - harmonic_block(a, b);
        t.row_weight = a;
        const Matrix x = h_cross * dn.eigenvectors;
        const Matrix amp = phi2.adjoint() * x;
        t.transfer = amp.cwiseAbs2();
        t.outside = x.colwise().squaredNorm().transpose() - t.transfer.colwise().sum().transpose();
        in.cross.push_back(std::move(t));
    };
    for (const CrossGenerator& c : state.cross_generators) {
        add_term(c.from, c.to, c.entries.adjoint());
        add_term(c.to, c.from, c.entries);
    }
    return in;
}

double cross_contribution(const std::vector<CrossTerm>& cross) {
    double total = 0.0;
    for (const CrossTerm& t : cross) {
        if (t.coeff.rows() != t.transfer.cols() || t.coeff.cols() != t.transfer.rows() ||
            t.row_weight.size() != t.coeff.rows() || t.outside.size() != t.coeff.rows()) {
            throw Error(ErrorKind::InconsistentBlockDims,
                        "cross term (" + std::to_string(t.from) + ", " + std::to_string(t.to) +
                            ") has inconsistent shapes");
        }
        total += trace_term(t.coeff, t.transfer, t.row_weight, t.outside);
    }
    return total;
}

QfiReport block_qfi(const std::vector<double>& weights, const std::vector<BlockTerm>& within,
                    const std::vector<CrossTerm>* cross) {
    if (weights.size() != within.size() || weights.empty()) {
        throw Error(ErrorKind::InconsistentBlockDims, std::to_string(weights.size()) +
                                                          " weights for " +
                                                          std::to_string(within.size()) + " blocks");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(ErrorKind::WeightMismatch, "negative block weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw Error(ErrorKind::WeightMismatch, "block weights sum to " + fmt_num(total));
    }

    double f = 0.0;
    Index support = 0;
    for (std::size_t n = 0; n < within.size(); ++n) {
        const BlockTerm& b = within[n];
        const QfiReport r = qfi_matrix_form(b.coeffs, b.transfer,
                                            Eigen::VectorXd::Zero(b.coeffs.support_dim));
        f += weights[n] * r.F_qt;
        if (weights[n] > 0.0) support += b.coeffs.support_dim;
    }
    if (cross != nullptr) {
        for (const CrossTerm& t : *cross) {
            if (t.from >= within.size() || t.to >= within.size()) {
                throw Error(ErrorKind::InconsistentBlockDims, "cross term refers to a missing block");
            }
        }
        f += cross_contribution(*cross);
    }
    return make_report(0.0, f, support, Method::block);
}

QfiReport block_qfi(const BlockedState& state, double threshold) {
    const BlockInputs in = block_inputs(state, threshold);
    std::vector<double> weights;
    for (const StateBlock& b : state.blocks) weights.push_back(b.weight);
    return block_qfi(weights, in.within, state.cross_generators.empty() ? nullptr : &in.cross);
}

}  // namespace qfi
