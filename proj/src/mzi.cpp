#include "qfi/mzi.hpp"

#include "qfi/error.hpp"
#include "qfi/state_family.hpp"

#include <cmath>
#include <map>

namespace qfi::mzi {

namespace {

constexpr cplx kMinusHalfI{0.0, -0.5};

}  // namespace

HermitianMatrix generator_full(int cutoff) {
    if (cutoff < 1) throw Error(ErrorKind::InvalidArgument, "cutoff must be at least 1");
    const TwoModeSpace space{cutoff};
    Matrix h = Matrix::Zero(space.dim(), space.dim());
    // -(i/2) a^dag b |na, nb> = -(i/2) sqrt(na+1) sqrt(nb) |na+1, nb-1>
    for (int na = 0; na + 1 < cutoff; ++na) {
        for (int nb = 1; nb < cutoff; ++nb) {
            const cplx amp = kMinusHalfI * std::sqrt(double(na + 1) * double(nb));
            h(space.index(na + 1, nb - 1), space.index(na, nb)) = amp;
            h(space.index(na, nb), space.index(na + 1, nb - 1)) = std::conj(amp);
        }
    }
    return HermitianMatrix(h);
}

HermitianMatrix generator_sector(int photons) {
    if (photons < 0) throw Error(ErrorKind::InvalidArgument, "photon number must be non-negative");
    const Index d = photons + 1;
    Matrix h = Matrix::Zero(d, d);
    for (int k = 0; k < photons; ++k) {
        const cplx amp = kMinusHalfI * std::sqrt(double(k + 1) * double(photons - k));
        h(k + 1, k) = amp;
        h(k, k + 1) = std::conj(amp);
    }
    return HermitianMatrix(h);
}

Vector fock_input_full(int photons, int cutoff) {
    const TwoModeSpace space{cutoff};
    Vector v = Vector::Zero(space.dim());
    v(space.index(photons, 0)) = 1.0;
    return v;
}

Vector fock_input_sector(int photons) {
    Vector v = Vector::Zero(photons + 1);
    v(photons) = 1.0;
    return v;
}

double escape_amplitude(const Vector& psi, int cutoff) {
    const TwoModeSpace space{cutoff};
    if (psi.size() != space.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "state does not live in the truncated space");
    }
    std::map<std::pair<int, int>, cplx> escaped;
    for (int na = 0; na < cutoff; ++na) {
        for (int nb = 0; nb < cutoff; ++nb) {
            const cplx c = psi(space.index(na, nb));
            if (c == cplx(0.0)) continue;
            if (na + 1 >= cutoff && nb >= 1) {
                escaped[{na + 1, nb - 1}] += c * kMinusHalfI * std::sqrt(double(na + 1) * double(nb));
            }
            if (nb + 1 >= cutoff && na >= 1) {
                escaped[{na - 1, nb + 1}] -= c * kMinusHalfI * std::sqrt(double(na) * double(nb + 1));
            }
        }
    }
    double sq = 0.0;
    for (const auto& [state, amp] : escaped) sq += std::norm(amp);
    return std::sqrt(sq);
}

DemoResult run_demo(int photons, int truncation, bool full_space, double threshold) {
    if (photons < 0) throw Error(ErrorKind::InvalidArgument, "photon number must be non-negative");
    if (truncation < photons + 1) {
        throw Error(ErrorKind::TruncationTooSmall, "per-mode truncation " + std::to_string(truncation) +
                                                       " cannot hold " + std::to_string(photons) +
                                                       " photons");
    }
    DemoResult r;
    r.photons = photons;
    r.truncation = truncation;
    r.full_space = full_space;
    r.escape = escape_amplitude(fock_input_full(photons, truncation), truncation);
    if (r.escape > 1e-12) {
        throw Error(ErrorKind::TruncationTooSmall,
                    "generator pushes amplitude " + std::to_string(r.escape) + " past the cutoff");
    }

    const HermitianMatrix h = full_space ? generator_full(truncation) : generator_sector(photons);
    const Vector psi = full_space ? fock_input_full(photons, truncation) : fock_input_sector(photons);
    r.dim = h.dim();
    r.F_pure = qfi_pure(psi, cplx(0.0, -1.0) * (h.matrix() * psi));

    const DensityMatrix rho(HermitianMatrix(psi * psi.adjoint()));
    const StateFamily family = StateFamily::unitary(h, rho);
    const DerivativeBundle bundle =
        derivative_bundle(family, 0.0, DerivativeSpec::exact(), threshold, Eigensolver::support);
    r.report = qfi_support(bundle);
    r.verdict = eigen_ensemble_is_optimal(bundle.rho, h);
    return r;
}

}  // namespace qfi::mzi
