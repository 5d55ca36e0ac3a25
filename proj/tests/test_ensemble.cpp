#include "qfi/ensemble.hpp"
#include "qfi/qfi_engine.hpp"

#include "test_support.hpp"
#include "unit.hpp"

using namespace qfi;
using namespace qfi::testing;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

HermitianMatrix sx_half() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 0.5;
    return HermitianMatrix(m);
}

SpectralDecomposition qubit() { return spectral_decompose(density(diag2(0.75, 0.25))); }

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("eigen-ensemble variance") {
    const PureEnsemble e = eigen_ensemble(qubit());
    CHECK(e.size() == 2);
    CHECK(ensemble_average_variance(e, sx_half()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ensemble_average_variance(e, HermitianMatrix(Matrix::Identity(2, 2))) == doctest::Approx(0.0));
}

TEST_CASE("single-member ensemble matches the pure-state formula") {
    Vector psi(2);
    psi << cplx(0.6, 0.0), cplx(0.0, 0.8);
    const PureEnsemble e({{1.0, psi}});
    const Vector dpsi = cplx(0.0, -1.0) * (sx_half().matrix() * psi);
    CHECK(ensemble_average_variance(e, sx_half()) == doctest::Approx(qfi_pure(psi, dpsi)).epsilon(1e-14));
}

TEST_CASE("invalid ensembles") {
    Vector psi = Vector::Zero(2);
    psi(0) = 1.0;
    CHECK_ERROR_KIND(PureEnsemble({}), ErrorKind::InvalidEnsemble);
    CHECK_ERROR_KIND(PureEnsemble({{0.5, psi}}), ErrorKind::InvalidEnsemble);
    CHECK_ERROR_KIND(PureEnsemble({{1.0, 2.0 * psi}}), ErrorKind::InvalidEnsemble);
    CHECK_ERROR_KIND(PureEnsemble({{-0.5, psi}, {1.5, psi}}), ErrorKind::InvalidEnsemble);
}

TEST_CASE("optimality verdict") {
    const OptimalityVerdict commuting = eigen_ensemble_is_optimal(qubit(), HermitianMatrix(diag2(0.5, -0.5)));
    CHECK(commuting.optimal);

    const OptimalityVerdict rotating = eigen_ensemble_is_optimal(qubit(), sx_half());
    CHECK_FALSE(rotating.optimal);
    CHECK(rotating.witness.magnitude == doctest::Approx(0.5));
    CHECK(rotating.witness.i != rotating.witness.j);

    const OptimalityVerdict pure = eigen_ensemble_is_optimal(spectral_decompose(density(diag2(1.0, 0.0))), sx_half());
    CHECK(pure.optimal);
}

TEST_CASE("Y observable") {
    const YObservable y = y_observable(qubit(), sx_half());
    CHECK(std::abs(y.kernel(0, 1) - std::sqrt(3.0) / 4.0) < 1e-15);
    CHECK(std::abs(y.kernel(0, 0)) == 0.0);
    CHECK(std::abs(y.kernel(1, 1)) == 0.0);
    CHECK(y.eigenvalues(0) <= y.eigenvalues(1));

    const YObservable diagonal = y_observable(qubit(), HermitianMatrix(diag2(0.3, -0.2)));
    CHECK(std::abs(diagonal.kernel(0, 0) - 0.3) < 1e-15);
    CHECK(std::abs(diagonal.kernel(0, 1)) == 0.0);

    Rng rng(51);
    const HermitianMatrix h = HermitianMatrix::symmetrized(random_hermitian(rng, 2));
    const SpectralDecomposition mixed = spectral_decompose(density(Matrix::Identity(2, 2) / 2.0));
    const YObservable equal = y_observable(mixed, h);
    const Matrix in_basis = mixed.eigenvectors.adjoint() * h.matrix() * mixed.eigenvectors;
    CHECK((equal.kernel - in_basis).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("optimal ensemble attains the QFI") {
    const EnsembleResult r = optimal_ensemble(qubit(), sx_half());
    CHECK(r.ensemble.size() == 2);
    CHECK(ensemble_average_variance(r.ensemble, sx_half()) == doctest::Approx(0.25).epsilon(1e-8));
    CHECK((r.ensemble.reconstruct() - diag2(0.75, 0.25)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("commuting generator returns the eigen-ensemble") {
    const EnsembleResult r = optimal_ensemble(qubit(), HermitianMatrix(diag2(0.5, -0.5)));
    REQUIRE(r.ensemble.size() == 2);
    for (const EnsembleMember& m : r.ensemble.members()) {
        const bool first = std::abs(m.psi(0)) > 0.5;
        CHECK(m.weight == doctest::Approx(first ? 0.75 : 0.25));
        CHECK(std::abs(std::abs(m.psi(first ? 0 : 1)) - 1.0) < 1e-12);
    }
}

TEST_CASE("pure state gives a single member") {
    const SpectralDecomposition d = spectral_decompose(density(diag2(1.0, 0.0)));
    const EnsembleResult r = optimal_ensemble(d, sx_half());
    REQUIRE(r.ensemble.size() == 1);
    CHECK(r.ensemble.members()[0].weight == 1.0);
    CHECK(ensemble_average_variance(r.ensemble, sx_half()) == doctest::Approx(1.0));
}

TEST_CASE("identity isometry is the eigen-ensemble") {
    Rng rng(52);
    const SpectralDecomposition d = spectral_decompose(density(random_state(rng, 4, 3).rho));
    const PureEnsemble a = ensemble_from_isometry(d, Matrix::Identity(3, 3));
    for (Index i = 0; i < 3; ++i) {
        CHECK(a.members()[i].weight == doctest::Approx(d.eigenvalues(i)).epsilon(1e-14));
        CHECK((a.members()[i].psi - d.eigenvectors.col(i)).norm() < 1e-14);
    }
    CHECK_ERROR_KIND(ensemble_from_isometry(d, Matrix::Identity(2, 2)), ErrorKind::InvalidSize);
}

TEST_CASE("random ensembles reconstruct the state and are reproducible") {
    Rng rng(53);
    const RandomState st = random_state(rng, 5, 3);
    const SpectralDecomposition d = spectral_decompose(density(st.rho));
    const auto a = random_ensembles(d, 99, 20, 4);
    const auto b = random_ensembles(d, 99, 20, 4);
    const auto c = random_ensembles(d, 100, 20, 4);
    REQUIRE(a.size() == 20);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK((a[k].reconstruct() - st.rho).cwiseAbs().maxCoeff() < 1e-12);
        for (std::size_t m = 0; m < a[k].size(); ++m) {
            CHECK(a[k].members()[m].weight == b[k].members()[m].weight);
            CHECK(a[k].members()[m].psi == b[k].members()[m].psi);
        }
    }
    CHECK(a[0].members()[0].psi != c[0].members()[0].psi);
    // ensemble k does not depend on how many were requested
    const auto prefix = random_ensembles(d, 99, 3, 4);
    CHECK(prefix[2].members()[1].psi == a[2].members()[1].psi);
    CHECK_ERROR_KIND(random_ensembles(d, 1, 1, 2), ErrorKind::InvalidSize);
}

TEST_CASE("convex-roof lower bound on the qubit") {
    const SpectralDecomposition d = qubit();
    const double f = qfi_unitary(d, sx_half()).F;
    double lo = 1e300;
    for (const PureEnsemble& e : random_ensembles(d, 7, 100, 3)) lo = std::min(lo, ensemble_average_variance(e, sx_half()));
    CHECK(lo >= f - 1e-9);
}

TEST_CASE("random unitary cases: bound, achievability, verdict") {
    Rng rng(54);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = uniform_int(rng, 2, 6);
        const Index s = uniform_int(rng, 1, int(n));
        const RandomState st = random_state(rng, n, s);
        const SpectralDecomposition d = spectral_decompose(density(st.rho));
        Matrix hm = random_hermitian(rng, n);
        if (trial % 2 == 1) {
            // diagonal on the support eigenbasis, arbitrary elsewhere
            const Matrix q = Matrix::Identity(n, n) - d.eigenvectors * d.eigenvectors.adjoint();
            Eigen::VectorXd e(s);
            for (Index i = 0; i < s; ++i) e(i) = uniform(rng, -1.0, 1.0);
            hm = d.eigenvectors * e.cast<cplx>().asDiagonal() * d.eigenvectors.adjoint() + q * hm * q;
        }
        const HermitianMatrix h = HermitianMatrix::symmetrized(hm);
        const double f = qfi_unitary(d, h).F;

        for (const PureEnsemble& e : random_ensembles(d, 1000 + trial, 20, s + 1)) {
            CHECK(ensemble_average_variance(e, h) >= f - 1e-9);
        }
        CHECK(std::abs(ensemble_average_variance(optimal_ensemble(d, h).ensemble, h) - f) < 1e-7);

        const bool optimal = eigen_ensemble_is_optimal(d, h).optimal;
        const double eigen = ensemble_average_variance(eigen_ensemble(d), h);
        CHECK(optimal == (std::abs(eigen - f) <= 1e-8));
        if (optimal) {
            double weighted = 0.0;
            for (Index i = 0; i < s; ++i) weighted += 4.0 * d.eigenvalues(i) * variance(d.eigenvectors.col(i), h.matrix());
            CHECK(std::abs(weighted - f) < 1e-9);
        }
    }
}

TEST_CASE("non-unitary families are rejected") {
    const StateFamily f = StateFamily::sampled([](double) { return density(diag2(0.5, 0.5)); });
    CHECK_ERROR_KIND(require_unitary(f), ErrorKind::UnsupportedParametrization);
    const StateFamily u = StateFamily::unitary(sx_half(), density(diag2(0.75, 0.25)));
    CHECK_NOTHROW(require_unitary(u));
}

}
