#include "qfi/qfi_engine.hpp"
#include "qfi/state_family.hpp"

#include "test_support.hpp"
#include "unit.hpp"

using namespace qfi;
using namespace qfi::testing;

namespace {

const cplx I{0.0, 1.0};

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Matrix sigma_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return m;
}

StateFamily qubit_unitary() {
    return StateFamily::unitary(HermitianMatrix(sigma_x() / 2.0), density(diag2(0.75, 0.25)));
}

StateFamily linear_diag() {
    return StateFamily::analytic([](double t) { return density(diag2(t, 1.0 - t)); },
                                 [](double) { return HermitianMatrix(diag2(1.0, -1.0)); },
                                 Domain{0.0, 1.0});
}

double antisymmetry_defect(const DerivativeBundle& b) {
    const Matrix& o = *b.overlaps;
    return (o + o.adjoint()).cwiseAbs().maxCoeff();
}

// Product-rule reconstruction of drho, sandwiched by the support projector.
double product_rule_defect(const DerivativeBundle& b) {
    const Matrix& psi = b.rho.eigenvectors;
    const Matrix& dpsi = *b.dpsi;
    const Matrix pd = b.rho.eigenvalues.cast<cplx>().asDiagonal();
    const Matrix rebuilt = psi * b.dp.cast<cplx>().asDiagonal() * psi.adjoint() + dpsi * pd * psi.adjoint() +
                           psi * pd * dpsi.adjoint();
    const Matrix proj = psi * psi.adjoint();
    return (proj * (rebuilt - b.drho.matrix()) * proj).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("state_family") {

TEST_CASE("unitary derivative is -i[H, rho]") {
    const HermitianMatrix d = evaluate_derivative(qubit_unitary(), 0.0, DerivativeSpec::exact());
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 1) = 0.25 * I;
    expected(1, 0) = -0.25 * I;
    CHECK((d.matrix() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("analytic linear family has constant derivative") {
    const HermitianMatrix d = evaluate_derivative(linear_diag(), 0.3, DerivativeSpec::exact());
    CHECK((d.matrix() - diag2(1.0, -1.0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("central difference on a sampled quadratic family") {
    const StateFamily f = StateFamily::sampled([](double t) { return density(diag2(t * t, 1.0 - t * t)); });
    const HermitianMatrix d = evaluate_derivative(f, 0.5, DerivativeSpec::central(1e-3));
    CHECK((d.matrix() - diag2(1.0, -1.0)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_ERROR_KIND(evaluate_derivative(f, 0.5, DerivativeSpec::exact()), ErrorKind::EvaluationFailure);
}

TEST_CASE("step validation and domain") {
    CHECK_ERROR_KIND(evaluate_derivative(linear_diag(), 0.5, DerivativeSpec::central(0.0)),
                     ErrorKind::InvalidArgument);
    CHECK_ERROR_KIND(evaluate_derivative(linear_diag(), 0.5, DerivativeSpec::central(0.2)),
                     ErrorKind::InvalidArgument);
    CHECK_ERROR_KIND(evaluate_derivative(linear_diag(), 0.0, DerivativeSpec::central(1e-3)),
                     ErrorKind::StepTooLarge);
    CHECK_ERROR_KIND(linear_diag().evaluate(1.5), ErrorKind::EvaluationFailure);
}

TEST_CASE("perturbation overlaps for a commuting family") {
    const SpectralDecomposition d = spectral_decompose(density(diag2(0.25, 0.75)));
    const PerturbationOverlaps o = overlaps_from_perturbation(d, HermitianMatrix(diag2(1.0, -1.0)));
    CHECK(std::abs(o.overlaps(0, 1)) == 0.0);
    CHECK(std::abs(o.overlaps(1, 0)) == 0.0);
    // descending order: p = (0.75, 0.25)
    CHECK(o.dp(0) == doctest::Approx(-1.0));
    CHECK(o.dp(1) == doctest::Approx(1.0));
}

TEST_CASE("perturbation overlap is the matrix element over the gap") {
    const SpectralDecomposition d = spectral_decompose(density(diag2(0.75, 0.25)));
    Matrix drho = Matrix::Zero(2, 2);
    drho(0, 1) = 0.25 * I;
    drho(1, 0) = -0.25 * I;
    const PerturbationOverlaps o = overlaps_from_perturbation(d, HermitianMatrix(drho));
    CHECK(std::abs(o.overlaps(0, 1) - (-0.5 * I)) < 1e-15);
    CHECK(std::abs(o.overlaps(0, 0)) == 0.0);
}

TEST_CASE("degenerate pair coupled by the derivative is rejected") {
    const SpectralDecomposition d = spectral_decompose(density(Matrix::Identity(2, 2) / 2.0));
    CHECK_ERROR_KIND(overlaps_from_perturbation(d, HermitianMatrix(sigma_x() * 0.1)),
                     ErrorKind::DegenerateGap);
}

TEST_CASE("unitary eigen-derivatives bypass differencing") {
    const DerivativeBundle b = eigen_derivatives(qubit_unitary(), 0.0, 1e-5);
    REQUIRE(b.dpsi);
    CHECK(std::abs((*b.dpsi)(0, 0)) < 1e-15);
    CHECK(std::abs((*b.dpsi)(1, 0) - (-0.5 * I)) < 1e-15);
    CHECK(std::abs((*b.overlaps)(0, 1) - (-0.5 * I)) < 1e-15);
    CHECK(b.dp.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant family has vanishing derivatives") {
    Rng rng(21);
    const RandomState st = random_state(rng, 4, 3);
    const Matrix rho = st.rho;
    const StateFamily f = StateFamily::sampled([rho](double) { return density(rho); });
    const DerivativeBundle b = eigen_derivatives(f, 0.0, 1e-5);
    CHECK(b.dpsi->cwiseAbs().maxCoeff() < 1e-8);
    CHECK(b.dp.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("spectral family with fixed eigenvectors") {
    const StateFamily f = StateFamily::spectral(
        [](double t) { return Eigen::Vector2d(t, 1.0 - t).eval(); },
        [](double) { return Matrix(Matrix::Identity(2, 2)); },
        [](double) { return Eigen::Vector2d(1.0, -1.0).eval(); },
        [](double) { return Matrix(Matrix::Zero(2, 2)); });
    for (const DerivativeSpec& spec : {DerivativeSpec::exact(), DerivativeSpec::central()}) {
        const DerivativeBundle b = derivative_bundle(f, 0.25, spec);
        // sorted: p = (0.75, 0.25) carries dp = (-1, 1)
        CHECK(b.dp(0) == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(b.dp(1) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(b.dpsi->cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("rank crossing across the stencil") {
    const StateFamily f = StateFamily::sampled([](double t) { return density(diag2(1.0 - t * t, t * t)); });
    CHECK_ERROR_KIND(eigen_derivatives(f, 0.0, 1e-5), ErrorKind::SupportDimensionChanged);
}

TEST_CASE("eigenvalue crossing inside the stencil") {
    const StateFamily f =
        StateFamily::sampled([](double t) { return density(diag2(0.5 + t, 0.5 - t)); });
    CHECK_ERROR_KIND(eigen_derivatives(f, 0.0, 1e-5), ErrorKind::DegenerateGap);
}

TEST_CASE("bundles are antisymmetric and satisfy the product rule") {
    Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = uniform_int(rng, 2, 6);
        const Index s = uniform_int(rng, 1, int(n));
        const SpectralCase c = random_spectral_case(rng, n, s);
        const double t = uniform(rng, -0.5, 0.5);

        const DerivativeBundle fd = eigen_derivatives(c.analytic_family(), t, 1e-5);
        CHECK(antisymmetry_defect(fd) < 1e-8);
        CHECK(product_rule_defect(fd) < 1e-6);

        const DerivativeBundle pert = derivative_bundle(c.analytic_family(), t, DerivativeSpec::exact());
        CHECK(antisymmetry_defect(pert) < 1e-10);
        CHECK(product_rule_defect(pert) < 1e-10);

        const DerivativeBundle spec = derivative_bundle(c.spectral_family(), t, DerivativeSpec::exact());
        CHECK(antisymmetry_defect(spec) < 1e-10);
        CHECK(product_rule_defect(spec) < 1e-10);

        const RandomState st = random_state(rng, n, s);
        const StateFamily u =
            StateFamily::unitary(HermitianMatrix::symmetrized(random_hermitian(rng, n)), density(st.rho));
        const DerivativeBundle ub = derivative_bundle(u, t, DerivativeSpec::exact());
        CHECK(antisymmetry_defect(ub) < 1e-10);
        CHECK(product_rule_defect(ub) < 1e-10);
    }
}

TEST_CASE("central-difference error is second order") {
    Rng rng(23);
    int checked = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const SpectralCase c = random_spectral_case(rng, 4, 3);
        const double t = 0.1;
        // Oracle in the same (parallel-transport) gauge, about the same center.
        const StateFamily f = c.analytic_family();
        auto error = [&](double h) {
            const DerivativeBundle fd = eigen_derivatives(f, t, h);
            const DerivativeBundle exact = bundle_from_perturbation(fd.rho, HermitianMatrix::symmetrized(c.drho(t)));
            return (*fd.dpsi - *exact.dpsi).norm();
        };
        const double e1 = error(1e-2);
        const double e2 = error(5e-3);
        const double ratio = e1 / e2;
        CHECK_MESSAGE(ratio >= 3.0, "ratio " << ratio);
        CHECK_MESSAGE(ratio <= 5.0, "ratio " << ratio);
        ++checked;
    }
    CHECK(checked == 10);
}

TEST_CASE("eigenvector phases do not reach the QFI") {
    Rng rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        const SpectralCase c = random_spectral_case(rng, 5, 3);
        SpectralCase rotated = c;
        for (Index k = 0; k < rotated.V.cols(); ++k) rotated.V.col(k) *= std::polar(1.0, uniform(rng, 0.0, 6.28));
        const double t = 0.2;
        for (const DerivativeSpec& spec : {DerivativeSpec::exact(), DerivativeSpec::central()}) {
            const QfiReport a = qfi_support(derivative_bundle(c.spectral_family(), t, spec));
            const QfiReport b = qfi_support(derivative_bundle(rotated.spectral_family(), t, spec));
            CHECK(std::abs(a.F - b.F) < 1e-8);
            CHECK(std::abs(a.F_ct - b.F_ct) < 1e-8);
        }
    }
}

TEST_CASE("propagator is unitary") {
    Rng rng(25);
    const Matrix u = propagator(random_hermitian(rng, 5), 0.7);
    CHECK((u.adjoint() * u - Matrix::Identity(5, 5)).norm() < 1e-12);
}

}
