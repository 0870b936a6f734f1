#include <doctest.h>

#include "helpers.hpp"
#include "lcu/output_matrix.hpp"

using namespace lcu;
using testing::haar_spec;

TEST_SUITE("output_matrix")
{
TEST_CASE("coefficient matrix: closed cases")
{
    CircuitSpec one = haar_spec(1, 1, {1.0}, 1);
    const ComplexMatrix c1 = coefficient_matrix(one).c;
    CHECK(std::abs(c1(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(c1(1, 0)) < 1e-15);

    CircuitSpec two = haar_spec(2, 1, {1.0, 1.0}, 1);
    const ComplexMatrix c2 = coefficient_matrix(two).c;
    CHECK(testing::max_abs(c2.topRows(2) - 0.5 * (ComplexMatrix(2, 2) << 1, 1, 1, -1).finished()) < 1e-15);
    CHECK(testing::max_abs(c2.bottomRows(2)) < 1e-15);
}

TEST_CASE("coefficient matrix: sign pattern and orthogonality")
{
    const std::vector<double> w{1, 1, 0.5, 0.5};
    const CircuitSpec spec = haar_spec(4, 2, w, 2);
    const ComplexMatrix c = coefficient_matrix(spec).c;
    CHECK((c.transpose() * c - identity(4) / 4.0).norm() < 1e-14);
    const ComplexMatrix h = testing::sylvester(4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t t = 0; t < 4; ++t) {
            const double s = 2.0 * h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)).real();
            const double r = std::sqrt(1 - w[t] * w[t]);
            CHECK(std::abs(c(static_cast<Eigen::Index>(outcome_row(4, i, 0)), static_cast<Eigen::Index>(t)) - s * w[t] / 4) < 1e-15);
            CHECK(std::abs(c(static_cast<Eigen::Index>(outcome_row(4, i, 1)), static_cast<Eigen::Index>(t)) - s * r / 4) < 1e-15);
        }
    }
}

TEST_CASE("row matrix")
{
    CircuitSpec id;
    id.terms = 2;
    id.system_qubits = 2;
    id.weights = {0.5, 0.5};
    id.unitaries = {identity(4), identity(4)};
    const ComplexVector psi = random_state(4, 1);
    const ComplexMatrix x = row_matrix(id, psi).x;
    CHECK((x.row(0).transpose() - psi).norm() == 0.0);
    CHECK((x.row(1).transpose() - psi).norm() == 0.0);

    CircuitSpec flip;
    flip.terms = 1;
    flip.system_qubits = 1;
    flip.weights = {1.0};
    flip.unitaries = {(ComplexMatrix(2, 2) << 0, 1, 1, 0).finished()};
    const ComplexVector p2 = random_state(2, 2);
    const ComplexMatrix xf = row_matrix(flip, p2).x;
    CHECK(xf(0, 0) == p2(1));
    CHECK(xf(0, 1) == p2(0));

    const CircuitSpec h = haar_spec(8, 4, std::vector<double>(8, 0.3), 3);
    const ComplexMatrix xh = row_matrix(h, random_state(16, 3)).x;
    for (Eigen::Index t = 0; t < 8; ++t) {
        CHECK(std::abs(xh.row(t).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("property: Phi = C X, rank <= K, over K, n and both variants")
{
    for (std::size_t k : {1u, 2u, 4u, 8u}) {
        for (std::size_t n = 2; n <= 6; ++n) {
            for (auto variant : {RotationVariant::reflection, RotationVariant::cyclic}) {
                std::vector<double> w;
                CounterRng rng(k * 31 + n, 2);
                for (std::size_t t = 0; t < k; ++t) {
                    w.push_back(rng.uniform(-1.0, 1.0));
                }
                CircuitSpec spec = haar_spec(k, n, w, k + 17 * n);
                spec.variant = variant;
                const ComplexVector psi = random_state(spec.dim(), n);
                const ComplexMatrix phi = output_matrix(spec, psi).phi;
                const ComplexMatrix cx = coefficient_matrix(spec).c * row_matrix(spec, psi).x;
                CAPTURE(k);
                CAPTURE(n);
                CHECK((phi - cx).norm() < 1e-12);
                CHECK(numerical_rank(phi, 1e-10) <= k);
                if (spec.dim() >= k) {
                    CHECK(numerical_rank(phi, 1e-10) == k);
                }
            }
        }
    }
}

TEST_CASE("output matrix rows are the output states")
{
    const CircuitSpec spec = haar_spec(2, 3, {0.4, -0.8}, 4);
    const ComplexVector psi = random_state(8, 4);
    const ComplexMatrix phi = output_matrix(spec, psi).phi;
    const OutcomeStates st = output_states(spec, psi);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t r = 0; r < 2; ++r) {
            CHECK(phi.row(static_cast<Eigen::Index>(outcome_row(2, i, r))).transpose() == st.state(i, r));
        }
    }

    CircuitSpec same = haar_spec(4, 3, {0.6, 0.6, 0.6, 0.6}, 5);
    for (auto& u : same.unitaries) {
        u = identity(8);
    }
    CHECK(numerical_rank(output_matrix(same, psi).phi, 1e-10) == 1);

    const CircuitSpec big = haar_spec(4, 8, {0.3, 0.9, -0.5, 0.7}, 6);
    CHECK(numerical_rank(output_matrix(big, random_state(256, 6)).phi, 1e-10) == 4);
}

TEST_CASE("inversion and target extraction")
{
    const std::vector<double> alpha{1.0, 0.25, -0.5, 0.75};
    const CircuitSpec spec = haar_spec(4, 3, alpha, 8);
    const ComplexVector psi = random_state(8, 8);
    const OutputMatrix phi = output_matrix(spec, psi);
    const CoefficientMatrix c = coefficient_matrix(spec);
    const RowMatrix x = invert_with_c(c, phi);
    CHECK((x.x - row_matrix(spec, psi).x).norm() < 1e-12);

    ComplexMatrix t = ComplexMatrix::Zero(8, 8);
    for (std::size_t i = 0; i < 4; ++i) {
        t += alpha[i] * spec.unitaries[i];
    }
    const ComplexVector target = extract_target(x, alpha);
    CHECK((target - t * psi).norm() < 1e-12);
    // T psi = K c phi_{0,0} with c = 1 here
    CHECK((target - 4.0 * phi.phi.row(0).transpose()).norm() < 1e-10);

    const std::vector<double> e0{1.0, 0.0, 0.0, 0.0};
    CHECK((extract_target(x, e0) - spec.unitaries[0] * psi).norm() < 1e-12);

    CircuitSpec one = haar_spec(1, 2, {0.6}, 2);
    const OutputMatrix p1 = output_matrix(one, random_state(4, 2));
    const RowMatrix x1 = invert_with_c(coefficient_matrix(one), p1);
    CHECK((x1.x - p1.phi.row(0) / 0.6).norm() < 1e-12);

    // non-orthogonal C goes through the least-squares branch
    CircuitSpec secret = spec;
    secret.mixing = Mixing::secret(haar_random_unitary(4, 1));
    const CoefficientMatrix cs = coefficient_matrix(secret);
    CHECK((cs.c.adjoint() * cs.c * 4.0 - identity(4)).norm() > 1e-6);
    const RowMatrix xs = invert_with_c(cs, output_matrix(secret, psi));
    CHECK((xs.x - row_matrix(secret, psi).x).norm() < 1e-10);

    CoefficientMatrix rank_def = c;
    rank_def.c.col(3) = rank_def.c.col(2);
    CHECK_THROWS_AS(invert_with_c(rank_def, phi), std::invalid_argument);
}

TEST_CASE("inversion under small noise")
{
    const CircuitSpec spec = haar_spec(4, 4, {0.9, 0.2, -0.6, 0.4}, 9);
    const ComplexVector psi = random_state(16, 9);
    OutputMatrix phi = output_matrix(spec, psi);
    const double sigma = 1e-6;
    CounterRng rng(3, 3);
    ComplexMatrix noise(phi.phi.rows(), phi.phi.cols());
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
        noise.data()[i] = sigma * rng.complex_gaussian();
    }
    phi.phi += noise;
    const RowMatrix x = invert_with_c(coefficient_matrix(spec), phi);
    const double err = (x.x - row_matrix(spec, psi).x).norm();
    // K C^T is a scaled isometry: ||K C^T E|| = sqrt(K) ||P E|| <= sqrt(K) ||E||
    CHECK(err <= 2.0 * noise.norm() + 1e-15);
    CHECK(err <= 4.0 * sigma * std::sqrt(16.0 * 8.0));
}

TEST_CASE("magnitudes")
{
    const CircuitSpec spec = haar_spec(2, 2, {0.7, -0.1}, 10);
    const ComplexVector psi = random_state(4, 10);
    const OutputMatrix phi = output_matrix(spec, psi);
    const RealMatrix p = exact_magnitudes(phi);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK((p - phi.phi.cwiseAbs2()).norm() == 0.0);

    const std::uint64_t shots = 1000000;
    const MagnitudeEstimate est = empirical_magnitudes(sample_shots(spec, psi, shots, 3));
    CHECK(est.shots == shots);
    CHECK(std::abs(est.probabilities.sum() - 1.0) < 1e-12);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double pi = p.data()[i];
        CHECK(std::abs(est.probabilities.data()[i] - pi) < 5.0 * std::sqrt(pi * (1 - pi) / shots) + 1.0 / shots);
    }

    CircuitSpec point = haar_spec(1, 1, {1.0}, 1);
    point.unitaries[0] = identity(2);
    ComplexVector zero = ComplexVector::Zero(2);
    zero(0) = 1.0;
    const MagnitudeEstimate one = empirical_magnitudes(sample_shots(point, zero, 100, 1));
    CHECK(one.probabilities(0, 0) == 1.0);
    CHECK(one.probabilities.sum() == 1.0);

    ShotDataset empty;
    empty.terms = 2;
    empty.dim = 4;
    CHECK_THROWS_AS(empirical_magnitudes(empty), std::invalid_argument);
    ShotDataset bad = sample_shots(spec, psi, 10, 1);
    bad.shots = 11;
    CHECK_THROWS_AS(empirical_magnitudes(bad), std::invalid_argument);
}

TEST_CASE("real and imaginary parts keep the rank bound")
{
    const CircuitSpec spec = haar_spec(4, 5, {0.5, 0.1, 0.8, -0.3}, 11);
    const auto [re, im] = split_real_imag(output_matrix(spec, random_state(32, 11)));
    CHECK(numerical_rank(re.cast<Complex>(), 1e-10) <= 4);
    CHECK(numerical_rank(im.cast<Complex>(), 1e-10) <= 4);
}
}
