#include "lcu/output_matrix.hpp"

#include <cmath>
#include <string>

namespace lcu {

CoefficientMatrix coefficient_matrix(const CircuitSpec& spec)
{
    spec.validate();
    const std::size_t k = spec.terms;
    const MixingLayers layers = mixing_layers(spec);
    CoefficientMatrix out;
    out.c = ComplexMatrix::Zero(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(k));
    for (std::size_t t = 0; t < k; ++t) {
        const ComplexMatrix rot = rotation_gate(spec.weights[t], spec.variant);
        for (std::size_t i = 0; i < k; ++i) {
            const Complex mix = layers.output(i, t) * layers.input(t, 0);
            out.c(outcome_row(k, i, 0), t) = mix * rot(0, 0);
            out.c(outcome_row(k, i, 1), t) = mix * rot(1, 0);
        }
    }
    return out;
}

RowMatrix row_matrix(const CircuitSpec& spec, const ComplexVector& psi)
{
    spec.validate();
    require_state(psi, spec.dim());
    RowMatrix out;
    out.x.resize(static_cast<Eigen::Index>(spec.terms), static_cast<Eigen::Index>(spec.dim()));
    for (std::size_t t = 0; t < spec.terms; ++t) {
        out.x.row(static_cast<Eigen::Index>(t)) = (spec.unitaries[t] * psi).transpose();
    }
    return out;
}

OutputMatrix output_matrix(const CircuitSpec& spec, const ComplexVector& psi)
{
    const OutcomeStates states = output_states(spec, psi);
    const std::size_t k = spec.terms;
    OutputMatrix out;
    out.phi.resize(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(spec.dim()));
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            out.phi.row(static_cast<Eigen::Index>(outcome_row(k, i, r))) = states.state(i, r).transpose();
        }
    }
    return out;
}

RowMatrix invert_with_c(const CoefficientMatrix& c, const OutputMatrix& phi)
{
    if (c.c.rows() != phi.phi.rows()) {
        throw std::invalid_argument("invert_with_c: C has " + std::to_string(c.c.rows()) +
                                    " rows but Phi has " + std::to_string(phi.phi.rows()));
    }
    const auto k = c.c.cols();
    const double kd = static_cast<double>(k);
    const ComplexMatrix gram = c.c.adjoint() * c.c;
    RowMatrix out;
    if ((kd * gram - ComplexMatrix::Identity(k, k)).norm() < 1e-12) {
        out.x = kd * (c.c.adjoint() * phi.phi);
        return out;
    }
    const SvdResult s = svd(c.c);
    const double smax = s.singular_values(0);
    const double smin = s.singular_values(s.singular_values.size() - 1);
    if (!(smax > 0.0) || smin / smax < 1e-12) {
        throw std::invalid_argument("invert_with_c: coefficient matrix is rank deficient (sigma_min/"
                                    "sigma_max = " +
                                    std::to_string(smax > 0.0 ? smin / smax : 0.0) + ")");
    }
    const RealVector inv = s.singular_values.cwiseInverse();
    out.x = s.right * inv.cast<Complex>().asDiagonal() * (s.left.adjoint() * phi.phi);
    return out;
}

ComplexVector extract_target(const RowMatrix& x, std::span<const double> alpha)
{
    if (static_cast<std::size_t>(x.x.rows()) != alpha.size()) {
        throw std::invalid_argument("extract_target: X has " + std::to_string(x.x.rows()) +
                                    " rows but " + std::to_string(alpha.size()) +
                                    " coefficients were given");
    }
    ComplexVector out = ComplexVector::Zero(x.x.cols());
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        out += alpha[t] * x.x.row(static_cast<Eigen::Index>(t)).transpose();
    }
    return out;
}

MagnitudeEstimate empirical_magnitudes(const ShotDataset& data)
{
    if (data.shots == 0) {
        throw std::invalid_argument("empirical_magnitudes: empty dataset");
    }
    const auto rows = static_cast<Eigen::Index>(2 * data.terms);
    const auto cols = static_cast<Eigen::Index>(data.dim);
    MagnitudeEstimate out;
    out.shots = data.shots;
    out.counts.setZero(rows, cols);
    std::uint64_t total = 0;
    for (const auto& [key, count] : data.counts) {
        if (key.index >= data.terms || key.rotation > 1 || key.basis >= data.dim) {
            throw std::invalid_argument("empirical_magnitudes: outcome out of range");
        }
        out.counts(static_cast<Eigen::Index>(outcome_row(data.terms, key.index, key.rotation)),
                   static_cast<Eigen::Index>(key.basis)) += count;
        total += count;
    }
    if (total != data.shots) {
        throw std::invalid_argument("empirical_magnitudes: counts do not sum to the shot count");
    }
    out.probabilities = out.counts.cast<double>() / static_cast<double>(data.shots);
    return out;
}

RealMatrix exact_magnitudes(const OutputMatrix& phi)
{
    return phi.phi.cwiseAbs2();
}

std::pair<RealMatrix, RealMatrix> split_real_imag(const OutputMatrix& phi)
{
    return {phi.phi.real(), phi.phi.imag()};
}

}  // namespace lcu
