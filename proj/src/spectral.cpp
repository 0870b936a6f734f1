#include "lcu/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace lcu {

namespace {

double relative_or_absolute(double residual, double scale)
{
    return scale > 0.0 ? residual / scale : residual;
}

RealVector repeated(const std::vector<double>& values, std::size_t times,
                    const std::function<double(double)>& f)
{
    RealVector out(static_cast<Eigen::Index>(values.size() * times));
    Eigen::Index pos = 0;
    for (double v : values) {
        for (std::size_t j = 0; j < times; ++j) {
            out(pos++) = f(v);
        }
    }
    return out;
}

ComplexMatrix block_diag2(const ComplexMatrix& m)
{
    const ComplexMatrix blocks[2] = {m, m};
    return direct_sum(blocks);
}

}  // namespace

std::vector<std::size_t> register_swap_permutation(std::size_t terms, std::size_t dim)
{
    std::vector<std::size_t> perm(2 * terms * dim);
    for (std::size_t t = 0; t < terms; ++t) {
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t k = 0; k < dim; ++k) {
                perm[t * 2 * dim + r * dim + k] = r * terms * dim + t * dim + k;
            }
        }
    }
    return perm;
}

ComplexVector permute_vector(const std::vector<std::size_t>& permutation, const ComplexVector& v)
{
    if (permutation.size() != static_cast<std::size_t>(v.size())) {
        throw std::invalid_argument("permute_vector: size mismatch");
    }
    ComplexVector out(v.size());
    for (std::size_t i = 0; i < permutation.size(); ++i) {
        out(static_cast<Eigen::Index>(permutation[i])) = v(static_cast<Eigen::Index>(i));
    }
    return out;
}

ComplexMatrix permute_matrix(const std::vector<std::size_t>& permutation, const ComplexMatrix& m)
{
    if (permutation.size() != static_cast<std::size_t>(m.rows()) || m.rows() != m.cols()) {
        throw std::invalid_argument("permute_matrix: size mismatch");
    }
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < permutation.size(); ++i) {
        for (std::size_t j = 0; j < permutation.size(); ++j) {
            out(static_cast<Eigen::Index>(permutation[i]), static_cast<Eigen::Index>(permutation[j])) =
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

double ShuffledUnitary::block_structure_residual() const
{
    const Eigen::Index h = a.rows();
    const auto lower_left = u.block(h, 0, h, h);
    const auto lower_right = u.block(h, h, h, h);
    double dev = (u.block(0, 0, h, h) - a).cwiseAbs().maxCoeff();
    dev = std::max(dev, (u.block(0, h, h, h) - b).cwiseAbs().maxCoeff());
    if (variant == RotationVariant::reflection) {
        dev = std::max(dev, (lower_left - b).cwiseAbs().maxCoeff());
        dev = std::max(dev, (lower_right + a).cwiseAbs().maxCoeff());
    } else {
        dev = std::max(dev, (lower_left + b).cwiseAbs().maxCoeff());
        dev = std::max(dev, (lower_right - a).cwiseAbs().maxCoeff());
    }
    return dev;
}

ShuffledUnitary shuffle(const CircuitSpec& spec)
{
    const ComplexMatrix v = circuit_unitary(spec);
    ShuffledUnitary out;
    out.permutation = register_swap_permutation(spec.terms, spec.dim());
    out.u = permute_matrix(out.permutation, v);
    const auto h = static_cast<Eigen::Index>(spec.terms * spec.dim());
    out.a = out.u.block(0, 0, h, h);
    out.b = out.u.block(0, h, h, h);
    out.variant = spec.variant;
    return out;
}

SimilarityResiduals similarity_check(const ShuffledUnitary& shuffled, const CircuitSpec& spec)
{
    spec.validate();
    const auto h = static_cast<Eigen::Index>(spec.terms * spec.dim());
    if (shuffled.a.rows() != h || shuffled.b.rows() != h) {
        throw std::invalid_argument("similarity_check: shuffled form does not match the circuit");
    }
    const MixingLayers layers = mixing_layers(spec);
    const ComplexMatrix q = kron(layers.output, identity(spec.dim()));

    std::vector<ComplexMatrix> wblocks;
    std::vector<ComplexMatrix> rblocks;
    for (std::size_t t = 0; t < spec.terms; ++t) {
        wblocks.push_back(spec.weights[t] * spec.unitaries[t]);
        rblocks.push_back(complementary_weight(spec.weights[t]) * spec.unitaries[t]);
    }
    const ComplexMatrix dw = direct_sum(wblocks);
    const ComplexMatrix dr = direct_sum(rblocks);

    SimilarityResiduals out;
    out.a = relative_or_absolute((q.adjoint() * shuffled.a * q - dw).norm(), shuffled.a.norm());
    out.b = relative_or_absolute((q.adjoint() * shuffled.b * q - dr).norm(), shuffled.b.norm());
    return out;
}

MultisetDeviation singular_multiset_check(const ShuffledUnitary& shuffled, const CircuitSpec& spec)
{
    const std::size_t n = spec.dim();
    auto expected_a = repeated(spec.weights, n, [](double w) { return std::abs(w); });
    auto expected_b = repeated(spec.weights, n, [](double w) { return complementary_weight(w); });
    std::sort(expected_a.begin(), expected_a.end(), std::greater<>());
    std::sort(expected_b.begin(), expected_b.end(), std::greater<>());

    const RealVector sa = svd(shuffled.a).singular_values;
    const RealVector sb = svd(shuffled.b).singular_values;
    if (sa.size() != expected_a.size() || sb.size() != expected_b.size()) {
        throw std::invalid_argument("singular_multiset_check: size mismatch");
    }
    return {(sa - expected_a).cwiseAbs().maxCoeff(), (sb - expected_b).cwiseAbs().maxCoeff()};
}

CsdFactors csd_assemble(const CircuitSpec& spec)
{
    spec.validate();
    const MixingLayers layers = mixing_layers(spec);
    const ComplexMatrix id = identity(spec.dim());
    CsdFactors out;
    out.q1 = kron(layers.output, id) * direct_sum(spec.unitaries);
    out.q2 = kron(layers.input.adjoint(), id);
    out.sigma_w = repeated(spec.weights, spec.dim(), [](double w) { return w; });
    out.sigma_r = repeated(spec.weights, spec.dim(), [](double w) { return complementary_weight(w); });
    return out;
}

ComplexMatrix csd_central_matrix(const CsdFactors& csd, RotationVariant variant)
{
    const Eigen::Index h = csd.sigma_w.size();
    ComplexMatrix c = ComplexMatrix::Zero(2 * h, 2 * h);
    const double lower_sign = variant == RotationVariant::reflection ? 1.0 : -1.0;
    const double diag_sign = variant == RotationVariant::reflection ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < h; ++j) {
        c(j, j) = csd.sigma_w(j);
        c(j, h + j) = csd.sigma_r(j);
        c(h + j, j) = lower_sign * csd.sigma_r(j);
        c(h + j, h + j) = diag_sign * csd.sigma_w(j);
    }
    return c;
}

CsdResiduals csd_check(const ShuffledUnitary& shuffled, const CsdFactors& csd)
{
    const ComplexMatrix sw = csd.sigma_w.cast<Complex>().asDiagonal();
    const ComplexMatrix sr = csd.sigma_r.cast<Complex>().asDiagonal();
    CsdResiduals out;
    out.a = relative_or_absolute((shuffled.a - csd.q1 * sw * csd.q2.adjoint()).norm(),
                                 shuffled.a.norm());
    out.b = relative_or_absolute((shuffled.b - csd.q1 * sr * csd.q2.adjoint()).norm(),
                                 shuffled.b.norm());

    const ComplexMatrix central = csd_central_matrix(csd, shuffled.variant);
    const ComplexMatrix rebuilt =
        block_diag2(csd.q1) * central * block_diag2(csd.q2).adjoint();
    out.full = relative_or_absolute((shuffled.u - rebuilt).norm(), shuffled.u.norm());

    // Central 2x2 blocks M_j sit on rows/cols (j, h + j).
    const Eigen::Index h = csd.sigma_w.size();
    const double expected_det = shuffled.variant == RotationVariant::reflection ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < h; ++j) {
        const Complex m00 = central(j, j);
        const Complex m01 = central(j, h + j);
        const Complex m10 = central(h + j, j);
        const Complex m11 = central(h + j, h + j);
        out.block_trace = std::max(out.block_trace, std::abs(m00 + m11));
        out.block_det = std::max(out.block_det, std::abs(m00 * m11 - m01 * m10 - expected_det));
        const double sw2 = csd.sigma_w(j) * csd.sigma_w(j);
        const double sr2 = csd.sigma_r(j) * csd.sigma_r(j);
        out.sum_of_squares = std::max(out.sum_of_squares, std::abs(sw2 + sr2 - 1.0));
    }
    return out;
}

void require_same_public_parameters(const CircuitSpec& x, const CircuitSpec& y)
{
    if (x.terms != y.terms || x.system_qubits != y.system_qubits) {
        throw std::invalid_argument("public parameters differ: K or n");
    }
    if (x.variant != y.variant || x.mixing.kind != y.mixing.kind) {
        throw std::invalid_argument("public parameters differ: variant or mixing");
    }
    if (x.mixing.kind == MixingKind::secret && x.mixing.matrix != y.mixing.matrix) {
        throw std::invalid_argument("public parameters differ: mixing matrix");
    }
    if (x.unitaries.size() != y.unitaries.size()) {
        throw std::invalid_argument("public parameters differ: unitary count");
    }
    for (std::size_t t = 0; t < x.unitaries.size(); ++t) {
        if (x.unitaries[t] != y.unitaries[t]) {
            throw std::invalid_argument("public parameters differ: unitary " + std::to_string(t));
        }
    }
}

InvolutionResiduals involution_check(const CircuitSpec& spec, const CircuitSpec& spec_alt)
{
    spec.validate();
    spec_alt.validate();
    require_same_public_parameters(spec, spec_alt);
    if (spec.variant != RotationVariant::reflection) {
        throw std::invalid_argument(
            "involution_check: only the reflection variant squares to a weight-free operator");
    }

    const ComplexMatrix u = shuffle(spec).u;
    const ComplexMatrix u_alt = shuffle(spec_alt).u;
    const ComplexMatrix u2 = u * u;
    const ComplexMatrix u2_alt = u_alt * u_alt;

    std::vector<ComplexMatrix> squares;
    for (const auto& ut : spec.unitaries) {
        squares.push_back(ut * ut);
    }
    const MixingLayers layers = mixing_layers(spec);
    const ComplexMatrix q = kron(layers.output, identity(spec.dim()));
    const ComplexMatrix inner = q * direct_sum(squares) * q.adjoint();
    const ComplexMatrix expected = kron(identity(2), inner);

    InvolutionResiduals out;
    out.structure = (u2 - expected).norm();
    out.key_cancel = (u2 - u2_alt).norm();
    return out;
}

}  // namespace lcu
