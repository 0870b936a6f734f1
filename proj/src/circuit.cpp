#include "lcu/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lcu/rng.hpp"

namespace lcu {

namespace {

constexpr double kUnitaryTol = 1e-10;

std::string term_label(std::size_t t) { return "unitary " + std::to_string(t); }

}  // namespace

void CircuitSpec::validate() const
{
    if (!is_power_of_two(terms)) {
        throw std::invalid_argument("circuit: K = " + std::to_string(terms) +
                                    " is not a power of two");
    }
    if (system_qubits > 24) {
        throw std::invalid_argument("circuit: system register too large for dense simulation");
    }
    if (weights.size() != terms) {
        throw std::invalid_argument("circuit: expected " + std::to_string(terms) + " weights, got " +
                                    std::to_string(weights.size()));
    }
    for (double w : weights) {
        if (!std::isfinite(w) || std::abs(w) > 1.0) {
            throw std::invalid_argument("circuit: weight " + std::to_string(w) +
                                        " outside [-1, 1]");
        }
    }
    if (unitaries.size() != terms) {
        throw std::invalid_argument("circuit: expected " + std::to_string(terms) +
                                    " unitaries, got " + std::to_string(unitaries.size()));
    }
    const auto n = static_cast<Eigen::Index>(dim());
    for (std::size_t t = 0; t < terms; ++t) {
        const auto& u = unitaries[t];
        if (u.rows() != n || u.cols() != n) {
            throw std::invalid_argument("circuit: " + term_label(t) + " is not " +
                                        std::to_string(n) + "x" + std::to_string(n));
        }
        require_finite(u, term_label(t));
        if (unitarity_defect(u) >= kUnitaryTol) {
            throw std::invalid_argument("circuit: " + term_label(t) + " is not unitary");
        }
    }
    if (mixing.kind == MixingKind::secret) {
        const auto k = static_cast<Eigen::Index>(terms);
        if (mixing.matrix.rows() != k || mixing.matrix.cols() != k) {
            throw std::invalid_argument("circuit: secret mixing matrix must be K x K");
        }
        require_finite(mixing.matrix, "secret mixing matrix");
        if (unitarity_defect(mixing.matrix) >= kUnitaryTol) {
            throw std::invalid_argument("circuit: secret mixing matrix is not unitary");
        }
    }
}

MixingLayers mixing_layers(const CircuitSpec& spec)
{
    switch (spec.mixing.kind) {
    case MixingKind::hadamard: {
        ComplexMatrix h = hadamard_matrix(spec.terms);
        return {h, h};
    }
    case MixingKind::dft: {
        ComplexMatrix f = dft_matrix(spec.terms);
        return {f, f.adjoint()};
    }
    case MixingKind::secret:
        return {spec.mixing.matrix.adjoint(), spec.mixing.matrix};
    }
    throw std::logic_error("unknown mixing kind");
}

double complementary_weight(double w)
{
    if (!std::isfinite(w) || std::abs(w) > 1.0) {
        throw std::invalid_argument("rotation weight " + std::to_string(w) + " outside [-1, 1]");
    }
    return std::sqrt(std::max(0.0, 1.0 - w * w));
}

ComplexMatrix rotation_gate(double w, RotationVariant variant)
{
    const double r = complementary_weight(w);
    ComplexMatrix g(2, 2);
    if (variant == RotationVariant::reflection) {
        g << w, r, r, -w;
    } else {
        g << w, r, -r, w;
    }
    return g;
}

ScaledCoefficients scale_coefficients(std::span<const double> alpha)
{
    ScaledCoefficients out;
    for (double a : alpha) {
        if (!std::isfinite(a)) {
            throw std::invalid_argument("scale_coefficients: non-finite coefficient");
        }
        out.scale = std::max(out.scale, std::abs(a));
    }
    if (out.scale == 0.0) {
        throw std::invalid_argument("scale_coefficients: all coefficients are zero");
    }
    out.beta.reserve(alpha.size());
    for (double a : alpha) {
        out.beta.push_back(a / out.scale);
    }
    return out;
}

ComplexMatrix select_operator(const CircuitSpec& spec)
{
    spec.validate();
    std::vector<ComplexMatrix> blocks;
    blocks.reserve(spec.terms);
    for (std::size_t t = 0; t < spec.terms; ++t) {
        blocks.push_back(kron(rotation_gate(spec.weights[t], spec.variant), spec.unitaries[t]));
    }
    return direct_sum(blocks);
}

ComplexMatrix circuit_unitary(const CircuitSpec& spec)
{
    spec.validate();
    const std::size_t k = spec.terms;
    const auto block = static_cast<Eigen::Index>(2 * spec.dim());
    const MixingLayers layers = mixing_layers(spec);

    std::vector<ComplexMatrix> terms;
    terms.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        terms.push_back(kron(rotation_gate(spec.weights[t], spec.variant), spec.unitaries[t]));
    }

    // Block (i, j) = sum_t out(i,t) in(t,j) (R_t (x) U_t), accumulated in the
    // same order for every entry so sign-mirrored blocks stay exact mirrors.
    ComplexMatrix v = ComplexMatrix::Zero(block * static_cast<Eigen::Index>(k),
                                          block * static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            auto vij = v.block(static_cast<Eigen::Index>(i) * block,
                               static_cast<Eigen::Index>(j) * block, block, block);
            for (std::size_t t = 0; t < k; ++t) {
                const Complex coeff = layers.output(i, t) * layers.input(t, j);
                vij += coeff * terms[t];
            }
        }
    }
    return v;
}

OutcomeStates::OutcomeStates(std::size_t terms, std::vector<ComplexVector> states)
    : terms_(terms), dim_(states.empty() ? 0 : static_cast<std::size_t>(states.front().size())),
      states_(std::move(states))
{
    if (states_.size() != 2 * terms_) {
        throw std::invalid_argument("OutcomeStates: expected 2K states");
    }
    probabilities_.reserve(states_.size());
    for (const auto& s : states_) {
        if (static_cast<std::size_t>(s.size()) != dim_) {
            throw std::invalid_argument("OutcomeStates: inconsistent state dimensions");
        }
        probabilities_.push_back(s.squaredNorm());
    }
}

double OutcomeStates::total_probability() const
{
    return std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
}

void require_state(const ComplexVector& psi, std::size_t dim)
{
    if (static_cast<std::size_t>(psi.size()) != dim) {
        throw std::invalid_argument("input state has dimension " + std::to_string(psi.size()) +
                                    ", expected " + std::to_string(dim));
    }
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("input state is not normalized");
    }
}

OutcomeStates output_states(const CircuitSpec& spec, const ComplexVector& psi)
{
    spec.validate();
    require_state(psi, spec.dim());
    const std::size_t k = spec.terms;
    const MixingLayers layers = mixing_layers(spec);

    std::vector<ComplexVector> images;
    std::vector<Complex> amp0;  // <0|R_t|0>
    std::vector<Complex> amp1;  // <1|R_t|0>
    images.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        images.push_back(spec.unitaries[t] * psi);
        const ComplexMatrix r = rotation_gate(spec.weights[t], spec.variant);
        amp0.push_back(r(0, 0));
        amp1.push_back(r(1, 0));
    }

    std::vector<ComplexVector> states;
    states.reserve(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        ComplexVector s0 = ComplexVector::Zero(psi.size());
        ComplexVector s1 = ComplexVector::Zero(psi.size());
        for (std::size_t t = 0; t < k; ++t) {
            const Complex mix = layers.output(i, t) * layers.input(t, 0);
            s0 += (mix * amp0[t]) * images[t];
            s1 += (mix * amp1[t]) * images[t];
        }
        states.push_back(std::move(s0));
        states.push_back(std::move(s1));
    }
    return OutcomeStates(k, std::move(states));
}

ComplexVector apply_combination(std::span<const ComplexMatrix> unitaries,
                                std::span<const double> coeffs, const ComplexVector& psi)
{
    if (unitaries.size() != coeffs.size()) {
        throw std::invalid_argument("apply_combination: size mismatch");
    }
    ComplexVector out = ComplexVector::Zero(psi.size());
    for (std::size_t t = 0; t < unitaries.size(); ++t) {
        out += coeffs[t] * (unitaries[t] * psi);
    }
    return out;
}

SuccessProbabilities success_probabilities(const CircuitSpec& spec, const ComplexVector& psi,
                                           std::span<const double> alpha)
{
    if (spec.mixing.kind == MixingKind::secret) {
        throw std::invalid_argument("success_probabilities: secret mixing has no uniform index row");
    }
    const ScaledCoefficients scaled = scale_coefficients(alpha);
    if (scaled.beta.size() != spec.weights.size()) {
        throw std::invalid_argument("success_probabilities: coefficient count mismatch");
    }
    for (std::size_t t = 0; t < scaled.beta.size(); ++t) {
        if (std::abs(scaled.beta[t] - spec.weights[t]) > 1e-12) {
            throw std::invalid_argument(
                "success_probabilities: circuit weights are not the scaled coefficients");
        }
    }
    const OutcomeStates states = output_states(spec, psi);
    const double target_norm2 = apply_combination(spec.unitaries, alpha, psi).squaredNorm();
    const double k = static_cast<double>(spec.terms);
    double l1 = 0.0;
    for (double a : alpha) {
        l1 += std::abs(a);
    }

    SuccessProbabilities out;
    out.p00 = target_norm2 / (scaled.scale * scaled.scale * k * k);
    out.p0_any = states.probability(0, 0) + states.probability(0, 1);
    out.p_std = target_norm2 / (l1 * l1);
    return out;
}

std::vector<double> outcome_distribution(const OutcomeStates& states)
{
    const std::size_t k = states.terms();
    const std::size_t n = states.dim();
    std::vector<double> p(2 * k * n);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            const ComplexVector& s = states.state(i, r);
            for (std::size_t b = 0; b < n; ++b) {
                p[(r * k + i) * n + b] = std::norm(s(static_cast<Eigen::Index>(b)));
            }
        }
    }
    return p;
}

ShotDataset sample_shots(const CircuitSpec& spec, const ComplexVector& psi, std::uint64_t shots,
                         std::uint64_t seed)
{
    if (shots == 0) {
        throw std::invalid_argument("sample_shots: shots must be >= 1");
    }
    const OutcomeStates states = output_states(spec, psi);
    const std::vector<double> p = outcome_distribution(states);
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    const double total = cdf.back();

    const std::size_t k = spec.terms;
    const std::size_t n = spec.dim();
    std::vector<std::uint64_t> tally(p.size(), 0);
    CounterRng rng(seed, 0x5407);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double x = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        if (it == cdf.end()) {
            // x rounded up to the total; take the last outcome with mass.
            it = std::prev(cdf.end());
            while (it != cdf.begin() && p[static_cast<std::size_t>(it - cdf.begin())] == 0.0) {
                --it;
            }
        }
        ++tally[static_cast<std::size_t>(it - cdf.begin())];
    }

    ShotDataset out;
    out.terms = k;
    out.dim = n;
    out.shots = shots;
    out.seed = seed;
    for (std::size_t idx = 0; idx < tally.size(); ++idx) {
        if (tally[idx] == 0) {
            continue;
        }
        const std::size_t row = idx / n;
        OutcomeKey key;
        key.rotation = static_cast<std::uint32_t>(row / k);
        key.index = static_cast<std::uint32_t>(row % k);
        key.basis = idx % n;
        out.counts.emplace(key, tally[idx]);
    }
    return out;
}

PlusMinusStates plusminus_states(const CircuitSpec& spec, const ComplexVector& psi)
{
    const OutcomeStates states = output_states(spec, psi);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    PlusMinusStates out;
    for (std::size_t i = 0; i < spec.terms; ++i) {
        out.plus.push_back(inv_sqrt2 * (states.state(i, 0) + states.state(i, 1)));
        out.minus.push_back(inv_sqrt2 * (states.state(i, 0) - states.state(i, 1)));
    }
    return out;
}

}  // namespace lcu
