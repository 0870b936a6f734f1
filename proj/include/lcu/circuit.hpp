#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lcu/linalg.hpp"

namespace lcu {

enum class MixingKind { hadamard, dft, secret };

/// Shape of the per-term rotation-qubit gate.
///   reflection: [[w, r], [ r, -w]]
///   cyclic:     [[w, r], [-r,  w]]  (a proper rotation)
enum class RotationVariant { reflection, cyclic };

/// Index-register mixing. For `secret`, `matrix` holds the K x K unitary W.
struct Mixing
{
    MixingKind kind = MixingKind::hadamard;
    ComplexMatrix matrix;

    static Mixing hadamard() { return {}; }
    static Mixing dft() { return {MixingKind::dft, {}}; }
    static Mixing secret(ComplexMatrix w) { return {MixingKind::secret, std::move(w)}; }
};

/// Everything needed to build the circuit: K terms on n system qubits.
struct CircuitSpec
{
    std::size_t terms = 1;         // K, a power of two
    std::size_t system_qubits = 1; // n
    std::vector<double> weights;   // w_t, |w_t| <= 1
    std::vector<ComplexMatrix> unitaries;
    Mixing mixing;
    RotationVariant variant = RotationVariant::reflection;

    /// N = 2^n.
    std::size_t dim() const noexcept { return std::size_t{1} << system_qubits; }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
};

/// The two index-register layers: the circuit is
/// V = (output (x) I_2N) M (input (x) I_2N).
///   hadamard: input = output = H
///   dft:      input = F, output = F^dagger
///   secret:   input = W^dagger, output = W
struct MixingLayers
{
    ComplexMatrix input;
    ComplexMatrix output;
};

MixingLayers mixing_layers(const CircuitSpec& spec);

/// r = sqrt(1 - w^2); rejects |w| > 1.
double complementary_weight(double w);

ComplexMatrix rotation_gate(double w, RotationVariant variant);

struct ScaledCoefficients
{
    double scale = 0.0;         // c = max |alpha_t|
    std::vector<double> beta;   // alpha_t / c
};

ScaledCoefficients scale_coefficients(std::span<const double> alpha);

/// Block-diagonal select operator M = (+)_t (R_t (x) U_t), dimension 2KN.
ComplexMatrix select_operator(const CircuitSpec& spec);

/// Full circuit unitary in the index (x) rotation (x) system basis.
ComplexMatrix circuit_unitary(const CircuitSpec& spec);

/// Unnormalized post-measurement system states phi_{i,r} and their
/// probabilities, computed directly from the U_t psi products.
class OutcomeStates
{
public:
    OutcomeStates(std::size_t terms, std::vector<ComplexVector> states);

    std::size_t terms() const noexcept { return terms_; }
    std::size_t dim() const noexcept { return dim_; }
    const ComplexVector& state(std::size_t i, std::size_t r) const { return states_.at(2 * i + r); }
    double probability(std::size_t i, std::size_t r) const { return probabilities_.at(2 * i + r); }
    double total_probability() const;

private:
    std::size_t terms_;
    std::size_t dim_;
    std::vector<ComplexVector> states_;  // index 2*i + r
    std::vector<double> probabilities_;
};

OutcomeStates output_states(const CircuitSpec& spec, const ComplexVector& psi);

/// sum_t coeffs[t] * unitaries[t] * psi.
ComplexVector apply_combination(std::span<const ComplexMatrix> unitaries,
                                std::span<const double> coeffs, const ComplexVector& psi);

struct SuccessProbabilities
{
    double p00 = 0.0;     // ||T psi||^2 / (c^2 K^2)
    double p0_any = 0.0;  // p_{0,0} + p_{0,1}, simulated
    double p_std = 0.0;   // ||T psi||^2 / (sum |alpha_t|)^2
};

/// Requires spec.weights == scale_coefficients(alpha).beta and a mixing whose
/// all-zeros index row is uniform (Hadamard or DFT).
SuccessProbabilities success_probabilities(const CircuitSpec& spec, const ComplexVector& psi,
                                           std::span<const double> alpha);

struct OutcomeKey
{
    std::uint32_t index = 0;     // i
    std::uint32_t rotation = 0;  // r
    std::uint64_t basis = 0;     // k
    auto operator<=>(const OutcomeKey&) const = default;
};

struct ShotDataset
{
    std::size_t terms = 0;
    std::size_t dim = 0;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::map<OutcomeKey, std::uint64_t> counts;
};

/// Exact joint distribution p_{i,r,k} = |<k|phi_{i,r}>|^2, flattened with
/// r-major rows then k: entry (r*K + i)*N + k.
std::vector<double> outcome_distribution(const OutcomeStates& states);

ShotDataset sample_shots(const CircuitSpec& spec, const ComplexVector& psi, std::uint64_t shots,
                         std::uint64_t seed);

/// States conditioned on a +/- basis readout of the rotation qubit:
/// (phi_{i,0} +/- phi_{i,1}) / sqrt(2).
struct PlusMinusStates
{
    std::vector<ComplexVector> plus;
    std::vector<ComplexVector> minus;
};

PlusMinusStates plusminus_states(const CircuitSpec& spec, const ComplexVector& psi);

void require_state(const ComplexVector& psi, std::size_t dim);

}  // namespace lcu
