#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcu/recovery.hpp"

namespace lcu {

enum class Scheme { hadamard, secret_mixing };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct SecretKey
{
    Scheme scheme = Scheme::hadamard;
    std::vector<double> weights;
    std::uint64_t gamma = 0;  // completion seed, secret_mixing only
    ComplexMatrix mixing;     // W, re-derived from (weights, gamma); empty for hadamard

    std::size_t terms() const noexcept { return weights.size(); }
};

struct PublicParams
{
    std::size_t terms = 1;
    std::size_t system_qubits = 1;
    std::vector<ComplexMatrix> unitaries;
    RotationVariant variant = RotationVariant::reflection;
    Scheme scheme = Scheme::hadamard;

    std::size_t dim() const noexcept { return std::size_t{1} << system_qubits; }
};

/// Seeded public parameters with Haar-random U_t.
PublicParams random_public_params(std::size_t terms, std::size_t system_qubits, Scheme scheme,
                                  std::uint64_t seed);

/// Weights uniform in [0.1, 1]. For secret_mixing the weights are scaled to
/// unit 2-norm and W is derived from a freshly drawn gamma.
SecretKey keygen(std::size_t terms, Scheme scheme, std::uint64_t seed);

/// W = diag(1, V_gamma) P_v with P_v the Householder reflection taking e_0
/// to v = w / ||w|| and V_gamma Haar on the complement. Row 0 of W is v.
ComplexMatrix secret_mixing_matrix(const std::vector<double>& weights, std::uint64_t gamma);

/// Recomputes W for secret_mixing keys and checks the key's invariants.
SecretKey complete_key(SecretKey key);

CircuitSpec build_circuit(const SecretKey& key, const PublicParams& pub);

CoefficientMatrix key_coefficient_matrix(const SecretKey& key, const PublicParams& pub);

struct EvalOutput
{
    RealMatrix magnitudes;  // 2K x N, laid out like Phi
    std::uint64_t shots = 0;  // 0 means exact
};

EvalOutput eval_trapdoor(const SecretKey& key, const PublicParams& pub, const ComplexVector& psi,
                         std::uint64_t shots, std::uint64_t seed);

struct Inversion
{
    RowMatrix x;
    ComplexVector target;  // sum_t w_t U_t psi
    std::vector<std::size_t> underdetermined_columns;
};

Inversion invert_with_key(const SecretKey& key, const PublicParams& pub, const ComplexMatrix& phi);
Inversion invert_with_key(const SecretKey& key, const PublicParams& pub, const ObservedEntries& obs);

/// Relative 2-norm error of `target` against sum_t w_t U_t psi.
double target_error(const SecretKey& key, const PublicParams& pub, const ComplexVector& psi,
                    const ComplexVector& target);

struct AttackResult
{
    std::vector<double> weights;
    std::vector<bool> recovered;  // false where row t of X vanished
    /// Max over t of the relative misfit of rows t of S^T Phi_0, S^T Phi_1
    /// to (w x, r x) with the recovered (w, r).
    double residual = 0.0;
    std::vector<double> row_residuals;
    bool success = false;
};

/// Full-amplitude attack on the public Hadamard scheme.
AttackResult hadamard_attack(const ComplexMatrix& phi, const PublicParams& pub);

/// |Phi| entrywise, as a complex matrix; what an attacker holding only
/// magnitudes would have.
ComplexMatrix strip_phases(const ComplexMatrix& phi);

struct PhaseRetrievalOptions
{
    std::size_t restarts = 20;
    std::size_t iters = 2000;
    std::uint64_t seed = 0;
    /// Stronger adversary: psi is known, so X is fixed and only w is fitted.
    std::optional<ComplexVector> known_psi;
    /// Start the first restart here instead of at random.
    std::optional<std::vector<double>> initial_weights;
    std::optional<ComplexMatrix> initial_x;
};

struct PhaseRetrievalResult
{
    std::vector<double> weights;
    ComplexMatrix x;
    double residual = 0.0;  // ||(|C X|^2 - p)||_F / ||p||_F
    std::vector<double> restart_residuals;
};

/// Multi-restart projected gradient descent on || |C(w) X|^2 - p ||^2 with
/// w = cos(theta), theta clamped to [0, pi]. No success guarantee.
PhaseRetrievalResult phase_retrieval_attack(const EvalOutput& magnitudes, const PublicParams& pub,
                                            const PhaseRetrievalOptions& options);

/// Every U_t must square to I. Applies V(key) then V(key2) to |0>|0>|psi>
/// and returns the overlap fidelity with the input.
double involution_encrypt_decrypt(const PublicParams& pub, const ComplexVector& psi,
                                  const SecretKey& key, const SecretKey& key2);

/// ((1/K) sum_t (w_t w'_t + r_t r'_t))^2, the value of the above for Hadamard
/// or DFT mixing.
double involution_fidelity_closed_form(const std::vector<double>& w1, const std::vector<double>& w2);

/// Seeded involutory unitaries: random Pauli strings, or random involutive
/// permutations when `permutations` is set.
std::vector<ComplexMatrix> random_involutions(std::size_t count, std::size_t system_qubits,
                                              std::uint64_t seed, bool permutations);

}  // namespace lcu
