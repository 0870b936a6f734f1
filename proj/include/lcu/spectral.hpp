#pragma once

#include <cstddef>
#include <vector>

#include "lcu/circuit.hpp"

namespace lcu {

/// Circuit unitary after reordering the basis from
/// index (x) rotation (x) system to rotation (x) index (x) system.
/// For the reflection variant U = [[A, B], [B, -A]]; for the cyclic variant
/// U = [[A, B], [-B, A]].
struct ShuffledUnitary
{
    ComplexMatrix u;
    ComplexMatrix a;  // KN x KN
    ComplexMatrix b;  // KN x KN
    /// permutation[old] = new basis position; never materialized as a matrix.
    std::vector<std::size_t> permutation;
    RotationVariant variant = RotationVariant::reflection;

    /// Max absolute deviation of U's lower blocks from the variant's
    /// pattern. Zero for a correctly assembled circuit.
    double block_structure_residual() const;
};

/// Index map for the register swap; old index t*2N + r*N + k goes to
/// r*KN + t*N + k.
std::vector<std::size_t> register_swap_permutation(std::size_t terms, std::size_t dim);

ComplexVector permute_vector(const std::vector<std::size_t>& permutation, const ComplexVector& v);

/// P M P^T for the permutation matrix P encoded by `permutation`.
ComplexMatrix permute_matrix(const std::vector<std::size_t>& permutation, const ComplexMatrix& m);

ShuffledUnitary shuffle(const CircuitSpec& spec);

struct SimilarityResiduals
{
    double a = 0.0;  // ||Q^dag A Q - (+)_t w_t U_t||_F / ||A||_F
    double b = 0.0;  // same for B with r_t
    double max() const { return a > b ? a : b; }
};

/// Checks A = Q diag(w_t U_t) Q^dag (and the same for B) with Q = G (x) I_N,
/// G being the output mixing layer.
SimilarityResiduals similarity_check(const ShuffledUnitary& shuffled, const CircuitSpec& spec);

struct MultisetDeviation
{
    double a = 0.0;
    double b = 0.0;
};

/// Max deviation between sorted singular values of A (resp. B) and the
/// multiset {|w_t|} (resp. {r_t}), each repeated N times.
MultisetDeviation singular_multiset_check(const ShuffledUnitary& shuffled, const CircuitSpec& spec);

/// Explicit cosine-sine factors with the polar choice P_t = U_t, Q_t = I:
/// Q1 = (G (x) I_N) (+)_t U_t, Q2 = (G_in^dag (x) I_N).
/// sigma_w carries the signed weights w_t (|w_t| are the singular values).
struct CsdFactors
{
    ComplexMatrix q1;
    ComplexMatrix q2;
    RealVector sigma_w;
    RealVector sigma_r;
};

CsdFactors csd_assemble(const CircuitSpec& spec);

/// [[S_w, S_r], [S_r, -S_w]] (reflection) or [[S_w, S_r], [-S_r, S_w]] (cyclic).
ComplexMatrix csd_central_matrix(const CsdFactors& csd, RotationVariant variant);

struct CsdResiduals
{
    double a = 0.0;               // ||A - Q1 S_w Q2^dag|| / ||A||
    double b = 0.0;               // ||B - Q1 S_r Q2^dag|| / ||B||
    double full = 0.0;            // ||U - diag(Q1,Q1) central diag(Q2,Q2)^dag|| / ||U||
    double sum_of_squares = 0.0;  // max_j |s_w^2 + s_r^2 - 1|
    double block_trace = 0.0;     // max_j |tr M_j|
    double block_det = 0.0;       // max_j |det M_j - d|, d = -1 (reflection) or +1 (cyclic)
};

CsdResiduals csd_check(const ShuffledUnitary& shuffled, const CsdFactors& csd);

struct InvolutionResiduals
{
    double structure = 0.0;   // ||U^2 - I_2 (x) Q (+)U_t^2 Q^dag||_F
    double key_cancel = 0.0;  // ||U^2(spec) - U^2(spec_alt)||_F
};

/// Both specs must share every public parameter and use the reflection
/// variant; only the weights may differ.
InvolutionResiduals involution_check(const CircuitSpec& spec, const CircuitSpec& spec_alt);

/// Throws unless the two specs agree on K, n, unitaries, mixing and variant.
void require_same_public_parameters(const CircuitSpec& x, const CircuitSpec& y);

}  // namespace lcu
