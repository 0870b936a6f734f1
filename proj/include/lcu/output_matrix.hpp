#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "lcu/circuit.hpp"

namespace lcu {

// Rows of the 2K x N output matrix and of C are ordered r-major:
// row r*K + i holds outcome (index i, rotation r).
constexpr std::size_t outcome_row(std::size_t terms, std::size_t i, std::size_t r) noexcept
{
    return r * terms + i;
}

/// 2K x K matrix with Phi = C X.
struct CoefficientMatrix
{
    ComplexMatrix c;
    std::size_t terms() const noexcept { return static_cast<std::size_t>(c.cols()); }
};

/// 2K x N matrix of all outcome amplitudes <k|phi_{i,r}>.
struct OutputMatrix
{
    ComplexMatrix phi;
};

/// K x N matrix whose row t is U_t psi.
struct RowMatrix
{
    ComplexMatrix x;
};

/// C_{(r,i),t} = out(i,t) in(t,0) <r|R_t|0>, read off the circuit's mixing
/// layers. For Hadamard mixing this is s_{i,t} w_t / K and s_{i,t} r_t / K,
/// and C^T C = I / K.
CoefficientMatrix coefficient_matrix(const CircuitSpec& spec);

RowMatrix row_matrix(const CircuitSpec& spec, const ComplexVector& psi);

/// Assembled from output_states, independently of C and X.
OutputMatrix output_matrix(const CircuitSpec& spec, const ComplexVector& psi);

/// X from C and Phi. Uses X = K C^dagger Phi when C^dagger C = I/K (Hadamard
/// and DFT mixing); otherwise the least-squares solution through the SVD of
/// C. Rejects a numerically rank-deficient C.
RowMatrix invert_with_c(const CoefficientMatrix& c, const OutputMatrix& phi);

/// T psi = sum_t alpha_t (row t of X).
ComplexVector extract_target(const RowMatrix& x, std::span<const double> alpha);

/// Empirical outcome frequencies laid out like Phi, plus raw counts.
struct MagnitudeEstimate
{
    RealMatrix probabilities;                        // 2K x N
    Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts;
    std::uint64_t shots = 0;
};

MagnitudeEstimate empirical_magnitudes(const ShotDataset& data);

/// Exact |Phi|^2, laid out like Phi.
RealMatrix exact_magnitudes(const OutputMatrix& phi);

/// Real and imaginary parts of Phi; each has rank <= K when C is real.
std::pair<RealMatrix, RealMatrix> split_real_imag(const OutputMatrix& phi);

}  // namespace lcu
