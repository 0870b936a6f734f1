#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcu {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major, interleaved (re, im) doubles.
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

/// Thin SVD: left is m x p, right is n x p with p = min(m, n), singular
/// values non-negative and sorted in descending order.
struct SvdResult
{
    ComplexMatrix left;
    RealVector singular_values;
    ComplexMatrix right;

    ComplexMatrix reconstruct() const;

    /// Best rank-k approximation from the leading k triplets.
    ComplexMatrix truncated(std::size_t k) const;
};

/// Raised when the Jacobi sweeps do not reach orthogonality within the cap.
class SvdNotConverged : public std::runtime_error
{
public:
    explicit SvdNotConverged(int sweeps);
    int sweeps() const noexcept { return sweeps_; }

private:
    int sweeps_;
};

/// One-sided (Hestenes) Jacobi SVD. Tall inputs are first reduced by a
/// Householder QR so the rotations act on the small triangular factor; wide
/// inputs are handled through their adjoint.
SvdResult svd(const ComplexMatrix& m, int max_sweeps = 60);

struct QrResult
{
    ComplexMatrix q;  // m x n, orthonormal columns
    ComplexMatrix r;  // n x n, upper triangular
};

/// Thin Householder QR of an m x n matrix with m >= n.
QrResult householder_qr(const ComplexMatrix& m);

/// Number of singular values strictly greater than tol * sigma_max.
std::size_t numerical_rank(const ComplexMatrix& m, double tol);

/// Sylvester-Hadamard matrix scaled by 1/sqrt(k); k must be a power of two.
ComplexMatrix hadamard_matrix(std::size_t k);

/// Unitary DFT matrix F_{jt} = omega^{jt} / sqrt(k), omega = exp(2 pi i / k).
ComplexMatrix dft_matrix(std::size_t k);

/// Haar-distributed unitary: QR of a seeded complex Gaussian matrix with the
/// phases of diag(R) moved into Q.
ComplexMatrix haar_random_unitary(std::size_t dim, std::uint64_t seed);

/// Unit-norm complex Gaussian state.
ComplexVector random_state(std::size_t dim, std::uint64_t seed);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Block-diagonal direct sum of square or rectangular blocks.
ComplexMatrix direct_sum(std::span<const ComplexMatrix> blocks);

/// ||M^dagger M - I||_F; zero for an exactly unitary (or isometric) M.
double unitarity_defect(const ComplexMatrix& m);

ComplexMatrix identity(std::size_t n);

constexpr bool is_power_of_two(std::size_t k) noexcept { return k != 0 && (k & (k - 1)) == 0; }

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const std::string& what);

}  // namespace lcu
