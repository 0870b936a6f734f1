#include "lcu/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "lcu/rng.hpp"

namespace lcu {

namespace {

using ColMatrix = Eigen::MatrixXcd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Orthogonalizes the columns of `a` in place by plane rotations and
// accumulates the rotations in `v`. Returns the number of sweeps used.
int hestenes_sweeps(ColMatrix& a, ColMatrix& v, int max_sweeps)
{
    const Eigen::Index n = a.cols();
    v = ColMatrix::Identity(n, n);
    // dot products carry about rows*eps relative rounding, so asking for more
    // never terminates on columns that are pure rounding noise
    const double rel_tol = std::max(1.0, static_cast<double>(a.rows())) * kEps;
    const double negligible = kEps * kEps * a.squaredNorm();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = a.col(p).squaredNorm();
                const double beta = a.col(q).squaredNorm();
                const Complex gamma = a.col(p).dot(a.col(q));
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= rel_tol * std::sqrt(alpha * beta) || alpha <= negligible ||
                    beta <= negligible) {
                    continue;
                }
                rotated = true;
                // Rotating a_p against conj(phase) * a_q makes the pair's
                // inner product real, reducing to the real Jacobi rotation.
                const Complex phase_conj = std::conj(gamma / g);
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index k = 0; k < a.rows(); ++k) {
                    const Complex ap = a(k, p);
                    const Complex aq = a(k, q) * phase_conj;
                    a(k, p) = c * ap - s * aq;
                    a(k, q) = s * ap + c * aq;
                }
                for (Eigen::Index k = 0; k < v.rows(); ++k) {
                    const Complex vp = v(k, p);
                    const Complex vq = v(k, q) * phase_conj;
                    v(k, p) = c * vp - s * vq;
                    v(k, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) {
            return sweep + 1;
        }
    }
    throw SvdNotConverged(max_sweeps);
}

// Replaces the columns flagged in `missing` by unit vectors orthogonal to all
// other columns (two rounds of modified Gram-Schmidt).
void complete_orthonormal(ColMatrix& u, const std::vector<bool>& missing)
{
    const Eigen::Index n = u.rows();
    Eigen::Index candidate = 0;
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        if (!missing[static_cast<std::size_t>(j)]) {
            continue;
        }
        for (; candidate < n; ++candidate) {
            Eigen::VectorXcd x = Eigen::VectorXcd::Unit(n, candidate);
            for (int round = 0; round < 2; ++round) {
                for (Eigen::Index i = 0; i < u.cols(); ++i) {
                    if (i == j || (missing[static_cast<std::size_t>(i)] && i > j)) {
                        continue;
                    }
                    x -= u.col(i) * u.col(i).dot(x);
                }
            }
            const double norm = x.norm();
            if (norm > 0.5) {
                u.col(j) = x / norm;
                ++candidate;
                break;
            }
        }
    }
}

SvdResult svd_tall(const ComplexMatrix& m, int max_sweeps)
{
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();

    ColMatrix a;
    ColMatrix q;
    const bool reduced = rows > cols;
    if (reduced) {
        QrResult qr = householder_qr(m);
        a = qr.r;
        q = qr.q;
    } else {
        a = m;
    }

    ColMatrix v;
    hestenes_sweeps(a, v, max_sweeps);

    RealVector sigma(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        sigma(j) = a.col(j).norm();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return sigma(x) > sigma(y); });

    ColMatrix u_small(cols, cols);
    ColMatrix v_sorted(cols, cols);
    RealVector sigma_sorted(cols);
    std::vector<bool> missing(static_cast<std::size_t>(cols), false);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        sigma_sorted(j) = sigma(src);
        v_sorted.col(j) = v.col(src);
        if (sigma(src) > 1e-300) {
            u_small.col(j) = a.col(src) / sigma(src);
        } else {
            sigma_sorted(j) = 0.0;
            u_small.col(j).setZero();
            missing[static_cast<std::size_t>(j)] = true;
        }
    }
    if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
        complete_orthonormal(u_small, missing);
    }

    SvdResult out;
    out.left = reduced ? ComplexMatrix(q * u_small) : ComplexMatrix(u_small);
    out.singular_values = sigma_sorted;
    out.right = v_sorted;
    return out;
}

}  // namespace

SvdNotConverged::SvdNotConverged(int sweeps)
    : std::runtime_error("Jacobi SVD did not converge after " + std::to_string(sweeps) + " sweeps"),
      sweeps_(sweeps)
{
}

ComplexMatrix SvdResult::reconstruct() const
{
    return left * singular_values.cast<Complex>().asDiagonal() * right.adjoint();
}

ComplexMatrix SvdResult::truncated(std::size_t k) const
{
    const auto kk = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), singular_values.size());
    return left.leftCols(kk) * singular_values.head(kk).cast<Complex>().asDiagonal() *
           right.leftCols(kk).adjoint();
}

SvdResult svd(const ComplexMatrix& m, int max_sweeps)
{
    if (m.size() == 0) {
        throw std::invalid_argument("svd: empty matrix");
    }
    require_finite(m, "svd input");
    if (m.rows() < m.cols()) {
        SvdResult t = svd_tall(m.adjoint(), max_sweeps);
        std::swap(t.left, t.right);
        return t;
    }
    return svd_tall(m, max_sweeps);
}

QrResult householder_qr(const ComplexMatrix& m)
{
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    if (rows < cols) {
        throw std::invalid_argument("householder_qr: requires rows >= cols");
    }
    ColMatrix r = m;
    std::vector<Eigen::VectorXcd> reflectors(static_cast<std::size_t>(cols));

    for (Eigen::Index j = 0; j < cols; ++j) {
        const Eigen::Index len = rows - j;
        Eigen::VectorXcd x = r.col(j).tail(len);
        const double xnorm = x.norm();
        if (xnorm == 0.0) {
            continue;
        }
        const double x0abs = std::abs(x(0));
        const Complex phase = x0abs == 0.0 ? Complex{1.0, 0.0} : x(0) / x0abs;
        // alpha = -phase*||x|| avoids cancellation in v0 = x0 - alpha.
        x(0) += phase * xnorm;
        const double vnorm = x.norm();
        x /= vnorm;
        auto block = r.bottomRightCorner(len, cols - j);
        block.noalias() -= 2.0 * x * (x.adjoint() * block);
        reflectors[static_cast<std::size_t>(j)] = std::move(x);
    }

    ColMatrix q = ColMatrix::Identity(rows, cols);
    for (Eigen::Index j = cols - 1; j >= 0; --j) {
        const auto& v = reflectors[static_cast<std::size_t>(j)];
        if (v.size() == 0) {
            continue;
        }
        auto block = q.bottomRows(rows - j);
        block.noalias() -= 2.0 * v * (v.adjoint() * block);
    }

    QrResult out;
    out.q = q;
    out.r = r.topRows(cols).triangularView<Eigen::Upper>();
    return out;
}

std::size_t numerical_rank(const ComplexMatrix& m, double tol)
{
    if (!(tol > 0.0)) {
        throw std::invalid_argument("numerical_rank: tol must be positive");
    }
    if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
        return 0;
    }
    const RealVector sigma = svd(m).singular_values;
    const double cutoff = tol * sigma(0);
    return static_cast<std::size_t>((sigma.array() > cutoff).count());
}

ComplexMatrix hadamard_matrix(std::size_t k)
{
    if (!is_power_of_two(k)) {
        throw std::invalid_argument("hadamard_matrix: size " + std::to_string(k) +
                                    " is not a power of two");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    ComplexMatrix h(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            const bool odd = std::popcount(i & t) % 2 == 1;
            h(i, t) = odd ? -scale : scale;
        }
    }
    return h;
}

ComplexMatrix dft_matrix(std::size_t k)
{
    if (k == 0) {
        throw std::invalid_argument("dft_matrix: size must be >= 1");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    ComplexMatrix f(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t t = 0; t < k; ++t) {
            const std::size_t m = (j * t) % k;
            Complex omega;
            if ((4 * m) % k == 0) {
                // Exact values at quarter turns keep F_2 equal to H_2.
                constexpr Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
                omega = quarter[(4 * m) / k];
            } else {
                const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) /
                                     static_cast<double>(k);
                omega = {std::cos(angle), std::sin(angle)};
            }
            f(j, t) = omega * scale;
        }
    }
    return f;
}

ComplexMatrix haar_random_unitary(std::size_t dim, std::uint64_t seed)
{
    if (dim == 0) {
        throw std::invalid_argument("haar_random_unitary: dim must be >= 1");
    }
    CounterRng rng(seed, 0x4AA7);
    ComplexMatrix z(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            z(i, j) = rng.complex_gaussian();
        }
    }
    QrResult qr = householder_qr(z);
    for (std::size_t j = 0; j < dim; ++j) {
        const Complex d = qr.r(j, j);
        const double mag = std::abs(d);
        if (mag > 0.0) {
            qr.q.col(j) *= d / mag;
        }
    }
    return qr.q;
}

ComplexVector random_state(std::size_t dim, std::uint64_t seed)
{
    if (dim == 0) {
        throw std::invalid_argument("random_state: dim must be >= 1");
    }
    CounterRng rng(seed, 0x57A7E);
    ComplexVector psi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        psi(i) = rng.complex_gaussian();
    }
    return psi / psi.norm();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b)
{
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

ComplexMatrix direct_sum(std::span<const ComplexMatrix> blocks)
{
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

double unitarity_defect(const ComplexMatrix& m)
{
    return (m.adjoint() * m - ComplexMatrix::Identity(m.cols(), m.cols())).norm();
}

ComplexMatrix identity(std::size_t n)
{
    return ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

void require_finite(const ComplexMatrix& m, const std::string& what)
{
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw std::invalid_argument(what + ": non-finite entry");
        }
    }
}

}  // namespace lcu
