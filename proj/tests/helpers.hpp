#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lcu/circuit.hpp"
#include "lcu/linalg.hpp"
#include "lcu/rng.hpp"

namespace testing {

using lcu::Complex;
using lcu::ComplexMatrix;
using lcu::ComplexVector;

inline ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    lcu::CounterRng rng(seed, 77);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = rng.complex_gaussian();
        }
    }
    return m;
}

// H_ij = (-1)^popcount(i & j) / sqrt(K), written out entrywise.
inline ComplexMatrix sylvester(std::size_t k)
{
    ComplexMatrix h(k, k);
    const double s = 1.0 / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            h(i, j) = (std::popcount(i & j) % 2 == 0) ? s : -s;
        }
    }
    return h;
}

inline ComplexMatrix fourier(std::size_t k)
{
    ComplexMatrix f(k, k);
    const double s = 1.0 / std::sqrt(static_cast<double>(k));
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t t = 0; t < k; ++t) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(j * t) / static_cast<double>(k);
            f(j, t) = std::polar(s, angle);
        }
    }
    return f;
}

// Hand-rolled generator for circuit specs: K in {1,2,4,8}, n in 1..max_n,
// weights uniform in [-1, 1], Haar U_t.
struct SpecGen
{
    std::uint64_t seed;
    std::size_t max_terms_log2 = 3;
    std::size_t max_qubits = 3;

    lcu::CircuitSpec operator()(std::size_t draw) const
    {
        lcu::CounterRng rng(seed, draw);
        lcu::CircuitSpec spec;
        spec.terms = std::size_t{1} << rng.below(max_terms_log2 + 1);
        spec.system_qubits = 1 + rng.below(max_qubits);
        for (std::size_t t = 0; t < spec.terms; ++t) {
            spec.weights.push_back(rng.uniform(-1.0, 1.0));
            spec.unitaries.push_back(lcu::haar_random_unitary(spec.dim(), lcu::derive_seed(seed, draw, t)));
        }
        return spec;
    }
};

inline lcu::CircuitSpec haar_spec(std::size_t k, std::size_t n, std::vector<double> w, std::uint64_t seed)
{
    lcu::CircuitSpec spec;
    spec.terms = k;
    spec.system_qubits = n;
    spec.weights = std::move(w);
    for (std::size_t t = 0; t < k; ++t) {
        spec.unitaries.push_back(lcu::haar_random_unitary(spec.dim(), lcu::derive_seed(seed, t)));
    }
    return spec;
}

// Gate-by-gate statevector run of the circuit on |0>|0>|psi>: mixing on the
// index register, then controlled (R_t (x) U_t), then the output mixing.
// Layout index (x) rotation (x) system. Returns the final 2KN state.
inline ComplexVector statevector_run(const lcu::CircuitSpec& spec, const ComplexVector& psi,
                                     const ComplexMatrix& g_in, const ComplexMatrix& g_out)
{
    const std::size_t k = spec.terms;
    const std::size_t n = spec.dim();
    std::vector<Complex> state(2 * k * n, 0.0);
    auto at = [&](std::size_t t, std::size_t r, std::size_t x) -> Complex& { return state[(t * 2 + r) * n + x]; };
    for (std::size_t x = 0; x < n; ++x) {
        at(0, 0, x) = psi(static_cast<Eigen::Index>(x));
    }
    auto mix = [&](const ComplexMatrix& g) {
        std::vector<Complex> next(state.size(), 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                const Complex gab = g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                for (std::size_t rest = 0; rest < 2 * n; ++rest) {
                    next[a * 2 * n + rest] += gab * state[b * 2 * n + rest];
                }
            }
        }
        state.swap(next);
    };
    mix(g_in);
    for (std::size_t t = 0; t < k; ++t) {
        const double w = spec.weights[t];
        const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
        const bool cyclic = spec.variant == lcu::RotationVariant::cyclic;
        // rotation gate on the rotation qubit
        for (std::size_t x = 0; x < n; ++x) {
            const Complex a0 = at(t, 0, x);
            const Complex a1 = at(t, 1, x);
            at(t, 0, x) = w * a0 + r * a1;
            at(t, 1, x) = cyclic ? (-r * a0 + w * a1) : (r * a0 - w * a1);
        }
        // U_t on the system register
        for (std::size_t rot = 0; rot < 2; ++rot) {
            ComplexVector v(static_cast<Eigen::Index>(n));
            for (std::size_t x = 0; x < n; ++x) {
                v(static_cast<Eigen::Index>(x)) = at(t, rot, x);
            }
            v = spec.unitaries[t] * v;
            for (std::size_t x = 0; x < n; ++x) {
                at(t, rot, x) = v(static_cast<Eigen::Index>(x));
            }
        }
    }
    mix(g_out);
    return Eigen::Map<ComplexVector>(state.data(), static_cast<Eigen::Index>(state.size()));
}

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace testing
