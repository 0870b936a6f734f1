#include "lcu/trapdoor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "lcu/rng.hpp"

namespace lcu {

namespace {

constexpr std::uint64_t key_stream = 0x6E4;
constexpr std::uint64_t attack_stream = 0xA77AC;

void require_hadamard_pub(const PublicParams& pub, const char* who)
{
    if (pub.scheme != Scheme::hadamard) {
        throw std::invalid_argument(std::string(who) + ": requires the public Hadamard scheme");
    }
}

// C(theta) for Hadamard mixing, reflection or cyclic (both share column 0 of R).
RealMatrix hadamard_c(const RealVector& theta)
{
    const auto k = theta.size();
    const double kd = static_cast<double>(k);
    const ComplexMatrix h = hadamard_matrix(static_cast<std::size_t>(k));
    RealMatrix c(2 * k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index t = 0; t < k; ++t) {
            const double s = h(i, t).real() / std::sqrt(kd);  // s_it / K
            c(i, t) = s * std::cos(theta(t));
            c(k + i, t) = s * std::sin(theta(t));
        }
    }
    return c;
}

RealMatrix hadamard_c_derivative(const RealVector& theta)
{
    const auto k = theta.size();
    const double kd = static_cast<double>(k);
    const ComplexMatrix h = hadamard_matrix(static_cast<std::size_t>(k));
    RealMatrix c(2 * k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index t = 0; t < k; ++t) {
            const double s = h(i, t).real() / std::sqrt(kd);
            c(i, t) = -s * std::sin(theta(t));
            c(k + i, t) = s * std::cos(theta(t));
        }
    }
    return c;
}

struct Objective
{
    double value = 0.0;
    RealVector grad_theta;
    ComplexMatrix grad_x;
};

Objective evaluate(const RealVector& theta, const ComplexMatrix& x, const RealMatrix& p, bool grads)
{
    const RealMatrix c = hadamard_c(theta);
    const ComplexMatrix z = c.cast<Complex>() * x;
    const RealMatrix e = z.cwiseAbs2() - p;
    Objective out;
    out.value = e.squaredNorm();
    if (!grads) {
        return out;
    }
    const ComplexMatrix ez = e.cast<Complex>().cwiseProduct(z);
    out.grad_x = 4.0 * c.transpose().cast<Complex>() * ez;
    // M_it = sum_j E_ij conj(Z_ij) X_tj
    const ComplexMatrix m = ez.conjugate() * x.transpose();
    const RealMatrix dc = hadamard_c_derivative(theta);
    out.grad_theta = 4.0 * (dc.cwiseProduct(m.real())).colwise().sum().transpose();
    return out;
}

RealVector clamp_theta(RealVector theta)
{
    for (auto& v : theta) {
        v = std::clamp(v, 0.0, std::numbers::pi);
    }
    return theta;
}

}  // namespace

std::string scheme_name(Scheme s)
{
    return s == Scheme::hadamard ? "hadamard" : "secret_mixing";
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "hadamard") {
        return Scheme::hadamard;
    }
    if (name == "secret_mixing") {
        return Scheme::secret_mixing;
    }
    throw std::invalid_argument("unknown scheme '" + name + "' (expected hadamard or secret_mixing)");
}

PublicParams random_public_params(std::size_t terms, std::size_t system_qubits, Scheme scheme,
                                  std::uint64_t seed)
{
    PublicParams pub;
    pub.terms = terms;
    pub.system_qubits = system_qubits;
    pub.scheme = scheme;
    for (std::size_t t = 0; t < terms; ++t) {
        pub.unitaries.push_back(haar_random_unitary(pub.dim(), derive_seed(seed, 0x9B, t)));
    }
    return pub;
}

ComplexMatrix secret_mixing_matrix(const std::vector<double>& weights, std::uint64_t gamma)
{
    const auto k = static_cast<Eigen::Index>(weights.size());
    if (k == 0) {
        throw std::invalid_argument("secret_mixing_matrix: no weights");
    }
    RealVector v = Eigen::Map<const RealVector>(weights.data(), k);
    const double norm = v.norm();
    if (!(norm > 0.0)) {
        throw std::invalid_argument("secret_mixing_matrix: zero weight vector");
    }
    v /= norm;

    RealVector u = -v;
    u(0) += 1.0;
    const double unorm2 = u.squaredNorm();
    ComplexMatrix p = ComplexMatrix::Identity(k, k);
    if (unorm2 > 1e-30) {
        p -= (2.0 / unorm2) * (u * u.transpose()).cast<Complex>();
    }
    ComplexMatrix block = ComplexMatrix::Identity(k, k);
    if (k > 1) {
        block.bottomRightCorner(k - 1, k - 1) = haar_random_unitary(static_cast<std::size_t>(k - 1), gamma);
    }
    return block * p;
}

SecretKey complete_key(SecretKey key)
{
    if (key.weights.empty() || !is_power_of_two(key.weights.size())) {
        throw std::invalid_argument("key: number of weights must be a power of two");
    }
    for (double w : key.weights) {
        if (!std::isfinite(w) || std::abs(w) > 1.0) {
            throw std::invalid_argument("key: weights must satisfy |w| <= 1");
        }
    }
    if (key.scheme == Scheme::secret_mixing) {
        double s = 0.0;
        for (double w : key.weights) {
            s += w * w;
        }
        if (std::abs(s - 1.0) > 1e-12) {
            throw std::invalid_argument("key: secret_mixing weights must have unit 2-norm");
        }
        key.mixing = secret_mixing_matrix(key.weights, key.gamma);
    } else {
        key.mixing.resize(0, 0);
        key.gamma = 0;
    }
    return key;
}

SecretKey keygen(std::size_t terms, Scheme scheme, std::uint64_t seed)
{
    if (!is_power_of_two(terms)) {
        throw std::invalid_argument("keygen: K must be a power of two");
    }
    CounterRng rng(seed, key_stream);
    SecretKey key;
    key.scheme = scheme;
    for (std::size_t t = 0; t < terms; ++t) {
        key.weights.push_back(rng.uniform(0.1, 1.0));
    }
    if (scheme == Scheme::secret_mixing) {
        double s = 0.0;
        for (double w : key.weights) {
            s += w * w;
        }
        const double norm = std::sqrt(s);
        for (double& w : key.weights) {
            w /= norm;
        }
        key.gamma = rng.next_u64();
    }
    return complete_key(std::move(key));
}

CircuitSpec build_circuit(const SecretKey& key, const PublicParams& pub)
{
    if (key.scheme != pub.scheme) {
        throw std::invalid_argument("key scheme " + scheme_name(key.scheme) +
                                    " does not match public scheme " + scheme_name(pub.scheme));
    }
    if (key.terms() != pub.terms) {
        throw std::invalid_argument("key has " + std::to_string(key.terms()) + " weights, public K is " +
                                    std::to_string(pub.terms));
    }
    CircuitSpec spec;
    spec.terms = pub.terms;
    spec.system_qubits = pub.system_qubits;
    spec.weights = key.weights;
    spec.unitaries = pub.unitaries;
    spec.variant = pub.variant;
    if (key.scheme == Scheme::secret_mixing) {
        spec.mixing = Mixing::secret(key.mixing.size() != 0
                                         ? key.mixing
                                         : secret_mixing_matrix(key.weights, key.gamma));
    }
    spec.validate();
    return spec;
}

CoefficientMatrix key_coefficient_matrix(const SecretKey& key, const PublicParams& pub)
{
    return coefficient_matrix(build_circuit(key, pub));
}

EvalOutput eval_trapdoor(const SecretKey& key, const PublicParams& pub, const ComplexVector& psi,
                         std::uint64_t shots, std::uint64_t seed)
{
    const CircuitSpec spec = build_circuit(key, pub);
    EvalOutput out;
    out.shots = shots;
    if (shots == 0) {
        out.magnitudes = exact_magnitudes(output_matrix(spec, psi));
    } else {
        out.magnitudes = empirical_magnitudes(sample_shots(spec, psi, shots, seed)).probabilities;
    }
    return out;
}

Inversion invert_with_key(const SecretKey& key, const PublicParams& pub, const ComplexMatrix& phi)
{
    const CoefficientMatrix c = key_coefficient_matrix(key, pub);
    Inversion out;
    out.x = invert_with_c(c, OutputMatrix{phi});
    out.target = extract_target(out.x, key.weights);
    return out;
}

Inversion invert_with_key(const SecretKey& key, const PublicParams& pub, const ObservedEntries& obs)
{
    const CoefficientMatrix c = key_coefficient_matrix(key, pub);
    const RecoveryReport completed = factorized_complete(c, obs);
    Inversion out;
    out.x = invert_with_c(c, OutputMatrix{completed.phi_hat});
    out.target = extract_target(out.x, key.weights);
    out.underdetermined_columns = completed.underdetermined_columns;
    return out;
}

double target_error(const SecretKey& key, const PublicParams& pub, const ComplexVector& psi,
                    const ComplexVector& target)
{
    const ComplexVector truth = apply_combination(pub.unitaries, key.weights, psi);
    const double norm = truth.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("target_error: reference target vanishes");
    }
    return (target - truth).norm() / norm;
}

AttackResult hadamard_attack(const ComplexMatrix& phi, const PublicParams& pub)
{
    require_hadamard_pub(pub, "hadamard_attack");
    const auto k = static_cast<Eigen::Index>(pub.terms);
    if (phi.rows() != 2 * k) {
        throw std::invalid_argument("hadamard_attack: Phi must have 2K rows");
    }
    const ComplexMatrix st = std::sqrt(static_cast<double>(k)) * hadamard_matrix(pub.terms).transpose();
    const ComplexMatrix y0 = st * phi.topRows(k);
    const ComplexMatrix y1 = st * phi.bottomRows(k);
    const double floor = 1e-14 * phi.norm();

    AttackResult out;
    out.weights.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
    out.recovered.assign(static_cast<std::size_t>(k), false);
    out.row_residuals.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index t = 0; t < k; ++t) {
        const double row_energy = y0.row(t).squaredNorm() + y1.row(t).squaredNorm();
        if (!(std::sqrt(row_energy) > floor)) {
            continue;
        }
        Eigen::Index j = 0;
        (y0.row(t).cwiseAbs2() + y1.row(t).cwiseAbs2()).maxCoeff(&j);
        const Complex a = y0(t, j);
        const Complex b = y1(t, j);
        double w = 0.0;
        if (std::abs(a) >= std::abs(b)) {
            const double rho = (b / a).real();  // r / w
            w = rho == 0.0 ? 1.0 : std::copysign(1.0 / std::sqrt(1.0 + rho * rho), rho);
        } else {
            const double tau = (a / b).real();  // w / r
            w = tau / std::sqrt(1.0 + tau * tau);
        }
        const double r = complementary_weight(w);
        // w y0 + r y1 = (w^2 + r^2) x
        const Eigen::RowVectorXcd x = w * y0.row(t) + r * y1.row(t);
        const double misfit = std::sqrt(((y0.row(t) - w * x).squaredNorm() +
                                         (y1.row(t) - r * x).squaredNorm()) /
                                        row_energy);
        out.weights[static_cast<std::size_t>(t)] = w;
        out.recovered[static_cast<std::size_t>(t)] = true;
        out.row_residuals[static_cast<std::size_t>(t)] = misfit;
        out.residual = std::max(out.residual, misfit);
    }
    const bool all = std::all_of(out.recovered.begin(), out.recovered.end(), [](bool b) { return b; });
    out.success = all && out.residual < 1e-8;
    return out;
}

ComplexMatrix strip_phases(const ComplexMatrix& phi)
{
    return phi.cwiseAbs().cast<Complex>();
}

PhaseRetrievalResult phase_retrieval_attack(const EvalOutput& magnitudes, const PublicParams& pub,
                                            const PhaseRetrievalOptions& options)
{
    require_hadamard_pub(pub, "phase_retrieval_attack");
    const auto k = static_cast<Eigen::Index>(pub.terms);
    const auto n = static_cast<Eigen::Index>(pub.dim());
    const RealMatrix& p = magnitudes.magnitudes;
    if (p.rows() != 2 * k || p.cols() != n) {
        throw std::invalid_argument("phase_retrieval_attack: magnitudes must be 2K x N");
    }
    if (options.restarts == 0) {
        throw std::invalid_argument("phase_retrieval_attack: restarts must be positive");
    }
    const double p_norm = p.norm();
    if (p_norm == 0.0) {
        throw std::invalid_argument("phase_retrieval_attack: all-zero magnitudes");
    }

    std::optional<ComplexMatrix> fixed_x;
    if (options.known_psi) {
        require_state(*options.known_psi, pub.dim());
        fixed_x = ComplexMatrix(k, n);
        for (Eigen::Index t = 0; t < k; ++t) {
            fixed_x->row(t) = (pub.unitaries[static_cast<std::size_t>(t)] * *options.known_psi).transpose();
        }
    }

    PhaseRetrievalResult best;
    best.residual = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < options.restarts; ++restart) {
        CounterRng rng(derive_seed(options.seed, attack_stream, restart));
        RealVector theta(k);
        ComplexMatrix x(k, n);
        for (Eigen::Index t = 0; t < k; ++t) {
            theta(t) = rng.uniform(0.0, std::numbers::pi);
        }
        for (Eigen::Index t = 0; t < k; ++t) {
            for (Eigen::Index j = 0; j < n; ++j) {
                x(t, j) = rng.complex_gaussian();
            }
            x.row(t).normalize();
        }
        if (restart == 0 && options.initial_weights) {
            if (options.initial_weights->size() != static_cast<std::size_t>(k)) {
                throw std::invalid_argument("phase_retrieval_attack: initial weights must have K entries");
            }
            for (Eigen::Index t = 0; t < k; ++t) {
                theta(t) = std::acos(std::clamp((*options.initial_weights)[static_cast<std::size_t>(t)], -1.0, 1.0));
            }
        }
        if (restart == 0 && options.initial_x) {
            if (options.initial_x->rows() != k || options.initial_x->cols() != n) {
                throw std::invalid_argument("phase_retrieval_attack: initial X must be K x N");
            }
            x = *options.initial_x;
        }
        if (fixed_x) {
            x = *fixed_x;
        }

        Objective obj = evaluate(theta, x, p, true);
        double eta = 1.0;
        for (std::size_t it = 0; it < options.iters; ++it) {
            if (obj.value < 1e-32) {
                break;
            }
            bool accepted = false;
            eta *= 2.0;
            while (eta > 1e-30) {
                const RealVector theta_new = clamp_theta(theta - eta * obj.grad_theta);
                const ComplexMatrix x_new = fixed_x ? x : ComplexMatrix(x - eta * obj.grad_x);
                // Armijo on the projected displacement.
                double decrease = obj.grad_theta.dot(theta - theta_new);
                if (!fixed_x) {
                    decrease += (obj.grad_x.adjoint() * (x - x_new)).trace().real();
                }
                const double value = evaluate(theta_new, x_new, p, false).value;
                if (value <= obj.value - 1e-4 * decrease && value < obj.value) {
                    theta = theta_new;
                    x = x_new;
                    obj = evaluate(theta, x, p, true);
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!accepted) {
                break;
            }
        }
        const double residual = std::sqrt(obj.value) / p_norm;
        best.restart_residuals.push_back(residual);
        if (residual < best.residual) {
            best.residual = residual;
            best.x = x;
            best.weights.resize(static_cast<std::size_t>(k));
            for (Eigen::Index t = 0; t < k; ++t) {
                best.weights[static_cast<std::size_t>(t)] = std::cos(theta(t));
            }
        }
    }
    return best;
}

double involution_encrypt_decrypt(const PublicParams& pub, const ComplexVector& psi,
                                  const SecretKey& key, const SecretKey& key2)
{
    for (std::size_t t = 0; t < pub.unitaries.size(); ++t) {
        const ComplexMatrix& u = pub.unitaries[t];
        if ((u * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm() >= 1e-10) {
            throw std::invalid_argument("involution_encrypt_decrypt: U_" + std::to_string(t) +
                                        " is not an involution");
        }
    }
    require_state(psi, pub.dim());
    const ComplexMatrix v1 = circuit_unitary(build_circuit(key, pub));
    const ComplexMatrix v2 = circuit_unitary(build_circuit(key2, pub));
    ComplexVector input = ComplexVector::Zero(v1.rows());
    input.head(psi.size()) = psi;  // |0>_index |0>_rotation |psi>
    const ComplexVector out = v2 * (v1 * input);
    return std::norm(input.dot(out));
}

double involution_fidelity_closed_form(const std::vector<double>& w1, const std::vector<double>& w2)
{
    if (w1.size() != w2.size() || w1.empty()) {
        throw std::invalid_argument("involution_fidelity_closed_form: weight vectors differ in length");
    }
    double s = 0.0;
    for (std::size_t t = 0; t < w1.size(); ++t) {
        s += w1[t] * w2[t] + complementary_weight(w1[t]) * complementary_weight(w2[t]);
    }
    s /= static_cast<double>(w1.size());
    return s * s;
}

std::vector<ComplexMatrix> random_involutions(std::size_t count, std::size_t system_qubits,
                                              std::uint64_t seed, bool permutations)
{
    const std::size_t dim = std::size_t{1} << system_qubits;
    CounterRng rng(seed, 0x1770);
    std::vector<ComplexMatrix> out;
    for (std::size_t c = 0; c < count; ++c) {
        if (permutations) {
            std::vector<std::size_t> order(dim);
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = dim; i > 1; --i) {
                std::swap(order[i - 1], order[rng.below(i)]);
            }
            std::vector<std::size_t> image(dim);
            std::iota(image.begin(), image.end(), std::size_t{0});
            for (std::size_t i = 0; i + 1 < dim; i += 2) {
                if (rng.uniform() < 0.5) {
                    image[order[i]] = order[i + 1];
                    image[order[i + 1]] = order[i];
                }
            }
            ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
            for (std::size_t i = 0; i < dim; ++i) {
                m(static_cast<Eigen::Index>(image[i]), static_cast<Eigen::Index>(i)) = 1.0;
            }
            out.push_back(std::move(m));
        } else {
            const Complex i1{0.0, 1.0};
            ComplexMatrix paulis[4];
            paulis[0] = identity(2);
            paulis[1] = ComplexMatrix::Zero(2, 2);
            paulis[1](0, 1) = paulis[1](1, 0) = 1.0;
            paulis[2] = ComplexMatrix::Zero(2, 2);
            paulis[2](0, 1) = -i1;
            paulis[2](1, 0) = i1;
            paulis[3] = identity(2);
            paulis[3](1, 1) = -1.0;
            ComplexMatrix m = ComplexMatrix::Identity(1, 1);
            for (std::size_t q = 0; q < system_qubits; ++q) {
                m = kron(m, paulis[rng.below(4)]);
            }
            out.push_back(std::move(m));
        }
    }
    return out;
}

}  // namespace lcu
