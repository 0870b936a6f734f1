#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcu/circuit.hpp"
#include "lcu/output_matrix.hpp"
#include "lcu/recovery.hpp"
#include "lcu/spectral.hpp"
#include "lcu/trapdoor.hpp"

namespace py = pybind11;
using namespace lcu;

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RotationVariant parse_variant(const std::string& v)
{
    if (v == "reflection") {
        return RotationVariant::reflection;
    }
    if (v == "cyclic") {
        return RotationVariant::cyclic;
    }
    throw std::invalid_argument("variant must be 'reflection' or 'cyclic'");
}

Mixing parse_mixing(const std::string& kind, const std::optional<ComplexMatrix>& w)
{
    if (kind == "hadamard") {
        return Mixing::hadamard();
    }
    if (kind == "dft") {
        return Mixing::dft();
    }
    if (kind == "secret") {
        if (!w) {
            throw std::invalid_argument("secret mixing needs mixing_matrix");
        }
        return Mixing::secret(*w);
    }
    throw std::invalid_argument("mixing must be 'hadamard', 'dft' or 'secret'");
}

BoolMatrix mask_to_array(const ObservationMask& m)
{
    BoolMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.observed(i, j);
        }
    }
    return out;
}

ObservationMask mask_from_array(const BoolMatrix& a)
{
    ObservationMask m(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()), MaskMode::uniform(1.0));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            m.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), a(i, j));
        }
    }
    return m;
}

// Values must already be zero off the mask; observe() guarantees that.
ObservedEntries entries(const ComplexMatrix& values, const BoolMatrix& mask, double sigma)
{
    if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
        throw std::invalid_argument("values and mask differ in shape");
    }
    ObservedEntries obs{mask_from_array(mask), values, sigma};
    obs.values = obs.values.cwiseProduct(obs.indicator().cast<Complex>());
    return obs;
}

py::dict report_dict(const RecoveryReport& r)
{
    py::dict d;
    d["phi_hat"] = r.phi_hat;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["underdetermined_columns"] = r.underdetermined_columns;
    d["observed_residual"] = r.observed_residual;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "C++ core: circuit simulation, outcome matrices, completion, trapdoor";
    m.attr("__version__") = LCU_VERSION;

    py::class_<CircuitSpec>(m, "CircuitSpec")
        .def(py::init([](std::vector<double> weights, std::vector<ComplexMatrix> unitaries, const std::string& mixing,
                         const std::string& variant, std::optional<ComplexMatrix> mixing_matrix) {
                 CircuitSpec s;
                 s.terms = weights.size();
                 if (unitaries.empty() || unitaries.size() != weights.size()) {
                     throw std::invalid_argument("need one unitary per weight");
                 }
                 std::size_t n = 0;
                 while ((std::size_t{1} << n) < static_cast<std::size_t>(unitaries[0].rows())) {
                     ++n;
                 }
                 s.system_qubits = n;
                 s.weights = std::move(weights);
                 s.unitaries = std::move(unitaries);
                 s.mixing = parse_mixing(mixing, mixing_matrix);
                 s.variant = parse_variant(variant);
                 s.validate();
                 return s;
             }),
             py::arg("weights"), py::arg("unitaries"), py::arg("mixing") = "hadamard",
             py::arg("variant") = "reflection", py::arg("mixing_matrix") = py::none())
        .def_readonly("terms", &CircuitSpec::terms)
        .def_readonly("system_qubits", &CircuitSpec::system_qubits)
        .def_readonly("weights", &CircuitSpec::weights)
        .def_readonly("unitaries", &CircuitSpec::unitaries)
        .def_property_readonly("dim", &CircuitSpec::dim);

    m.def("haar_random_unitary", &haar_random_unitary, py::arg("dim"), py::arg("seed"));
    m.def("random_state", &random_state, py::arg("dim"), py::arg("seed"));
    m.def("hadamard_matrix", &hadamard_matrix, py::arg("k"));
    m.def("dft_matrix", &dft_matrix, py::arg("k"));
    m.def(
        "svd",
        [](const ComplexMatrix& a) {
            const SvdResult r = svd(a);
            return py::make_tuple(r.left, r.singular_values, r.right);
        },
        py::arg("a"), "Thin SVD (left, sigma, right) with a = left @ diag(sigma) @ right^H.");

    m.def("circuit_unitary", &circuit_unitary, py::arg("spec"));
    m.def(
        "outcome_probabilities",
        [](const CircuitSpec& spec, const ComplexVector& psi) {
            const OutcomeStates st = output_states(spec, psi);
            RealMatrix p(static_cast<Eigen::Index>(spec.terms), 2);
            for (std::size_t i = 0; i < spec.terms; ++i) {
                for (std::size_t r = 0; r < 2; ++r) {
                    p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = st.probability(i, r);
                }
            }
            return p;
        },
        py::arg("spec"), py::arg("psi"), "p[i, r] for index outcome i and rotation outcome r.");
    m.def(
        "shuffle",
        [](const CircuitSpec& spec) {
            const ShuffledUnitary s = shuffle(spec);
            return py::make_tuple(s.a, s.b);
        },
        py::arg("spec"), "Blocks (A, B) of the register-swapped circuit unitary.");

    m.def(
        "coefficient_matrix", [](const CircuitSpec& s) { return coefficient_matrix(s).c; }, py::arg("spec"));
    m.def(
        "row_matrix", [](const CircuitSpec& s, const ComplexVector& psi) { return row_matrix(s, psi).x; },
        py::arg("spec"), py::arg("psi"));
    m.def(
        "output_matrix", [](const CircuitSpec& s, const ComplexVector& psi) { return output_matrix(s, psi).phi; },
        py::arg("spec"), py::arg("psi"));
    m.def(
        "invert_with_c",
        [](const ComplexMatrix& c, const ComplexMatrix& phi) { return invert_with_c({c}, {phi}).x; },
        py::arg("c"), py::arg("phi"));
    m.def(
        "extract_target",
        [](const ComplexMatrix& x, const std::vector<double>& alpha) { return extract_target({x}, alpha); },
        py::arg("x"), py::arg("alpha"));

    m.def(
        "make_mask",
        [](std::size_t rows, std::size_t cols, double density, std::size_t min_per_column, std::uint64_t seed) {
            const MaskMode mode = min_per_column > 0 ? MaskMode::column_guaranteed(min_per_column, density)
                                                     : MaskMode::uniform(density);
            return mask_to_array(make_mask(rows, cols, mode, seed));
        },
        py::arg("rows"), py::arg("cols"), py::arg("density"), py::arg("min_per_column") = 0, py::arg("seed") = 0);
    m.def(
        "observe",
        [](const ComplexMatrix& phi, const BoolMatrix& mask, double sigma, std::uint64_t seed) {
            return observe(phi, mask_from_array(mask), sigma, seed).values;
        },
        py::arg("phi"), py::arg("mask"), py::arg("sigma") = 0.0, py::arg("seed") = 0);
    m.def(
        "svp_complete",
        [](const ComplexMatrix& values, const BoolMatrix& mask, std::size_t rank, std::optional<double> step,
           std::size_t max_iters, double tol) {
            SvpOptions o;
            o.rank = rank;
            o.step = step;
            o.max_iters = max_iters;
            o.tol = tol;
            return report_dict(svp_complete(entries(values, mask, 0.0), o));
        },
        py::arg("values"), py::arg("mask"), py::arg("rank"), py::arg("step") = py::none(), py::arg("max_iters") = 500,
        py::arg("tol") = 1e-12);
    m.def(
        "als_complete",
        [](const ComplexMatrix& values, const BoolMatrix& mask, std::size_t rank, std::size_t max_iters, double ridge,
           std::uint64_t seed) {
            AlsOptions o;
            o.rank = rank;
            o.max_iters = max_iters;
            o.ridge = ridge;
            o.seed = seed;
            return report_dict(als_complete(entries(values, mask, 0.0), o));
        },
        py::arg("values"), py::arg("mask"), py::arg("rank"), py::arg("max_iters") = 200, py::arg("ridge") = 1e-12,
        py::arg("seed") = 0);
    m.def(
        "factorized_complete",
        [](const ComplexMatrix& c, const ComplexMatrix& values, const BoolMatrix& mask, std::optional<double> ridge) {
            return report_dict(factorized_complete({c}, entries(values, mask, 0.0), ridge));
        },
        py::arg("c"), py::arg("values"), py::arg("mask"), py::arg("ridge") = py::none());
    m.def(
        "recovery_errors",
        [](const ComplexMatrix& hat, const ComplexMatrix& truth) {
            const RecoveryErrors e = recovery_errors(hat, truth);
            return py::make_tuple(e.phi, e.target);
        },
        py::arg("phi_hat"), py::arg("phi_true"), "(relative error of Phi, relative error of the target row)");
    m.def(
        "sweep_instance",
        [](std::size_t terms, std::size_t qubits, std::uint64_t seed, std::size_t index) {
            const SweepInstance s = sweep_instance(terms, qubits, seed, index);
            py::dict d;
            d["spec"] = s.spec;
            d["psi"] = s.psi;
            d["phi"] = s.phi;
            d["c"] = s.c.c;
            return d;
        },
        py::arg("terms"), py::arg("system_qubits"), py::arg("seed"), py::arg("index") = 0);

    py::class_<SecretKey>(m, "SecretKey")
        .def_property_readonly("scheme", [](const SecretKey& k) { return scheme_name(k.scheme); })
        .def_readonly("weights", &SecretKey::weights)
        .def_readonly("gamma", &SecretKey::gamma)
        .def_readonly("mixing", &SecretKey::mixing);
    py::class_<PublicParams>(m, "PublicParams")
        .def_readonly("terms", &PublicParams::terms)
        .def_readonly("system_qubits", &PublicParams::system_qubits)
        .def_readonly("unitaries", &PublicParams::unitaries)
        .def_property_readonly("scheme", [](const PublicParams& p) { return scheme_name(p.scheme); })
        .def_property_readonly("dim", &PublicParams::dim);

    m.def(
        "keygen",
        [](std::size_t terms, const std::string& scheme, std::uint64_t seed) {
            return keygen(terms, parse_scheme(scheme), seed);
        },
        py::arg("terms"), py::arg("scheme") = "hadamard", py::arg("seed") = 0);
    m.def(
        "random_public_params",
        [](std::size_t terms, std::size_t qubits, const std::string& scheme, std::uint64_t seed) {
            return random_public_params(terms, qubits, parse_scheme(scheme), seed);
        },
        py::arg("terms"), py::arg("system_qubits"), py::arg("scheme") = "hadamard", py::arg("seed") = 0);
    m.def(
        "eval_trapdoor",
        [](const SecretKey& key, const PublicParams& pub, const ComplexVector& psi, std::uint64_t shots,
           std::uint64_t seed) { return eval_trapdoor(key, pub, psi, shots, seed).magnitudes; },
        py::arg("key"), py::arg("public"), py::arg("psi"), py::arg("shots") = 0, py::arg("seed") = 0);
    m.def(
        "invert_with_key",
        [](const SecretKey& key, const PublicParams& pub, const ComplexMatrix& phi) {
            return invert_with_key(key, pub, phi).target;
        },
        py::arg("key"), py::arg("public"), py::arg("phi"), "T psi from the full amplitude matrix.");
    m.def(
        "hadamard_attack",
        [](const ComplexMatrix& phi, const PublicParams& pub) {
            const AttackResult r = hadamard_attack(phi, pub);
            return py::make_tuple(r.weights, r.residual, r.success);
        },
        py::arg("phi"), py::arg("public"), "(weights, residual, success)");
    m.def(
        "build_circuit", [](const SecretKey& k, const PublicParams& p) { return build_circuit(k, p); },
        py::arg("key"), py::arg("public"));
}
