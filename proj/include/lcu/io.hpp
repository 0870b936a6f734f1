#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lcu/circuit.hpp"
#include "lcu/trapdoor.hpp"

namespace lcu::io {

using nlohmann::json;

// Circuit documents:
// {"K": 4, "n": 3, "weights": [...],
//  "unitaries": {"kind": "haar" | "pauli_strings" | "permutation" | "explicit",
//                "seed": 7, "data": ...},
//  "mixing": "hadamard" | "dft" | "secret", "mixing_matrix": [[[re, im], ...], ...],
//  "variant": "reflection" | "cyclic"}
// pauli_strings data: ["XZ", "IY", ...]; permutation data: [[1, 0, 3, 2], ...]
// (image of each basis index); explicit data: one nested [re, im] matrix per term.
// Without data, pauli_strings and permutation kinds draw seeded involutions.
std::vector<ComplexMatrix> unitaries_from_json(const json& j, std::size_t terms, std::size_t qubits);
CircuitSpec circuit_from_json(const json& j, bool validate = true);
json circuit_to_json(const CircuitSpec& spec);

ComplexMatrix pauli_string(const std::string& letters);
ComplexMatrix permutation_matrix(const std::vector<std::size_t>& image);

// Public parameters: same keys as a circuit minus weights/mixing, plus "scheme".
PublicParams public_params_from_json(const json& j);

// Key files: {"scheme": ..., "weights": [...], "gamma": int}. W is never stored.
json key_to_json(const SecretKey& key);
SecretKey key_from_json(const json& j);

json complex_matrix_to_json(const ComplexMatrix& m);  // {"rows","cols","data":[[re,im],...]}
ComplexMatrix complex_matrix_from_json(const json& j);
/// Nested [[[re, im], ...], ...] form used inside circuit documents.
ComplexMatrix nested_matrix_from_json(const json& j);
json nested_matrix_to_json(const ComplexMatrix& m);

std::string format_complex(Complex z);  // "re+imj" at 17 significant digits
Complex parse_complex(const std::string& text);
std::string format_real(double x);

void write_matrix_csv(std::ostream& out, const ComplexMatrix& m);
ComplexMatrix read_matrix_csv(std::istream& in);  // skips '#' lines
void write_real_matrix_csv(std::ostream& out, const RealMatrix& m);
RealMatrix read_real_matrix_csv(std::istream& in);

json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// FNV-1a over the compact dump of `config`.
std::string config_hash(const json& config);

/// '#'-prefixed provenance lines: tool version, command, config hash, seeds.
std::string comment_header(const std::string& command, const json& config,
                           const std::vector<std::pair<std::string, std::uint64_t>>& seeds);

}  // namespace lcu::io
