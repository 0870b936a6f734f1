#include "lcu/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lcu/rng.hpp"

#ifndef LCU_VERSION
#define LCU_VERSION "0.0.0"
#endif

namespace lcu::io {

namespace {

const json& require_key(const json& j, const char* key, const char* where)
{
    if (!j.is_object() || !j.contains(key)) {
        throw std::invalid_argument(std::string(where) + ": missing \"" + key + "\"");
    }
    return j.at(key);
}

RotationVariant parse_variant(const json& j)
{
    if (!j.contains("variant")) {
        return RotationVariant::reflection;
    }
    const std::string v = j.at("variant").get<std::string>();
    if (v == "reflection") {
        return RotationVariant::reflection;
    }
    if (v == "cyclic") {
        return RotationVariant::cyclic;
    }
    throw std::invalid_argument("circuit: unknown variant '" + v + "'");
}

std::vector<double> real_list(const json& j, const char* what)
{
    if (!j.is_array()) {
        throw std::invalid_argument(std::string(what) + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) {
            throw std::invalid_argument(std::string(what) + " must be an array of numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace

ComplexMatrix pauli_string(const std::string& letters)
{
    if (letters.empty()) {
        throw std::invalid_argument("pauli string is empty");
    }
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (char ch : letters) {
        ComplexMatrix p = ComplexMatrix::Zero(2, 2);
        switch (ch) {
        case 'I':
            p(0, 0) = p(1, 1) = 1.0;
            break;
        case 'X':
            p(0, 1) = p(1, 0) = 1.0;
            break;
        case 'Y':
            p(0, 1) = Complex{0.0, -1.0};
            p(1, 0) = Complex{0.0, 1.0};
            break;
        case 'Z':
            p(0, 0) = 1.0;
            p(1, 1) = -1.0;
            break;
        default:
            throw std::invalid_argument(std::string("pauli string: bad letter '") + ch + "'");
        }
        m = kron(m, p);
    }
    return m;
}

ComplexMatrix permutation_matrix(const std::vector<std::size_t>& image)
{
    const auto n = static_cast<Eigen::Index>(image.size());
    std::vector<bool> hit(image.size(), false);
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (image[i] >= image.size() || hit[image[i]]) {
            throw std::invalid_argument("permutation: not a bijection");
        }
        hit[image[i]] = true;
        m(static_cast<Eigen::Index>(image[i]), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return m;
}

ComplexMatrix nested_matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw std::invalid_argument("matrix: expected nested rows of [re, im] pairs");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::invalid_argument("matrix: ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& e = row.at(static_cast<std::size_t>(c));
            if (e.is_number()) {
                m(r, c) = e.get<double>();
            } else if (e.is_array() && e.size() == 2) {
                m(r, c) = Complex{e.at(0).get<double>(), e.at(1).get<double>()};
            } else {
                throw std::invalid_argument("matrix: entries must be numbers or [re, im]");
            }
        }
    }
    return m;
}

json nested_matrix_to_json(const ComplexMatrix& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ComplexMatrix> unitaries_from_json(const json& j, std::size_t terms, std::size_t qubits)
{
    const std::string kind = require_key(j, "kind", "unitaries").get<std::string>();
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    const std::size_t dim = std::size_t{1} << qubits;
    std::vector<ComplexMatrix> out;

    auto require_count = [&](const json& data) {
        if (!data.is_array() || data.size() != terms) {
            throw std::invalid_argument("unitaries: expected " + std::to_string(terms) + " entries in data");
        }
    };

    if (kind == "haar") {
        for (std::size_t t = 0; t < terms; ++t) {
            out.push_back(haar_random_unitary(dim, derive_seed(seed, 0x9B, t)));
        }
    } else if (kind == "pauli_strings") {
        if (j.contains("data")) {
            require_count(j.at("data"));
            for (const auto& s : j.at("data")) {
                const std::string letters = s.get<std::string>();
                if (letters.size() != qubits) {
                    throw std::invalid_argument("unitaries: pauli string '" + letters + "' has wrong length");
                }
                out.push_back(pauli_string(letters));
            }
        } else {
            out = random_involutions(terms, qubits, seed, false);
        }
    } else if (kind == "permutation") {
        if (j.contains("data")) {
            require_count(j.at("data"));
            for (const auto& p : j.at("data")) {
                const auto image = p.get<std::vector<std::size_t>>();
                if (image.size() != dim) {
                    throw std::invalid_argument("unitaries: permutation of wrong length");
                }
                out.push_back(permutation_matrix(image));
            }
        } else {
            out = random_involutions(terms, qubits, seed, true);
        }
    } else if (kind == "explicit") {
        const json& data = require_key(j, "data", "unitaries");
        require_count(data);
        for (const auto& m : data) {
            out.push_back(nested_matrix_from_json(m));
        }
    } else {
        throw std::invalid_argument("unitaries: unknown kind '" + kind + "'");
    }
    return out;
}

CircuitSpec circuit_from_json(const json& j, bool validate)
{
    if (!j.is_object()) {
        throw std::invalid_argument("circuit: document must be a JSON object");
    }
    CircuitSpec spec;
    spec.terms = require_key(j, "K", "circuit").get<std::size_t>();
    spec.system_qubits = require_key(j, "n", "circuit").get<std::size_t>();
    if (spec.system_qubits > 24) {
        throw std::invalid_argument("circuit: n too large");
    }
    if (j.contains("weights")) {
        spec.weights = real_list(j.at("weights"), "weights");
    } else if (j.contains("alpha")) {
        const auto alpha = real_list(j.at("alpha"), "alpha");
        spec.weights = scale_coefficients(alpha).beta;
    } else {
        throw std::invalid_argument("circuit: missing \"weights\" (or \"alpha\")");
    }
    spec.unitaries = unitaries_from_json(require_key(j, "unitaries", "circuit"), spec.terms,
                                         spec.system_qubits);
    const std::string mixing = j.value("mixing", std::string("hadamard"));
    if (mixing == "hadamard") {
        spec.mixing = Mixing::hadamard();
    } else if (mixing == "dft") {
        spec.mixing = Mixing::dft();
    } else if (mixing == "secret") {
        spec.mixing = Mixing::secret(nested_matrix_from_json(require_key(j, "mixing_matrix", "circuit")));
    } else {
        throw std::invalid_argument("circuit: unknown mixing '" + mixing + "'");
    }
    spec.variant = parse_variant(j);
    if (validate) {
        spec.validate();
    }
    return spec;
}

json circuit_to_json(const CircuitSpec& spec)
{
    json j;
    j["K"] = spec.terms;
    j["n"] = spec.system_qubits;
    j["weights"] = spec.weights;
    json data = json::array();
    for (const auto& u : spec.unitaries) {
        data.push_back(nested_matrix_to_json(u));
    }
    j["unitaries"] = {{"kind", "explicit"}, {"data", std::move(data)}};
    switch (spec.mixing.kind) {
    case MixingKind::hadamard:
        j["mixing"] = "hadamard";
        break;
    case MixingKind::dft:
        j["mixing"] = "dft";
        break;
    case MixingKind::secret:
        j["mixing"] = "secret";
        j["mixing_matrix"] = nested_matrix_to_json(spec.mixing.matrix);
        break;
    }
    j["variant"] = spec.variant == RotationVariant::reflection ? "reflection" : "cyclic";
    return j;
}

PublicParams public_params_from_json(const json& j)
{
    PublicParams pub;
    pub.terms = require_key(j, "K", "public params").get<std::size_t>();
    pub.system_qubits = require_key(j, "n", "public params").get<std::size_t>();
    if (!is_power_of_two(pub.terms)) {
        throw std::invalid_argument("public params: K must be a power of two");
    }
    if (pub.system_qubits > 24) {
        throw std::invalid_argument("public params: n too large");
    }
    pub.unitaries = unitaries_from_json(require_key(j, "unitaries", "public params"), pub.terms,
                                        pub.system_qubits);
    for (std::size_t t = 0; t < pub.unitaries.size(); ++t) {
        if (unitarity_defect(pub.unitaries[t]) >= 1e-10) {
            throw std::invalid_argument("public params: U_" + std::to_string(t) + " is not unitary");
        }
    }
    pub.variant = parse_variant(j);
    pub.scheme = parse_scheme(j.value("scheme", std::string("hadamard")));
    return pub;
}

json key_to_json(const SecretKey& key)
{
    json j;
    j["scheme"] = scheme_name(key.scheme);
    j["weights"] = key.weights;
    j["gamma"] = key.gamma;
    return j;
}

SecretKey key_from_json(const json& j)
{
    SecretKey key;
    key.scheme = parse_scheme(require_key(j, "scheme", "key").get<std::string>());
    key.weights = real_list(require_key(j, "weights", "key"), "key weights");
    key.gamma = j.value("gamma", std::uint64_t{0});
    return complete_key(std::move(key));
}

json complex_matrix_to_json(const ComplexMatrix& m)
{
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            data.push_back({m(r, c).real(), m(r, c).imag()});
        }
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ComplexMatrix complex_matrix_from_json(const json& j)
{
    const auto rows = require_key(j, "rows", "matrix").get<Eigen::Index>();
    const auto cols = require_key(j, "cols", "matrix").get<Eigen::Index>();
    const json& data = require_key(j, "data", "matrix");
    if (rows < 0 || cols < 0 || !data.is_array() ||
        data.size() != static_cast<std::size_t>(rows * cols)) {
        throw std::invalid_argument("matrix: data length does not match rows x cols");
    }
    ComplexMatrix m(rows, cols);
    std::size_t pos = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& e = data.at(pos++);
            m(r, c) = Complex{e.at(0).get<double>(), e.at(1).get<double>()};
        }
    }
    return m;
}

std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_complex(Complex z)
{
    std::string s = format_real(z.real());
    const std::string im = format_real(z.imag());
    if (im.front() != '-') {
        s += '+';
    }
    s += im;
    s += 'j';
    return s;
}

Complex parse_complex(const std::string& text)
{
    std::string t = text;
    while (!t.empty() && (t.back() == ' ' || t.back() == '\r')) {
        t.pop_back();
    }
    while (!t.empty() && t.front() == ' ') {
        t.erase(t.begin());
    }
    if (t.empty()) {
        throw std::invalid_argument("complex: empty field");
    }
    if (t.back() != 'j') {
        char* end = nullptr;
        const double re = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size()) {
            throw std::invalid_argument("complex: cannot parse '" + text + "'");
        }
        return {re, 0.0};
    }
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t i = t.size(); i-- > 1;) {
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) {
        throw std::invalid_argument("complex: cannot parse '" + text + "'");
    }
    const std::string re_s = t.substr(0, split);
    std::string im_s = t.substr(split);
    if (im_s.front() == '+') {
        im_s.erase(im_s.begin());
    }
    char* end = nullptr;
    const double re = std::strtod(re_s.c_str(), &end);
    if (end != re_s.c_str() + re_s.size()) {
        throw std::invalid_argument("complex: cannot parse '" + text + "'");
    }
    const double im = std::strtod(im_s.c_str(), &end);
    if (end != im_s.c_str() + im_s.size()) {
        throw std::invalid_argument("complex: cannot parse '" + text + "'");
    }
    return {re, im};
}

void write_matrix_csv(std::ostream& out, const ComplexMatrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c != 0) {
                out << ',';
            }
            out << format_complex(m(r, c));
        }
        out << '\n';
    }
}

namespace {

template <typename Parse>
auto read_csv_rows(std::istream& in, Parse parse)
{
    using Value = decltype(parse(std::string{}));
    std::vector<std::vector<Value>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<Value> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            row.push_back(parse(field));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::invalid_argument("csv: ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::invalid_argument("csv: no data rows");
    }
    return rows;
}

}  // namespace

ComplexMatrix read_matrix_csv(std::istream& in)
{
    const auto rows = read_csv_rows(in, parse_complex);
    ComplexMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

void write_real_matrix_csv(std::ostream& out, const RealMatrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c != 0) {
                out << ',';
            }
            out << format_real(m(r, c));
        }
        out << '\n';
    }
}

RealMatrix read_real_matrix_csv(std::istream& in)
{
    const auto rows = read_csv_rows(in, [](const std::string& s) {
        const Complex z = parse_complex(s);
        if (z.imag() != 0.0) {
            throw std::invalid_argument("csv: expected real entries");
        }
        return z.real();
    });
    RealMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path)
{
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

std::string config_hash(const json& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string comment_header(const std::string& command, const json& config,
                           const std::vector<std::pair<std::string, std::uint64_t>>& seeds)
{
    std::string s = "# lcu " LCU_VERSION " " + command + "\n";
    s += "# config_hash " + config_hash(config) + "\n";
    for (const auto& [name, value] : seeds) {
        s += "# seed " + name + " " + std::to_string(value) + "\n";
    }
    return s;
}

}  // namespace lcu::io
