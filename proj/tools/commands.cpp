#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "lcu/circuit.hpp"
#include "lcu/io.hpp"
#include "lcu/output_matrix.hpp"
#include "lcu/recovery.hpp"
#include "lcu/rng.hpp"
#include "lcu/spectral.hpp"
#include "lcu/trapdoor.hpp"

namespace lcu::cli {

using nlohmann::json;

namespace {

constexpr double kUnitaryTol = 1e-10;

void emit(const Context& ctx, const std::string& suffix, const std::string& text)
{
    if (ctx.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    const std::string path = ctx.out + suffix;
    io::write_text_file(path, text);
    std::cerr << "wrote " << path << '\n';
}

std::string num(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::size_t qubits_of(std::size_t dim)
{
    if (!is_power_of_two(dim)) {
        throw UsageError("N = " + std::to_string(dim) + " is not a power of two");
    }
    std::size_t n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    return n;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config field \"") + key + "\": " + e.what());
    }
}

// ---- verify ---------------------------------------------------------------

struct Check
{
    std::string name;
    double residual;
    double threshold;
    bool pass;
};

void add_check(std::vector<Check>& checks, const std::string& name, double residual, double threshold)
{
    checks.push_back({name, residual, threshold, residual < threshold});
}

// ---- sweep configs --------------------------------------------------------

SweepConfig sweep_from_config(const json& c, SweepAxis axis, std::uint64_t seed)
{
    SweepConfig s;
    s.axis = axis;
    s.seed = seed;
    s.terms = get_or<std::size_t>(c, "K", 4);
    if (!is_power_of_two(s.terms)) {
        throw UsageError("K must be a power of two");
    }
    s.methods = get_or<std::vector<std::string>>(c, "methods", {"svp", "factorized"});
    s.instances = get_or<std::size_t>(c, "instances", 10);
    if (axis == SweepAxis::fraction) {
        s.grid = get_or<std::vector<double>>(c, "fractions",
                                             {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95});
        s.realizations = get_or<std::size_t>(c, "masks", 5);
        s.fixed_sigma = get_or<double>(c, "sigma", 0.0);
    } else {
        s.grid = get_or<std::vector<double>>(c, "sigmas", {1e-5, 1e-4, 1e-3, 1e-2, 1e-1});
        s.realizations = get_or<std::size_t>(c, "realizations", 5);
        s.fixed_fraction = get_or<double>(c, "fraction", 0.7);
    }
    if (c.contains("svp")) {
        const json& o = c.at("svp");
        s.svp.max_iters = get_or<std::size_t>(o, "max_iters", s.svp.max_iters);
        s.svp.tol = get_or<double>(o, "tol", s.svp.tol);
        if (o.contains("step")) {
            s.svp.step = get_or<double>(o, "step", 1.0);
        }
    }
    if (c.contains("als")) {
        const json& o = c.at("als");
        s.als.max_iters = get_or<std::size_t>(o, "max_iters", s.als.max_iters);
        s.als.tol = get_or<double>(o, "tol", s.als.tol);
        s.als.ridge = get_or<double>(o, "ridge", s.als.ridge);
    }
    if (c.contains("ridge")) {
        s.ridge = get_or<double>(c, "ridge", 0.0);
    }
    s.timing = get_or<bool>(c, "timing", false);
    s.threads = get_or<std::size_t>(c, "threads", 1);
    return s;
}

int run_sweep_command(const Context& ctx, SweepAxis axis, const char* name)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();
    const auto dims = get_or<std::vector<std::size_t>>(cfg, "N", {256, 1024});
    SweepConfig base;
    try {
        base = sweep_from_config(cfg, axis, seed);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    for (std::size_t dim : dims) {
        SweepConfig s = base;
        s.system_qubits = qubits_of(dim);
        std::string text = io::comment_header(name, cfg, {{"seed", seed}});
        text += "# N " + std::to_string(dim) + " K " + std::to_string(s.terms) + "\n";
        text += sweep_csv_header;
        text += '\n';
        for (const SweepRow& row : sweep(s)) {
            text += sweep_csv_line(row);
            text += '\n';
        }
        emit(ctx, "_N" + std::to_string(dim) + ".csv", text);
    }
    return ok;
}

// ---- trapdoor helpers -----------------------------------------------------

PublicParams load_public(const Context& ctx)
{
    const json& c = ctx.config;
    const json& pj = c.contains("public") ? c.at("public") : c;
    return io::public_params_from_json(pj);
}

SecretKey load_key(const Context& ctx)
{
    const json& c = ctx.config;
    if (!c.contains("key")) {
        throw UsageError("config needs a \"key\" (object or path to a key file)");
    }
    const json& k = c.at("key");
    if (k.is_string()) {
        return io::key_from_json(io::read_json_file(ctx.resolve(k.get<std::string>())));
    }
    return io::key_from_json(k);
}

ComplexVector config_psi(const json& c, std::size_t dim, std::uint64_t seed)
{
    return random_state(dim, get_or<std::uint64_t>(c, "psi_seed", derive_seed(seed, 0x951, 0)));
}

MaskMode mask_mode_from_json(const json& m, std::size_t terms)
{
    const std::string kind = get_or<std::string>(m, "kind", "uniform");
    const double density = get_or<double>(m, "density", kind == "uniform" ? 1.0 : 0.0);
    if (kind == "uniform") {
        return MaskMode::uniform(density);
    }
    if (kind == "column_guaranteed") {
        return MaskMode::column_guaranteed(get_or<std::size_t>(m, "min_per_column", terms), density);
    }
    throw UsageError("mask kind must be uniform or column_guaranteed");
}

std::string vector_csv(const ComplexVector& v, const char* column)
{
    std::string s = std::string("k,") + column + "\n";
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        s += std::to_string(k) + "," + io::format_complex(v(k)) + "\n";
    }
    return s;
}

}  // namespace

std::uint64_t Context::effective_seed(std::uint64_t fallback) const
{
    if (seed) {
        return *seed;
    }
    return get_or<std::uint64_t>(config, "seed", fallback);
}

json Context::effective_config() const
{
    json c = config;
    c["seed"] = effective_seed();
    return c;
}

std::string Context::resolve(const std::string& path) const
{
    const std::filesystem::path p(path);
    if (p.is_absolute() || config_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(config_dir) / p).string();
}

int cmd_verify(const Context& ctx)
{
    const json& c = ctx.config;
    CircuitSpec spec;
    try {
        spec = io::circuit_from_json(c, false);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const std::uint64_t seed = ctx.effective_seed();
    std::vector<Check> checks;

    double worst_u = 0.0;
    for (const auto& u : spec.unitaries) {
        if (u.rows() != static_cast<Eigen::Index>(spec.dim()) || u.cols() != u.rows()) {
            throw UsageError("unitaries must be N x N");
        }
        worst_u = std::max(worst_u, unitarity_defect(u));
    }
    add_check(checks, "unitaries", worst_u, kUnitaryTol);

    bool runnable = checks.back().pass;
    try {
        if (runnable) {
            spec.validate();
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "verify: " << e.what() << '\n';
        runnable = false;
    }

    if (runnable) {
        const ComplexMatrix v = circuit_unitary(spec);
        add_check(checks, "circuit_unitary", unitarity_defect(v), kUnitaryTol);

        const ShuffledUnitary sh = shuffle(spec);
        add_check(checks, "block_structure", sh.block_structure_residual(), 1e-12);
        add_check(checks, "similarity", similarity_check(sh, spec).max(), 1e-10);
        const MultisetDeviation md = singular_multiset_check(sh, spec);
        add_check(checks, "singular_multiset", std::max(md.a, md.b), 1e-10);
        const CsdResiduals csd = csd_check(sh, csd_assemble(spec));
        add_check(checks, "csd_blocks", std::max(csd.a, csd.b), 1e-10);
        add_check(checks, "csd_full", csd.full, 1e-10);
        add_check(checks, "csd_sum_of_squares", csd.sum_of_squares, 1e-12);
        if (spec.variant == RotationVariant::reflection) {
            add_check(checks, "csd_block_trace", csd.block_trace, 1e-12);
        }
        add_check(checks, "csd_block_det", csd.block_det, 1e-12);

        if (spec.variant == RotationVariant::reflection) {
            CircuitSpec alt = spec;
            CounterRng rng(derive_seed(seed, 0xA17, 0));
            for (double& w : alt.weights) {
                w = rng.uniform(-1.0, 1.0);
            }
            const InvolutionResiduals inv = involution_check(spec, alt);
            add_check(checks, "involution_structure", inv.structure, 1e-10);
            add_check(checks, "involution_key_cancel", inv.key_cancel, 1e-10);
        }

        const ComplexVector psi = config_psi(c, spec.dim(), seed);
        const OutcomeStates states = output_states(spec, psi);
        ComplexVector input = ComplexVector::Zero(v.rows());
        input.head(psi.size()) = psi;
        const ComplexVector full = v * input;
        double dual = 0.0;
        const auto n = static_cast<Eigen::Index>(spec.dim());
        for (std::size_t i = 0; i < spec.terms; ++i) {
            for (std::size_t r = 0; r < 2; ++r) {
                const auto offset = static_cast<Eigen::Index>((2 * i + r)) * n;
                dual = std::max(dual, (full.segment(offset, n) - states.state(i, r)).cwiseAbs().maxCoeff());
            }
        }
        add_check(checks, "dual_construction", dual, 1e-12);

        const CoefficientMatrix cm = coefficient_matrix(spec);
        const ComplexMatrix phi = output_matrix(spec, psi).phi;
        const ComplexMatrix x = row_matrix(spec, psi).x;
        add_check(checks, "phi_factorization", (phi - cm.c * x).norm(), 1e-12);
        const double rank = static_cast<double>(numerical_rank(phi, 1e-10));
        checks.push_back({"phi_rank", rank, static_cast<double>(spec.terms),
                          rank <= static_cast<double>(spec.terms)});
        if (spec.mixing.kind != MixingKind::secret) {
            const auto k = static_cast<Eigen::Index>(spec.terms);
            const ComplexMatrix gram = cm.c.adjoint() * cm.c;
            add_check(checks, "coefficient_gram",
                      (gram - ComplexMatrix::Identity(k, k) / static_cast<double>(k)).cwiseAbs().maxCoeff(),
                      1e-12);
        }
    }

    json report;
    report["checks"] = json::array();
    bool all = runnable;
    for (const auto& ch : checks) {
        report["checks"].push_back(
            {{"name", ch.name}, {"residual", ch.residual}, {"threshold", ch.threshold}, {"pass", ch.pass}});
        all = all && ch.pass;
    }
    report["pass"] = all;
    report["K"] = spec.terms;
    report["n"] = spec.system_qubits;
    report["seed"] = seed;
    emit(ctx, "_verify.json", report.dump(2) + "\n");
    return all ? ok : check_failed;
}

int cmd_fig2(const Context& ctx)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();
    const auto k = get_or<std::size_t>(cfg, "K", 4);
    const auto dim = get_or<std::size_t>(cfg, "N", 16);
    const auto grid =
        get_or<std::vector<double>>(cfg, "a", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    if (!is_power_of_two(k) || k < 2) {
        throw UsageError("fig2 needs K a power of two, at least 2");
    }
    CircuitSpec spec;
    spec.terms = k;
    spec.system_qubits = qubits_of(dim);
    for (std::size_t t = 0; t < k; ++t) {
        spec.unitaries.push_back(haar_random_unitary(dim, derive_seed(seed, 0x9B, t)));
    }
    const ComplexVector psi = config_psi(cfg, dim, seed);

    std::string text = io::comment_header("fig2", cfg, {{"seed", seed}});
    text += "a,p00_sim,p00_analytic,p0any_sim,p_std_analytic\n";
    for (double a : grid) {
        std::vector<double> alpha(k, 1.0);
        for (std::size_t t = k / 2; t < k; ++t) {
            alpha[t] = a;
        }
        spec.weights = scale_coefficients(alpha).beta;
        const SuccessProbabilities sp = success_probabilities(spec, psi, alpha);
        const double p00_sim = output_states(spec, psi).probability(0, 0);
        text += num(a) + "," + io::format_real(p00_sim) + "," + io::format_real(sp.p00) + "," +
                io::format_real(sp.p0_any) + "," + io::format_real(sp.p_std) + "\n";
    }
    emit(ctx, "_fig2.csv", text);
    return ok;
}

int cmd_fig3(const Context& ctx)
{
    return run_sweep_command(ctx, SweepAxis::fraction, "fig3");
}

int cmd_fig4(const Context& ctx)
{
    return run_sweep_command(ctx, SweepAxis::sigma, "fig4");
}

int cmd_trapdoor_keygen(const Context& ctx)
{
    const json& c = ctx.config;
    const auto k = get_or<std::size_t>(c, "K", 4);
    Scheme scheme;
    try {
        scheme = parse_scheme(get_or<std::string>(c, "scheme", "hadamard"));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!is_power_of_two(k)) {
        throw UsageError("K must be a power of two");
    }
    const SecretKey key = keygen(k, scheme, ctx.effective_seed());
    emit(ctx, "_key.json", io::key_to_json(key).dump(2) + "\n");
    return ok;
}

int cmd_trapdoor_eval(const Context& ctx)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();
    const PublicParams pub = load_public(ctx);
    const SecretKey key = load_key(ctx);
    if (key.scheme != pub.scheme) {
        throw UsageError("key scheme does not match the public scheme");
    }
    const ComplexVector psi = config_psi(cfg, pub.dim(), seed);
    const auto shots = get_or<std::uint64_t>(cfg, "shots", 0);
    const std::uint64_t shot_seed = derive_seed(seed, 0x5407, 0);
    const EvalOutput outp = eval_trapdoor(key, pub, psi, shots, shot_seed);

    std::ostringstream body;
    io::write_real_matrix_csv(body, outp.magnitudes);
    emit(ctx, "_magnitudes.csv",
         io::comment_header("trapdoor eval", cfg, {{"seed", seed}, {"shots", shots}}) + body.str());
    if (get_or<bool>(cfg, "amplitudes", false)) {
        std::ostringstream amp;
        io::write_matrix_csv(amp, output_matrix(build_circuit(key, pub), psi).phi);
        emit(ctx, "_phi.csv", io::comment_header("trapdoor eval amplitudes", cfg, {{"seed", seed}}) + amp.str());
    }
    return ok;
}

int cmd_trapdoor_invert(const Context& ctx)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();
    const PublicParams pub = load_public(ctx);
    const SecretKey key = load_key(ctx);
    if (key.scheme != pub.scheme) {
        throw UsageError("key scheme does not match the public scheme");
    }
    const ComplexVector psi = config_psi(cfg, pub.dim(), seed);
    ComplexMatrix phi;
    bool psi_known = true;
    if (cfg.contains("phi")) {
        std::ifstream in(ctx.resolve(cfg.at("phi").get<std::string>()));
        if (!in) {
            throw UsageError("cannot open Phi file");
        }
        phi = io::read_matrix_csv(in);
        psi_known = cfg.contains("psi_seed");
    } else {
        phi = output_matrix(build_circuit(key, pub), psi).phi;
    }
    if (phi.rows() != static_cast<Eigen::Index>(2 * pub.terms) ||
        phi.cols() != static_cast<Eigen::Index>(pub.dim())) {
        throw UsageError("Phi must be 2K x N");
    }

    Inversion inv;
    if (cfg.contains("mask")) {
        const MaskMode mode = mask_mode_from_json(cfg.at("mask"), pub.terms);
        const ObservationMask mask = make_mask(static_cast<std::size_t>(phi.rows()),
                                               static_cast<std::size_t>(phi.cols()), mode,
                                               derive_seed(seed, 0x3A5C, 0));
        const ObservedEntries obs =
            observe(phi, mask, get_or<double>(cfg, "sigma", 0.0), derive_seed(seed, 0x9015E, 0));
        inv = invert_with_key(key, pub, obs);
    } else {
        inv = invert_with_key(key, pub, phi);
    }
    const double err = psi_known ? target_error(key, pub, psi, inv.target)
                                 : std::numeric_limits<double>::quiet_NaN();

    const std::string header = io::comment_header("trapdoor invert", cfg, {{"seed", seed}});
    emit(ctx, "_target.csv", header + vector_csv(inv.target, "target"));
    emit(ctx, "_invert.csv",
         header + "target_error,underdetermined_columns\n" + num(err) + "," +
             std::to_string(inv.underdetermined_columns.size()) + "\n");
    return ok;
}

int cmd_trapdoor_attack(const Context& ctx)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();
    const PublicParams pub = load_public(ctx);
    if (pub.scheme != Scheme::hadamard) {
        throw UsageError("attacks target the public Hadamard scheme");
    }
    const std::string method = get_or<std::string>(cfg, "method", "hadamard");
    const std::string kind = get_or<std::string>(cfg, "input_kind", "amplitudes");
    if (!cfg.contains("input")) {
        throw UsageError("attack needs \"input\": a Phi CSV (amplitudes) or magnitudes CSV");
    }
    std::ifstream in(ctx.resolve(cfg.at("input").get<std::string>()));
    if (!in) {
        throw UsageError("cannot open attack input");
    }
    ComplexMatrix phi;
    RealMatrix p;
    if (kind == "amplitudes") {
        phi = io::read_matrix_csv(in);
        p = phi.cwiseAbs2();
    } else if (kind == "magnitudes") {
        p = io::read_real_matrix_csv(in);
        phi = p.cwiseSqrt().cast<Complex>();
    } else {
        throw UsageError("input_kind must be amplitudes or magnitudes");
    }
    if (phi.rows() != static_cast<Eigen::Index>(2 * pub.terms) ||
        phi.cols() != static_cast<Eigen::Index>(pub.dim())) {
        throw UsageError("attack input must be 2K x N");
    }
    std::optional<SecretKey> truth;
    if (cfg.contains("key")) {
        truth = load_key(ctx);
    }

    std::vector<double> weights;
    std::vector<double> residuals;
    double residual = 0.0;
    bool success = false;
    if (method == "hadamard") {
        const AttackResult r = hadamard_attack(phi, pub);
        weights = r.weights;
        residuals = r.row_residuals;
        residual = r.residual;
        success = r.success;
    } else if (method == "phase_retrieval") {
        PhaseRetrievalOptions o;
        o.restarts = get_or<std::size_t>(cfg, "restarts", 20);
        o.iters = get_or<std::size_t>(cfg, "iters", 2000);
        o.seed = derive_seed(seed, 0xA77AC, 0);
        if (get_or<bool>(cfg, "adversary_knows_psi", false)) {
            o.known_psi = config_psi(cfg, pub.dim(), seed);
        }
        const PhaseRetrievalResult r = phase_retrieval_attack(EvalOutput{p, 0}, pub, o);
        weights = r.weights;
        residuals.assign(weights.size(), r.residual);
        residual = r.residual;
        success = r.residual < 1e-8;
    } else {
        throw UsageError("method must be hadamard or phase_retrieval");
    }

    double max_err = std::numeric_limits<double>::quiet_NaN();
    std::string rows = "t,weight_hat,row_residual,weight_true,abs_error\n";
    for (std::size_t t = 0; t < weights.size(); ++t) {
        double w_true = std::numeric_limits<double>::quiet_NaN();
        double err = std::numeric_limits<double>::quiet_NaN();
        if (truth) {
            w_true = truth->weights.at(t);
            err = std::isnan(weights[t]) ? std::numeric_limits<double>::infinity()
                                         : std::abs(weights[t] - w_true);
            max_err = std::isnan(max_err) ? err : std::max(max_err, err);
        }
        rows += std::to_string(t) + "," + num(weights[t]) + "," + num(residuals[t]) + "," + num(w_true) +
                "," + num(err) + "\n";
    }
    const std::string header = io::comment_header("trapdoor attack", cfg, {{"seed", seed}});
    emit(ctx, "_attack.csv", header + rows);
    emit(ctx, "_attack_summary.csv",
         header + "method,input_kind,max_residual,max_abs_error,success\n" + method + "," + kind + "," +
             num(residual) + "," + num(max_err) + "," + (success ? "true" : "false") + "\n");
    return ok;
}

int cmd_trapdoor_demo_involution(const Context& ctx)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();
    const auto k = get_or<std::size_t>(cfg, "K", 4);
    const auto n = get_or<std::size_t>(cfg, "n", 3);
    const auto instances = get_or<std::size_t>(cfg, "instances", 10);
    const std::string kind = get_or<std::string>(cfg, "unitaries", "pauli_strings");
    if (kind != "pauli_strings" && kind != "permutation") {
        throw UsageError("demo-involution unitaries must be pauli_strings or permutation");
    }
    if (!is_power_of_two(k)) {
        throw UsageError("K must be a power of two");
    }

    std::string text = io::comment_header("trapdoor demo-involution", cfg, {{"seed", seed}});
    text += "instance,fidelity_key1,fidelity_key2,fidelity_cross,closed_form_cross,key_cancel\n";
    for (std::size_t i = 0; i < instances; ++i) {
        const std::uint64_t base = derive_seed(seed, 0x1D, i);
        PublicParams pub;
        pub.terms = k;
        pub.system_qubits = n;
        pub.unitaries = random_involutions(k, n, derive_seed(base, 1, 0), kind == "permutation");
        const SecretKey key1 = keygen(k, Scheme::hadamard, derive_seed(base, 2, 0));
        const SecretKey key2 = keygen(k, Scheme::hadamard, derive_seed(base, 3, 0));
        const ComplexVector psi = random_state(pub.dim(), derive_seed(base, 4, 0));
        const double f1 = involution_encrypt_decrypt(pub, psi, key1, key1);
        const double f2 = involution_encrypt_decrypt(pub, psi, key2, key2);
        const double fx = involution_encrypt_decrypt(pub, psi, key1, key2);
        const double closed = involution_fidelity_closed_form(key1.weights, key2.weights);
        const InvolutionResiduals inv = involution_check(build_circuit(key1, pub), build_circuit(key2, pub));
        text += std::to_string(i) + "," + io::format_real(f1) + "," + io::format_real(f2) + "," +
                io::format_real(fx) + "," + io::format_real(closed) + "," + num(inv.key_cancel) + "\n";
    }
    emit(ctx, "_involution.csv", text);
    return ok;
}

int cmd_complete(const Context& ctx, const std::string& method)
{
    const json cfg = ctx.effective_config();
    const std::uint64_t seed = ctx.effective_seed();

    ComplexMatrix truth;
    std::optional<CoefficientMatrix> coeffs;
    std::size_t rank = get_or<std::size_t>(cfg, "rank", 0);
    if (cfg.contains("matrix")) {
        std::ifstream in(ctx.resolve(cfg.at("matrix").get<std::string>()));
        if (!in) {
            throw UsageError("cannot open matrix file");
        }
        truth = io::read_matrix_csv(in);
        if (cfg.contains("coefficients")) {
            std::ifstream cin(ctx.resolve(cfg.at("coefficients").get<std::string>()));
            if (!cin) {
                throw UsageError("cannot open coefficient file");
            }
            coeffs = CoefficientMatrix{io::read_matrix_csv(cin)};
        }
    } else {
        const json inst = cfg.value("instance", json::object());
        const auto k = get_or<std::size_t>(inst, "K", 4);
        const auto dim = get_or<std::size_t>(inst, "N", 256);
        if (!is_power_of_two(k)) {
            throw UsageError("K must be a power of two");
        }
        const SweepInstance si =
            sweep_instance(k, qubits_of(dim), get_or<std::uint64_t>(inst, "seed", seed),
                           get_or<std::size_t>(inst, "index", 0));
        truth = si.phi;
        coeffs = si.c;
        if (rank == 0) {
            rank = k;
        }
    }
    if (rank == 0) {
        rank = coeffs ? static_cast<std::size_t>(coeffs->c.cols()) : 0;
    }
    if (method != "factorized" && rank == 0) {
        throw UsageError("config needs \"rank\"");
    }

    const std::size_t terms = coeffs ? static_cast<std::size_t>(coeffs->c.cols()) : rank;
    const MaskMode mode = mask_mode_from_json(cfg.value("mask", json::object()), terms);
    const ObservationMask mask = make_mask(static_cast<std::size_t>(truth.rows()),
                                           static_cast<std::size_t>(truth.cols()), mode,
                                           derive_seed(seed, 0x3A5C, 0));
    const ObservedEntries obs =
        observe(truth, mask, get_or<double>(cfg, "sigma", 0.0), derive_seed(seed, 0x9015E, 0));

    RecoveryReport report;
    if (method == "svp") {
        SvpOptions o;
        o.rank = rank;
        o.max_iters = get_or<std::size_t>(cfg, "max_iters", o.max_iters);
        o.tol = get_or<double>(cfg, "tol", o.tol);
        if (cfg.contains("step")) {
            o.step = get_or<double>(cfg, "step", 1.0);
        }
        report = svp_complete(obs, o);
    } else if (method == "als") {
        AlsOptions o;
        o.rank = rank;
        o.max_iters = get_or<std::size_t>(cfg, "max_iters", o.max_iters);
        o.tol = get_or<double>(cfg, "tol", o.tol);
        o.ridge = get_or<double>(cfg, "ridge", o.ridge);
        o.seed = derive_seed(seed, 0xA15, 0);
        report = als_complete(obs, o);
    } else if (method == "factorized") {
        if (!coeffs) {
            throw UsageError("factorized completion needs \"coefficients\" or an \"instance\"");
        }
        std::optional<double> ridge;
        if (cfg.contains("ridge")) {
            ridge = get_or<double>(cfg, "ridge", 0.0);
        }
        report = factorized_complete(*coeffs, obs, ridge);
    } else {
        throw UsageError("unknown completion method '" + method + "'");
    }
    score(report, truth);

    const std::string header = io::comment_header("complete " + method, cfg, {{"seed", seed}});
    std::ostringstream body;
    io::write_matrix_csv(body, report.phi_hat);
    emit(ctx, "_phi_hat.csv", header + body.str());
    emit(ctx, "_complete.csv",
         header +
             "method,observed,iterations,converged,observed_residual,rel_error_phi,rel_error_target,"
             "underdetermined_columns\n" +
             method + "," + std::to_string(mask.count()) + "," + std::to_string(report.iterations) + "," +
             (report.converged ? "true" : "false") + "," + num(report.observed_residual) + "," +
             num(*report.rel_error_phi) + "," + num(*report.rel_error_target) + "," +
             std::to_string(report.underdetermined_columns.size()) + "\n");
    return ok;
}

int cmd_plot_script(const std::string& figure)
{
    if (figure == "fig2") {
        std::cout << R"PY(import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1], comment="#")
plt.plot(df.a, df.p00_sim, "o-", label="p00 (alternative)")
plt.plot(df.a, df.p_std_analytic, "s--", label="standard LCU")
plt.plot(df.a, df.p0any_sim, "^:", label="index 0, any rotation")
plt.xlabel("a")
plt.ylabel("success probability")
plt.legend()
plt.savefig(sys.argv[2] if len(sys.argv) > 2 else "fig2.png", dpi=150)
)PY";
        return ok;
    }
    if (figure == "fig3" || figure == "fig4") {
        const bool noise = figure == "fig4";
        std::cout << "import sys\nimport pandas as pd\nimport matplotlib.pyplot as plt\n\n"
                     "df = pd.read_csv(sys.argv[1], comment=\"#\")\n"
                     "for method, g in df.groupby(\"method\", sort=False):\n"
                     "    line, = plt.plot(g.param, g.mean_err_phi, \"-\", label=method + \" Phi\")\n"
                     "    plt.fill_between(g.param, (g.mean_err_phi - g.std_err_phi).clip(lower=1e-17),\n"
                     "                     g.mean_err_phi + g.std_err_phi, alpha=0.2, color=line.get_color())\n"
                     "    plt.plot(g.param, g.mean_err_target, \"--\", color=line.get_color(), label=method + \" target\")\n"
                     "plt.yscale(\"log\")\n"
                  << (noise ? "plt.xscale(\"log\")\nplt.xlabel(\"sigma\")\n"
                            : "plt.xlabel(\"observed fraction\")\n")
                  << "plt.ylabel(\"relative error\")\nplt.legend()\n"
                     "plt.savefig(sys.argv[2] if len(sys.argv) > 2 else \""
                  << figure << ".png\", dpi=150)\n";
        return ok;
    }
    throw UsageError("plot-script takes fig2, fig3 or fig4");
}

}  // namespace lcu::cli
