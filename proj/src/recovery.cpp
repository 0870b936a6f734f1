#include "lcu/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <exception>
#include <mutex>
#include <thread>

#include <Eigen/Cholesky>

#include "lcu/rng.hpp"

namespace lcu {

namespace {

constexpr std::uint64_t mask_stream = 0x3A5C;
constexpr std::uint64_t noise_stream = 0x9015E;
constexpr std::uint64_t als_stream = 0xA15;

double masked_norm(const ComplexMatrix& values, const ComplexMatrix& estimate, const RealMatrix& ind)
{
    return (ind.cast<Complex>().cwiseProduct(values - estimate)).norm();
}

using SmallMatrix = Eigen::MatrixXcd;

// Solves (M^dag M + lambda I) x = M^dag y. With refine > 0 the solve is
// repeated on the normal-equation residual (iterated Tikhonov): each pass
// shrinks the ridge bias on a direction with singular value s by
// lambda / (s^2 + lambda) and leaves null-space components at zero.
Eigen::VectorXcd ridge_solve(const SmallMatrix& m, const Eigen::VectorXcd& y, double lambda,
                             int refine = 0)
{
    const SmallMatrix gram0 = m.adjoint() * m;
    SmallMatrix gram = gram0;
    gram.diagonal().array() += lambda;
    const Eigen::VectorXcd rhs = m.adjoint() * y;
    Eigen::LDLT<SmallMatrix> ldlt(gram);
    Eigen::VectorXcd x = ldlt.solve(rhs);
    for (int pass = 0; pass < refine && lambda > 0.0; ++pass) {
        x += ldlt.solve(rhs - gram0 * x);
    }
    if (!x.allFinite()) {
        x.setZero();
    }
    return x;
}

double mean_of(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols, MaskMode mode)
    : rows_(rows), cols_(cols), mode_(mode), flags_(rows * cols, 0)
{
}

void ObservationMask::set(std::size_t i, std::size_t j, bool on)
{
    flags_.at(i * cols_ + j) = on ? 1 : 0;
}

std::size_t ObservationMask::count() const
{
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

std::size_t ObservationMask::column_count(std::size_t j) const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
        n += flags_[i * cols_ + j];
    }
    return n;
}

std::vector<std::pair<std::size_t, std::size_t>> ObservationMask::pairs() const
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (flags_[i * cols_ + j] != 0) {
                out.emplace_back(i, j);
            }
        }
    }
    return out;
}

double ObservationMask::density() const
{
    return flags_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(flags_.size());
}

ObservationMask make_mask(std::size_t rows, std::size_t cols, MaskMode mode, std::uint64_t seed)
{
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("make_mask: empty shape");
    }
    if (!(mode.density >= 0.0 && mode.density <= 1.0)) {
        throw std::invalid_argument("make_mask: density must lie in [0, 1]");
    }
    if (mode.kind == MaskKind::uniform && mode.density == 0.0) {
        throw std::invalid_argument("make_mask: uniform density must be positive");
    }
    if (mode.kind == MaskKind::column_guaranteed && mode.min_per_column > rows) {
        throw std::invalid_argument("make_mask: min_per_column " + std::to_string(mode.min_per_column) +
                                    " exceeds the " + std::to_string(rows) + " rows");
    }

    ObservationMask mask(rows, cols, mode);
    // One uniform per entry in row-major order; for a fixed seed the masks
    // at increasing densities are nested.
    CounterRng rng(seed, mask_stream);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (rng.uniform() < mode.density) {
                mask.set(i, j, true);
            }
        }
    }
    if (mode.kind == MaskKind::column_guaranteed) {
        CounterRng top(seed, mask_stream + 1);
        std::vector<std::size_t> free_rows;
        for (std::size_t j = 0; j < cols; ++j) {
            std::size_t have = mask.column_count(j);
            if (have >= mode.min_per_column) {
                continue;
            }
            free_rows.clear();
            for (std::size_t i = 0; i < rows; ++i) {
                if (!mask.observed(i, j)) {
                    free_rows.push_back(i);
                }
            }
            // partial Fisher-Yates
            for (std::size_t s = 0; have < mode.min_per_column; ++s, ++have) {
                const std::size_t pick = s + top.below(free_rows.size() - s);
                std::swap(free_rows[s], free_rows[pick]);
                mask.set(free_rows[s], j, true);
            }
        }
    }
    return mask;
}

RealMatrix ObservedEntries::indicator() const
{
    RealMatrix ind = RealMatrix::Zero(static_cast<Eigen::Index>(mask.rows()),
                                      static_cast<Eigen::Index>(mask.cols()));
    for (std::size_t i = 0; i < mask.rows(); ++i) {
        for (std::size_t j = 0; j < mask.cols(); ++j) {
            if (mask.observed(i, j)) {
                ind(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
            }
        }
    }
    return ind;
}

ObservedEntries observe(const ComplexMatrix& phi, const ObservationMask& mask, double sigma,
                        std::uint64_t seed)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("observe: sigma must be finite and non-negative");
    }
    if (static_cast<std::size_t>(phi.rows()) != mask.rows() ||
        static_cast<std::size_t>(phi.cols()) != mask.cols()) {
        throw std::invalid_argument("observe: mask shape does not match Phi");
    }
    require_finite(phi, "observe input");
    ObservedEntries out{mask, ComplexMatrix::Zero(phi.rows(), phi.cols()), sigma};
    CounterRng rng(seed, noise_stream);
    const double scale = sigma / std::sqrt(2.0);
    for (std::size_t i = 0; i < mask.rows(); ++i) {
        for (std::size_t j = 0; j < mask.cols(); ++j) {
            if (!mask.observed(i, j)) {
                continue;
            }
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(j);
            // Draw even when sigma = 0 so noise is common across sigma values.
            const double re = rng.gaussian();
            const double im = rng.gaussian();
            out.values(r, c) = phi(r, c) + Complex{scale * re, scale * im};
        }
    }
    return out;
}

RecoveryReport svp_complete(const ObservedEntries& obs, const SvpOptions& options)
{
    if (options.rank == 0) {
        throw std::invalid_argument("svp_complete: rank must be at least 1");
    }
    const double density = obs.mask.density();
    if (density == 0.0) {
        throw std::invalid_argument("svp_complete: no observed entries");
    }
    const double step = options.step.value_or(1.0 / density);
    if (!(step > 0.0)) {
        throw std::invalid_argument("svp_complete: step must be positive");
    }

    const RealMatrix ind = obs.indicator();
    const ComplexMatrix ind_c = ind.cast<Complex>();
    const double obs_norm = obs.values.norm();

    RecoveryReport report;
    report.phi_hat = ComplexMatrix::Zero(obs.values.rows(), obs.values.cols());
    if (obs_norm == 0.0) {
        report.converged = true;
        return report;
    }

    ComplexMatrix x = report.phi_hat;
    double residual = obs_norm;
    for (std::size_t it = 0; it < options.max_iters; ++it) {
        const ComplexMatrix grad = ind_c.cwiseProduct(obs.values - x);
        double mu = step;
        bool accepted = false;
        ComplexMatrix next;
        double next_residual = residual;
        for (int halving = 0; halving < 30; ++halving, mu *= 0.5) {
            next = svd(x + mu * grad).truncated(options.rank);
            next_residual = masked_norm(obs.values, next, ind);
            if (next_residual <= residual) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            report.converged = true;  // stalled: no step lowers the residual
            break;
        }
        const double change = (residual - next_residual) / residual;
        x = std::move(next);
        residual = next_residual;
        report.iterations = it + 1;
        if (residual <= 1e-15 * obs_norm || change < options.tol) {
            report.converged = true;
            break;
        }
    }
    report.phi_hat = std::move(x);
    report.observed_residual = residual / obs_norm;
    return report;
}

RecoveryReport als_complete(const ObservedEntries& obs, const AlsOptions& options)
{
    if (options.rank == 0) {
        throw std::invalid_argument("als_complete: rank must be at least 1");
    }
    if (!(options.ridge >= 0.0)) {
        throw std::invalid_argument("als_complete: ridge must be non-negative");
    }
    const std::size_t count = obs.mask.count();
    if (count == 0) {
        throw std::invalid_argument("als_complete: no observed entries");
    }
    const auto rows = static_cast<Eigen::Index>(obs.mask.rows());
    const auto cols = static_cast<Eigen::Index>(obs.mask.cols());
    const auto k = static_cast<Eigen::Index>(options.rank);

    std::vector<std::vector<Eigen::Index>> row_obs(static_cast<std::size_t>(rows));
    std::vector<std::vector<Eigen::Index>> col_obs(static_cast<std::size_t>(cols));
    for (const auto& [i, j] : obs.mask.pairs()) {
        row_obs[i].push_back(static_cast<Eigen::Index>(j));
        col_obs[j].push_back(static_cast<Eigen::Index>(i));
    }

    const RealMatrix ind = obs.indicator();
    const double obs_norm = obs.values.norm();
    const double scale = obs_norm / std::sqrt(static_cast<double>(count));

    CounterRng rng(options.seed, als_stream);
    SmallMatrix a(rows, k);
    SmallMatrix b(cols, k);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index l = 0; l < k; ++l) {
            a(i, l) = scale * rng.complex_gaussian();
        }
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index l = 0; l < k; ++l) {
            b(j, l) = rng.complex_gaussian();
        }
    }

    RecoveryReport report;
    double residual = obs_norm;
    ComplexMatrix estimate;
    for (std::size_t it = 0; it < options.max_iters; ++it) {
        // Phi_ij = a_i . conj(b_j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto& js = row_obs[static_cast<std::size_t>(i)];
            SmallMatrix m(static_cast<Eigen::Index>(js.size()), k);
            Eigen::VectorXcd y(static_cast<Eigen::Index>(js.size()));
            for (std::size_t s = 0; s < js.size(); ++s) {
                m.row(static_cast<Eigen::Index>(s)) = b.row(js[s]).conjugate();
                y(static_cast<Eigen::Index>(s)) = obs.values(i, js[s]);
            }
            a.row(i) = ridge_solve(m, y, options.ridge).transpose();
        }
        // conj(Phi_ij) = conj(a_i) . b_j
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto& is = col_obs[static_cast<std::size_t>(j)];
            SmallMatrix m(static_cast<Eigen::Index>(is.size()), k);
            Eigen::VectorXcd y(static_cast<Eigen::Index>(is.size()));
            for (std::size_t s = 0; s < is.size(); ++s) {
                m.row(static_cast<Eigen::Index>(s)) = a.row(is[s]).conjugate();
                y(static_cast<Eigen::Index>(s)) = std::conj(obs.values(is[s], j));
            }
            b.row(j) = ridge_solve(m, y, options.ridge).transpose();
        }
        estimate = a * b.adjoint();
        const double next = masked_norm(obs.values, estimate, ind);
        report.iterations = it + 1;
        const double change = residual > 0.0 ? std::abs(residual - next) / residual : 0.0;
        residual = next;
        if (obs_norm == 0.0 || residual <= 1e-15 * obs_norm || change < options.tol) {
            report.converged = true;
            break;
        }
    }
    report.phi_hat = estimate;
    report.observed_residual = obs_norm > 0.0 ? residual / obs_norm : 0.0;
    return report;
}

constexpr int factorized_refine_passes = 4;

std::pair<RecoveryReport, RowMatrix> factorized_solve(const CoefficientMatrix& c,
                                                      const ObservedEntries& obs,
                                                      std::optional<double> ridge)
{
    if (ridge && !(*ridge >= 0.0)) {
        throw std::invalid_argument("factorized_complete: ridge must be non-negative");
    }
    const auto rows = c.c.rows();
    const auto k = c.c.cols();
    if (static_cast<std::size_t>(rows) != obs.mask.rows()) {
        throw std::invalid_argument("factorized_complete: C has " + std::to_string(rows) +
                                    " rows, observations have " + std::to_string(obs.mask.rows()));
    }
    const auto cols = static_cast<Eigen::Index>(obs.mask.cols());

    RecoveryReport report;
    RowMatrix x;
    x.x = ComplexMatrix::Zero(k, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        std::vector<Eigen::Index> seen;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (obs.mask.observed(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
                seen.push_back(i);
            }
        }
        if (static_cast<Eigen::Index>(seen.size()) < k) {
            report.underdetermined_columns.push_back(static_cast<std::size_t>(j));
        }
        if (seen.empty()) {
            continue;
        }
        SmallMatrix m(static_cast<Eigen::Index>(seen.size()), k);
        Eigen::VectorXcd y(static_cast<Eigen::Index>(seen.size()));
        for (std::size_t s = 0; s < seen.size(); ++s) {
            m.row(static_cast<Eigen::Index>(s)) = c.c.row(seen[s]);
            y(static_cast<Eigen::Index>(s)) = obs.values(seen[s], j);
        }
        const double lambda =
            ridge.value_or(1e-10 * m.squaredNorm() / static_cast<double>(k));
        x.x.col(j) = ridge_solve(m, y, lambda, factorized_refine_passes);
    }
    if (report.underdetermined_columns.size() == static_cast<std::size_t>(cols)) {
        throw std::runtime_error("factorized_complete: every column has fewer than " +
                                 std::to_string(k) + " observations");
    }
    report.phi_hat = c.c * x.x;
    report.iterations = 1;
    report.converged = report.underdetermined_columns.empty();
    const double obs_norm = obs.values.norm();
    report.observed_residual =
        obs_norm > 0.0 ? masked_norm(obs.values, report.phi_hat, obs.indicator()) / obs_norm : 0.0;
    return {std::move(report), std::move(x)};
}

RecoveryReport factorized_complete(const CoefficientMatrix& c, const ObservedEntries& obs,
                                   std::optional<double> ridge)
{
    return factorized_solve(c, obs, ridge).first;
}

RecoveryErrors recovery_errors(const ComplexMatrix& phi_hat, const ComplexMatrix& phi_true)
{
    if (phi_hat.rows() != phi_true.rows() || phi_hat.cols() != phi_true.cols()) {
        throw std::invalid_argument("recovery_errors: shape mismatch");
    }
    const double norm = phi_true.norm();
    const double row_norm = phi_true.row(0).norm();
    if (norm == 0.0 || row_norm == 0.0) {
        throw std::invalid_argument("recovery_errors: reference has zero norm");
    }
    return {(phi_hat - phi_true).norm() / norm, (phi_hat.row(0) - phi_true.row(0)).norm() / row_norm};
}

void score(RecoveryReport& report, const ComplexMatrix& phi_true)
{
    const RecoveryErrors e = recovery_errors(report.phi_hat, phi_true);
    report.rel_error_phi = e.phi;
    report.rel_error_target = e.target;
}

SweepInstance sweep_instance(std::size_t terms, std::size_t system_qubits, std::uint64_t seed,
                             std::size_t index)
{
    const std::uint64_t base = derive_seed(seed, 0x1257, index);
    SweepInstance inst;
    inst.spec.terms = terms;
    inst.spec.system_qubits = system_qubits;
    CounterRng wrng(base, 0x3E16);
    for (std::size_t t = 0; t < terms; ++t) {
        inst.spec.weights.push_back(wrng.uniform(0.1, 1.0));
        inst.spec.unitaries.push_back(
            haar_random_unitary(inst.spec.dim(), derive_seed(base, 0x0417, t)));
    }
    inst.psi = random_state(inst.spec.dim(), derive_seed(base, 0x5171, 0));
    inst.phi = output_matrix(inst.spec, inst.psi).phi;
    inst.c = coefficient_matrix(inst.spec);
    return inst;
}

const char* const sweep_csv_header =
    "method,param,mean_err_phi,std_err_phi,mean_err_target,std_err_target,mean_iters,seconds";

std::string sweep_csv_line(const SweepRow& row)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.9e,%.9e,%.9e,%.9e,%.4f,%.3f", row.method.c_str(),
                  row.param, row.mean_err_phi, row.std_err_phi, row.mean_err_target,
                  row.std_err_target, row.mean_iters, row.seconds);
    return buf;
}

std::vector<SweepRow> sweep(const SweepConfig& config)
{
    if (config.grid.empty()) {
        throw std::invalid_argument("sweep: empty grid");
    }
    if (config.instances == 0 || config.realizations == 0) {
        throw std::invalid_argument("sweep: instances and realizations must be positive");
    }
    for (const auto& m : config.methods) {
        if (m != "svp" && m != "als" && m != "factorized") {
            throw std::invalid_argument("sweep: unknown method '" + m + "'");
        }
    }
    if (config.methods.empty()) {
        throw std::invalid_argument("sweep: no methods");
    }

    std::vector<SweepInstance> instances;
    for (std::size_t i = 0; i < config.instances; ++i) {
        instances.push_back(sweep_instance(config.terms, config.system_qubits, config.seed, i));
    }
    const std::size_t rows = 2 * config.terms;
    const std::size_t cols = instances.front().spec.dim();

    struct CellResult
    {
        std::vector<double> err_phi, err_target, iters, seconds;
    };
    const std::size_t per_point = config.instances * config.realizations;
    const std::size_t n_cells = config.grid.size() * per_point;
    std::vector<CellResult> results(n_cells);

    auto run_cell = [&](std::size_t cell) {
        const std::size_t g = cell / per_point;
        const std::size_t inst_index = (cell % per_point) / config.realizations;
        const std::size_t real_index = cell % config.realizations;
        const double value = config.grid[g];
        const double fraction = config.axis == SweepAxis::fraction ? value : config.fixed_fraction;
        const double sigma = config.axis == SweepAxis::sigma ? value : config.fixed_sigma;
        const SweepInstance& inst = instances[inst_index];

        // Mask and noise seeds depend only on (instance, realization), so
        // masks are nested along the fraction axis and noise is common along
        // the sigma axis.
        const std::uint64_t cell_seed = derive_seed(config.seed, inst_index, real_index);
        const ObservationMask mask =
            make_mask(rows, cols, MaskMode::uniform(fraction), derive_seed(cell_seed, 1, 0));
        const ObservedEntries obs = observe(inst.phi, mask, sigma, derive_seed(cell_seed, 2, 0));

        CellResult& out = results[cell];
        for (const auto& method : config.methods) {
            const auto start = std::chrono::steady_clock::now();
            RecoveryReport report;
            if (method == "svp") {
                SvpOptions o = config.svp;
                o.rank = config.terms;
                report = svp_complete(obs, o);
            } else if (method == "als") {
                AlsOptions o = config.als;
                o.rank = config.terms;
                o.seed = derive_seed(cell_seed, 3, 0);
                report = als_complete(obs, o);
            } else {
                try {
                    report = factorized_complete(inst.c, obs, config.ridge);
                } catch (const std::runtime_error&) {
                    report.phi_hat = ComplexMatrix::Zero(inst.phi.rows(), inst.phi.cols());
                }
            }
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const RecoveryErrors e = recovery_errors(report.phi_hat, inst.phi);
            out.err_phi.push_back(e.phi);
            out.err_target.push_back(e.target);
            out.iters.push_back(static_cast<double>(report.iterations));
            out.seconds.push_back(config.timing ? elapsed : 0.0);
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, n_cells));
    if (threads == 1) {
        for (std::size_t cell = 0; cell < n_cells; ++cell) {
            run_cell(cell);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_lock;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t cell = next++; cell < n_cells; cell = next++) {
                    try {
                        run_cell(cell);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_lock);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    std::vector<SweepRow> table;
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            std::vector<double> ep, et, it;
            double seconds = 0.0;
            for (std::size_t c = g * per_point; c < (g + 1) * per_point; ++c) {
                ep.push_back(results[c].err_phi[m]);
                et.push_back(results[c].err_target[m]);
                it.push_back(results[c].iters[m]);
                seconds += results[c].seconds[m];
            }
            table.push_back({config.methods[m], config.grid[g], mean_of(ep), std_of(ep), mean_of(et),
                             std_of(et), mean_of(it), seconds});
        }
    }
    return table;
}

}  // namespace lcu
