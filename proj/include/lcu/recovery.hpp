#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcu/output_matrix.hpp"

namespace lcu {

enum class MaskKind { uniform, column_guaranteed };

struct MaskMode
{
    MaskKind kind = MaskKind::uniform;
    double density = 1.0;            // Bernoulli probability per entry
    std::size_t min_per_column = 0;  // column_guaranteed only

    static MaskMode uniform(double density) { return {MaskKind::uniform, density, 0}; }
    // Bernoulli(density) first, then each short column is topped up with
    // randomly chosen rows. density = 0 gives exactly min_per_column per column.
    static MaskMode column_guaranteed(std::size_t min_per_column, double density = 0.0)
    {
        return {MaskKind::column_guaranteed, density, min_per_column};
    }
};

class ObservationMask
{
public:
    ObservationMask(std::size_t rows, std::size_t cols, MaskMode mode);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const MaskMode& mode() const noexcept { return mode_; }

    bool observed(std::size_t i, std::size_t j) const { return flags_.at(i * cols_ + j) != 0; }
    void set(std::size_t i, std::size_t j, bool on);
    std::size_t count() const;
    std::size_t column_count(std::size_t j) const;
    /// Observed (row, col) pairs in row-major order.
    std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
    double density() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    MaskMode mode_;
    std::vector<std::uint8_t> flags_;
};

ObservationMask make_mask(std::size_t rows, std::size_t cols, MaskMode mode, std::uint64_t seed);

struct ObservedEntries
{
    ObservationMask mask;
    ComplexMatrix values;  // unobserved entries are zero
    double noise_sigma = 0.0;

    /// Dense matrix holding 1 at observed entries.
    RealMatrix indicator() const;
};

/// value = Phi_ij + eta, eta complex Gaussian with E|eta|^2 = sigma^2.
ObservedEntries observe(const ComplexMatrix& phi, const ObservationMask& mask, double sigma,
                        std::uint64_t seed);

struct RecoveryReport
{
    ComplexMatrix phi_hat;
    std::optional<double> rel_error_phi;
    std::optional<double> rel_error_target;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<std::size_t> underdetermined_columns;
    /// ||P_Omega(obs - Phi_hat)||_F / ||P_Omega(obs)||_F
    double observed_residual = 0.0;
};

struct SvpOptions
{
    std::size_t rank = 1;
    std::optional<double> step;  // default 1 / observed density
    std::size_t max_iters = 500;
    double tol = 1e-12;
};

/// Singular value projection: gradient step on the observed entries, then
/// rank truncation. The step is halved whenever it would raise the
/// observed residual, so accepted iterates are monotone.
RecoveryReport svp_complete(const ObservedEntries& obs, const SvpOptions& options);

struct AlsOptions
{
    std::size_t rank = 1;
    std::size_t max_iters = 200;
    double tol = 1e-12;
    double ridge = 1e-12;
    std::uint64_t seed = 0;
};

/// Phi ~ A B^dagger, alternating ridge least squares over observed entries.
RecoveryReport als_complete(const ObservedEntries& obs, const AlsOptions& options);

/// Per column j: (C_o^dag C_o + lambda I) x_j = C_o^dag phi_j over the
/// observed rows, Phi_hat = C X_hat. With no ridge given, lambda is
/// 1e-10 trace(C_o^dag C_o) / K per column. A few refinement passes on the
/// normal-equation residual take the ridge bias back out of determined but
/// badly conditioned columns.
RecoveryReport factorized_complete(const CoefficientMatrix& c, const ObservedEntries& obs,
                                   std::optional<double> ridge = std::nullopt);

/// Same solve, also returning X_hat.
std::pair<RecoveryReport, RowMatrix> factorized_solve(const CoefficientMatrix& c,
                                                      const ObservedEntries& obs,
                                                      std::optional<double> ridge = std::nullopt);

struct RecoveryErrors
{
    double phi = 0.0;
    double target = 0.0;  // row (0,0), i.e. T psi / (K c)
};

RecoveryErrors recovery_errors(const ComplexMatrix& phi_hat, const ComplexMatrix& phi_true);

/// Fills the report's error fields.
void score(RecoveryReport& report, const ComplexMatrix& phi_true);

// Sweep harness.

enum class SweepAxis { fraction, sigma };

struct SweepConfig
{
    std::size_t terms = 4;
    std::size_t system_qubits = 8;
    std::vector<std::string> methods{"svp", "factorized"};
    SweepAxis axis = SweepAxis::fraction;
    std::vector<double> grid;
    double fixed_fraction = 0.7;  // used on the sigma axis
    double fixed_sigma = 0.0;     // used on the fraction axis
    std::size_t instances = 10;
    std::size_t realizations = 5;
    std::uint64_t seed = 0;
    SvpOptions svp;
    AlsOptions als;
    std::optional<double> ridge;
    bool timing = false;
    std::size_t threads = 1;
};

struct SweepRow
{
    std::string method;
    double param = 0.0;
    double mean_err_phi = 0.0;
    double std_err_phi = 0.0;
    double mean_err_target = 0.0;
    double std_err_target = 0.0;
    double mean_iters = 0.0;
    double seconds = 0.0;
};

/// Rows ordered by grid point, then by method in config order.
std::vector<SweepRow> sweep(const SweepConfig& config);

extern const char* const sweep_csv_header;
std::string sweep_csv_line(const SweepRow& row);

/// The random instance used for sweep instance `index`: Haar U_t, random psi,
/// weights uniform in [0.1, 1], Hadamard mixing, reflection variant.
struct SweepInstance
{
    CircuitSpec spec;
    ComplexVector psi;
    ComplexMatrix phi;
    CoefficientMatrix c;
};

SweepInstance sweep_instance(std::size_t terms, std::size_t system_qubits, std::uint64_t seed,
                             std::size_t index);

}  // namespace lcu
