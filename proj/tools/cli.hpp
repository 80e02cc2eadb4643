#pragma once

#include "proxfwi/denoise.hpp"
#include "proxfwi/errors.hpp"
#include "proxfwi/model.hpp"
#include "proxfwi/wave.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace proxfwi::cli {

/// Bad flags or malformed run configuration (exit code 2).
class UsageError : public Error {
  public:
    using Error::Error;
};

enum ExitCode : int { ok = 0, usage = 2, data = 3, numerical = 4 };

/// Runs one command line; exceptions are reported on stderr and mapped to exit codes.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

// --- denoiser specifications ----------------------------------------------------------

/// Parses "identity", "l1[:w]", "l2sq[:w]", "tv[:w[:iters]]",
/// "nlm[:h[:sigma[:patch[:search]]]]" or "external:<template>".
/// External templates see the grid spacing of the field they denoise.
Denoiser parse_denoiser(const std::string& spec, double dz = 1.0, double dx = 1.0);

/// Denoiser that runs `command_template` through the shell once per call.
/// {in} and {out} become quoted temporary grid files and {scale} the prox
/// scale printed with 17 significant digits.
Denoiser external_denoiser(std::string command_template, double dz, double dx);

// --- inversion run configuration ---------------------------------------------------------

struct RunConfig {
    std::filesystem::path data;
    std::filesystem::path noise;      ///< optional; its norm is the discrepancy level
    std::filesystem::path start_model;
    std::filesystem::path true_model; ///< optional; enables the RMSE summary
    std::filesystem::path output_dir = "out";

    int sources = 5;
    int source_depth = 2;
    int receiver_inset = 2;
    int receiver_step = 2;
    double f_peak = 10.0;
    wave::PmlSpec pml;

    std::vector<std::vector<double>> batches; ///< one batch of all frequencies unless set
    int paths = 1;

    std::string method = "irwri";    ///< fwi | irwri
    std::string algorithm = "nadmm"; ///< nista | nadmm
    std::string hessian;             ///< empty: lbfgs for fwi, exact for irwri
    std::string denoiser = "identity";
    double lambda = 0.0;
    std::optional<double> mu;
    double mu_factor = 1e-2;
    bool refine_data = false;

    std::string c_rule = "spectral";
    double c_safety = 0.9;
    double c_fixed = 1.0;
    int max_iter = 70;
    int inner_iter = 100;
    std::string stopping = "max-iter"; ///< max-iter | data-residual
    double discrepancy = 1.01;
    double step_tol = 0.0;
    bool admm_start_at_m0 = true;
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<double> frequencies() const;
    /// Every key with its effective value, in file order of the keys.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> resolved() const;
};

/// key = value lines; '#' starts a comment. Relative paths are taken
/// relative to `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// --- manifests ---------------------------------------------------------------------------

std::string sha256_hex(const void* bytes, std::size_t size);
std::string sha256_file(const std::filesystem::path& path);

/// Line-oriented key=value run record.
class Manifest {
  public:
    explicit Manifest(std::string command);

    void set(const std::string& key, const std::string& value);
    void input(const std::string& name, const std::filesystem::path& path);
    void output(const std::string& name, const std::filesystem::path& path);
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept
    {
        return entries_;
    }
    /// Writes to a sibling temporary file and renames it into place.
    void write(const std::filesystem::path& path) const;

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path);

// --- previews ----------------------------------------------------------------------------

/// Binary 8-bit PGM of `values` (nz rows of nx), mapping [vmin, vmax]
/// linearly onto [0, 255] with rounding and clamping.
std::string pgm_bytes(const Eigen::VectorXd& values, int nz, int nx, double vmin, double vmax);

} // namespace proxfwi::cli
