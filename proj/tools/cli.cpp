#include "cli.hpp"

#include "proxfwi/inversion.hpp"
#include "proxfwi/toyproblems.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#ifndef PROXFWI_VERSION
#define PROXFWI_VERSION "0.0.0"
#endif

namespace proxfwi::cli {

namespace {

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<double> parse_frequencies(const std::string& s)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw UsageError("bad frequency list '" + s + "'");
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

class Stopwatch {
  public:
    [[nodiscard]] double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Manifest make_manifest(const std::string& command)
{
    Manifest m(command);
    m.set("tool_version", PROXFWI_VERSION);
    return m;
}

void write_text(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw FormatError("cannot write " + path.string());
    }
}

ModelGrid as_kind(const ModelGrid& g, GridKind kind) { return g.kind() == kind ? g : convert(g, kind); }

ModelGrid velocity_grid(const ModelGrid& like, const Eigen::VectorXd& m)
{
    if (!m.allFinite() || (m.array() <= 0.0).any()) {
        throw NumericalError("model left the positive squared-slowness range");
    }
    return convert(ModelGrid(like.nz(), like.nx(), like.dz(), like.dx(), GridKind::squared_slowness, m),
                   GridKind::velocity);
}

// --- rosenbrock ------------------------------------------------------------------------------

struct RosenbrockArgs {
    double lambda = 0.0;
    std::string method = "nadmm";
    std::string hessian = "exact";
    std::string c_rule;
    double c_fixed = 1.0;
    double c_safety = 0.9;
    int max_iter = 2000;
    int inner = 100;
    double step_tol = 1e-12;
    std::vector<double> start{-1.0, 1.0};
    std::string out;
};

int cmd_rosenbrock(const RosenbrockArgs& a)
{
    const auto method = optim::parse_method(a.method);
    optim::OptConfig c;
    c.lambda = a.lambda;
    c.hessian = optim::parse_hessian(a.hessian);
    c.c_rule = a.c_rule.empty() ? (method == optim::Method::nadmm ? optim::StepRule::fixed : optim::StepRule::spectral)
                                : optim::parse_step_rule(a.c_rule);
    c.c_fixed = a.c_fixed;
    c.c_safety = a.c_safety;
    c.max_outer = a.max_iter;
    c.max_inner = a.inner;
    c.step_tol = a.step_tol;
    if (a.start.size() != 2) {
        throw UsageError("--start takes two values");
    }
    const optim::Vec m0 = Eigen::Vector2d(a.start[0], a.start[1]);

    toy::RosenbrockOracle oracle;
    const Stopwatch clock;
    const auto r = optim::proximal_newton_solve(oracle, denoisers::L1{1.0}, GridShape{1, 2}, c, m0, method);
    const double elapsed = clock.seconds();
    const Eigen::Vector2d star = toy::rosenbrock_l1_argmin(a.lambda);

    std::cout << "method=" << optim::to_string(method) << " hessian=" << a.hessian << " lambda=" << a.lambda
              << " iterations=" << r.iterations << " status=" << optim::to_string(r.status) << "\n";
    std::cout << "solution=" << fmt(r.m[0]) << "," << fmt(r.m[1]) << "\n";
    std::cout << "argmin=" << fmt(star[0]) << "," << fmt(star[1]) << "\n";
    std::cout << "distance=" << short_fmt((r.m - optim::Vec(star)).norm()) << "\n";

    if (!a.out.empty()) {
        std::ofstream csv(a.out);
        if (!csv) {
            throw FormatError("cannot write " + a.out);
        }
        optim::write_history_csv(csv, r.history);
        csv.close();
        auto man = make_manifest("rosenbrock");
        man.set("lambda", fmt(a.lambda));
        man.set("method", a.method);
        man.set("hessian", a.hessian);
        man.set("iterations", std::to_string(r.iterations));
        man.set("status", optim::to_string(r.status));
        man.output("history", a.out);
        man.set("wall_clock_s", short_fmt(elapsed));
        man.write(a.out + ".manifest");
    }
    return ok;
}

// --- model-gen ------------------------------------------------------------------------------

struct ModelGenArgs {
    std::string shape = "all-four";
    int nz = 81;
    int nx = 81;
    double dz = 25.0;
    double dx = 25.0;
    double v_background = 2000.0;
    double v_inclusion = 2500.0;
    std::string kind = "velocity";
    std::string out;
};

int cmd_model_gen(const ModelGenArgs& a)
{
    const Stopwatch clock;
    ModelGrid g = a.shape == "constant"
                      ? ModelGrid::constant(a.nz, a.nx, a.dz, a.dx, GridKind::velocity, a.v_background)
                      : make_inclusion_model(parse_inclusion_shape(a.shape), a.nz, a.nx, a.dz, a.dx, a.v_background,
                                             a.v_inclusion);
    if (a.kind == "slowness" || a.kind == "squared-slowness") {
        g = as_kind(g, GridKind::squared_slowness);
    } else if (a.kind != "velocity") {
        throw UsageError("--kind must be velocity or slowness");
    }
    write_grid(g, a.out);
    auto man = make_manifest("model-gen");
    man.set("shape", a.shape);
    man.set("nz", std::to_string(a.nz));
    man.set("nx", std::to_string(a.nx));
    man.set("dz", fmt(a.dz));
    man.set("dx", fmt(a.dx));
    man.set("v_background", fmt(a.v_background));
    man.set("v_inclusion", fmt(a.v_inclusion));
    man.set("kind", to_string(g.kind()));
    man.output("model", a.out);
    man.set("wall_clock_s", short_fmt(clock.seconds()));
    man.write(a.out + ".manifest");
    return ok;
}

// --- forward ---------------------------------------------------------------------------------

struct ForwardArgs {
    std::string model;
    std::string reference;
    std::string out;
    std::string noise_out;
    std::string frequencies = "5,7,10,12.5";
    int sources = 5;
    int source_depth = 2;
    int receiver_inset = 2;
    int receiver_step = 2;
    double f_peak = 10.0;
    int pml_cells = 10;
    double pml_reflection = 1e-3;
    bool free_surface = false;
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
};

int cmd_forward(const ForwardArgs& a)
{
    const Stopwatch clock;
    const ModelGrid model = read_grid(a.model);
    const ModelGrid reference = a.reference.empty() ? model : read_grid(a.reference);
    if (reference.nz() != model.nz() || reference.nx() != model.nx() || reference.dz() != model.dz() ||
        reference.dx() != model.dx()) {
        throw GeometryError("reference grid does not match the model grid");
    }
    const auto acq = surface_sources_boundary_receivers(model.nz(), model.nx(), a.sources, a.source_depth,
                                                        a.receiver_inset, a.receiver_step,
                                                        parse_frequencies(a.frequencies));
    const wave::Helmholtz h(reference, wave::PmlSpec{a.pml_cells, a.free_surface, a.pml_reflection});
    const FreqData clean =
        wave::forward(h, as_kind(model, GridKind::squared_slowness).values(), acq, a.f_peak);
    const auto noisy = wave::add_noise(clean, a.snr_db ? *a.snr_db : wave::noiseless, a.seed);
    write_freqdata(noisy.data, a.out);
    if (!a.noise_out.empty()) {
        write_freqdata(noisy.noise, a.noise_out);
    }

    std::cout << "receivers=" << acq.receivers.size() << " sources=" << acq.sources.size()
              << " frequencies=" << acq.frequencies.size() << " noise_norm=" << fmt(noisy.noise.norm());
    if (a.snr_db) {
        std::cout << " snr_db=" << short_fmt(wave::snr_db(clean, noisy.noise));
    }
    std::cout << "\n";

    auto man = make_manifest("forward");
    man.input("model", a.model);
    if (!a.reference.empty()) {
        man.input("reference", a.reference);
    }
    man.set("frequencies", a.frequencies);
    man.set("sources", std::to_string(a.sources));
    man.set("source_depth", std::to_string(a.source_depth));
    man.set("receiver_inset", std::to_string(a.receiver_inset));
    man.set("receiver_step", std::to_string(a.receiver_step));
    man.set("f_peak", fmt(a.f_peak));
    man.set("pml_cells", std::to_string(a.pml_cells));
    man.set("pml_reflection", fmt(a.pml_reflection));
    man.set("free_surface", a.free_surface ? "true" : "false");
    man.set("snr_db", a.snr_db ? fmt(*a.snr_db) : "inf");
    man.set("seed", std::to_string(a.seed));
    man.set("noise_norm", fmt(noisy.noise.norm()));
    man.output("data", a.out);
    if (!a.noise_out.empty()) {
        man.output("noise", a.noise_out);
    }
    man.set("wall_clock_s", short_fmt(clock.seconds()));
    man.write(a.out + ".manifest");
    return ok;
}

// --- invert ----------------------------------------------------------------------------------

int cmd_invert(const std::string& config_path, const std::string& output_override)
{
    const Stopwatch clock;
    RunConfig cfg = load_run_config(config_path);
    if (!output_override.empty()) {
        cfg.output_dir = output_override;
    }
    const ModelGrid start = read_grid(cfg.start_model);
    const Eigen::VectorXd m0 = as_kind(start, GridKind::squared_slowness).values();
    const GridShape shape{start.nz(), start.nx()};

    const auto frequencies = cfg.frequencies();
    inversion::Survey survey;
    survey.helmholtz = std::make_shared<const wave::Helmholtz>(start, cfg.pml);
    survey.acq = surface_sources_boundary_receivers(start.nz(), start.nx(), cfg.sources, cfg.source_depth,
                                                    cfg.receiver_inset, cfg.receiver_step, frequencies);
    survey.observed = read_freqdata(cfg.data).subset(frequencies);
    survey.f_peak = cfg.f_peak;
    survey.validate();

    std::optional<FreqData> noise;
    if (!cfg.noise.empty()) {
        noise = read_freqdata(cfg.noise).subset(frequencies);
        noise->validate(survey.acq);
    }
    std::optional<ModelGrid> truth;
    if (!cfg.true_model.empty()) {
        truth = as_kind(read_grid(cfg.true_model), GridKind::velocity);
        if (truth->nz() != start.nz() || truth->nx() != start.nx()) {
            throw GeometryError("true model and start model differ in shape");
        }
    }

    const double mu = cfg.mu ? *cfg.mu : cfg.mu_factor * wave::operator_norm(*survey.helmholtz, m0, frequencies.front());
    inversion::OracleFactory factory;
    if (cfg.method == "fwi") {
        factory = [&](const std::vector<double>& f, const Eigen::VectorXd&) -> std::unique_ptr<optim::MisfitOracle> {
            return std::make_unique<inversion::FwiOracle>(inversion::restrict_frequencies(survey, f));
        };
    } else {
        factory = [&](const std::vector<double>& f, const Eigen::VectorXd& m) -> std::unique_ptr<optim::MisfitOracle> {
            return std::make_unique<inversion::WriOracle>(inversion::restrict_frequencies(survey, f), m,
                                                          inversion::WriOptions{mu, cfg.refine_data});
        };
    }

    const auto resolved = cfg.resolved();
    optim::OptConfig oc;
    oc.lambda = cfg.lambda;
    oc.hessian = cfg.hessian.empty() ? (cfg.method == "fwi" ? optim::HessianKind::lbfgs : optim::HessianKind::exact)
                                     : optim::parse_hessian(cfg.hessian);
    oc.c_rule = optim::parse_step_rule(cfg.c_rule);
    oc.c_fixed = cfg.c_fixed;
    oc.c_safety = cfg.c_safety;
    oc.max_outer = cfg.max_iter;
    oc.max_inner = cfg.inner_iter;
    oc.step_tol = cfg.step_tol;
    oc.admm_start_at_m0 = cfg.admm_start_at_m0;
    oc.stopping = optim::parse_stop_rule(cfg.stopping);
    inversion::BatchConfigure configure;
    if (oc.stopping == optim::StopRule::data_residual) {
        configure = [&](const std::vector<double>& f, optim::OptConfig& c) {
            c.stop_target = cfg.discrepancy * noise->subset(f).norm();
        };
    }

    const Denoiser denoiser = parse_denoiser(cfg.denoiser, start.dz(), start.dx());
    const auto plan = inversion::ContinuationPlan::sequential(cfg.batches, cfg.paths);
    const auto result = inversion::multiscale_drive(plan, factory, denoiser, shape, oc,
                                                    optim::parse_method(cfg.algorithm), m0, configure);

    std::filesystem::create_directories(cfg.output_dir);
    auto man = make_manifest("invert");
    for (const auto& [k, v] : resolved) {
        if (k == "output_dir") {
            man.set("config." + k, cfg.output_dir.string());
        } else {
            man.set("config." + k, v);
        }
    }
    man.set("mu_effective", fmt(mu));
    man.input("config", config_path);
    man.input("data", cfg.data);
    man.input("start_model", cfg.start_model);
    if (!cfg.noise.empty()) {
        man.input("noise", cfg.noise);
    }
    if (!cfg.true_model.empty()) {
        man.input("true_model", cfg.true_model);
    }

    int total_iterations = 0;
    for (std::size_t i = 0; i < result.batches.size(); ++i) {
        const auto& b = result.batches[i];
        const std::string tag = "p" + std::to_string(b.path) + "_b" + std::to_string(b.batch);
        const auto model_path = cfg.output_dir / ("model_" + tag + ".grd");
        const auto csv_path = cfg.output_dir / ("history_" + tag + ".csv");
        write_grid(velocity_grid(start, b.result.m), model_path);
        {
            std::ofstream csv(csv_path);
            if (!csv) {
                throw FormatError("cannot write " + csv_path.string());
            }
            optim::write_history_csv(csv, b.result.history);
        }
        total_iterations += b.result.iterations;
        std::string line = "batch " + tag + " frequencies=";
        for (std::size_t k = 0; k < b.frequencies.size(); ++k) {
            line += (k ? "," : "") + short_fmt(b.frequencies[k]);
        }
        line += " iterations=" + std::to_string(b.result.iterations) + " status=" + optim::to_string(b.result.status);
        if (b.result.final_data_residual) {
            line += " data_residual=" + short_fmt(*b.result.final_data_residual);
        }
        std::cout << line << "\n";
        man.set("batch." + tag + ".iterations", std::to_string(b.result.iterations));
        man.set("batch." + tag + ".status", optim::to_string(b.result.status));
        man.output("model_" + tag, model_path);
        man.output("history_" + tag, csv_path);
    }

    const ModelGrid final_model = velocity_grid(start, result.m);
    const auto final_path = cfg.output_dir / "model.grd";
    write_grid(final_model, final_path);
    man.output("model", final_path);

    std::string summary = "summary method=" + cfg.method + " algorithm=" + cfg.algorithm + " denoiser=" +
                          describe(denoiser) + " iterations=" + std::to_string(total_iterations);
    if (truth) {
        const double r = inversion::rmse(final_model.values(), truth->values());
        summary += " rmse=" + short_fmt(r) +
                   " rmse_start=" + short_fmt(inversion::rmse(as_kind(start, GridKind::velocity).values(),
                                                              truth->values()));
        man.set("final_rmse", fmt(r));
    }
    std::cout << summary << "\n";
    man.set("total_iterations", std::to_string(total_iterations));
    man.set("wall_clock_s", short_fmt(clock.seconds()));
    man.write(cfg.output_dir / "manifest.txt");
    return ok;
}

// --- denoise / metrics / preview -----------------------------------------------------------

int cmd_denoise(const std::string& in, const std::string& out, const std::string& spec, double scale)
{
    FieldRecord rec = read_field(in);
    const Denoiser d = parse_denoiser(spec, rec.dz, rec.dx);
    rec.values = apply(d, rec.values, GridShape{rec.nz, rec.nx}, scale);
    write_field(out, rec);
    return ok;
}

int cmd_metrics(const std::string& model, const std::string& truth, const std::string& data,
                const std::string& noise)
{
    const bool grids = !model.empty() || !truth.empty();
    const bool traces = !data.empty() || !noise.empty();
    if (grids == traces || (grids && (model.empty() || truth.empty())) ||
        (traces && (data.empty() || noise.empty()))) {
        throw UsageError("metrics takes either --model and --truth, or --data and --noise");
    }
    if (grids) {
        const ModelGrid m = as_kind(read_grid(model), GridKind::velocity);
        const ModelGrid t = as_kind(read_grid(truth), GridKind::velocity);
        if (m.nz() != t.nz() || m.nx() != t.nx()) {
            throw GeometryError("metrics: grids differ in shape");
        }
        std::cout << "rmse=" << fmt(inversion::rmse(m.values(), t.values())) << "\n";
    } else {
        std::cout << "snr_db=" << fmt(wave::snr_db(read_freqdata(data), read_freqdata(noise))) << "\n";
    }
    return ok;
}

int cmd_preview(const std::string& in, const std::string& out, double vmin, double vmax)
{
    const ModelGrid g = as_kind(read_grid(in), GridKind::velocity);
    write_text(out, pgm_bytes(g.values(), g.nz(), g.nx(), vmin, vmax));
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args)
{
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv)
{
    CLI::App app{"Proximal Newton inversion with black-box denoisers", "proxfwi"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PROXFWI_VERSION);

    RosenbrockArgs ra;
    auto* rosen = app.add_subcommand("rosenbrock", "Rosenbrock + l1 toy problem");
    rosen->add_option("--lambda", ra.lambda, "l1 weight")->required();
    rosen->add_option("--method", ra.method, "nista | nadmm")->capture_default_str();
    rosen->add_option("--hessian", ra.hessian, "exact | lbfgs | identity")->capture_default_str();
    rosen->add_option("--c-rule", ra.c_rule, "spectral | spectral-squared | fixed (default: fixed for nadmm)");
    rosen->add_option("--c-fixed", ra.c_fixed)->capture_default_str();
    rosen->add_option("--c-safety", ra.c_safety)->capture_default_str();
    rosen->add_option("--max-iter", ra.max_iter)->capture_default_str();
    rosen->add_option("--inner", ra.inner, "NISTA inner iterations")->capture_default_str();
    rosen->add_option("--step-tol", ra.step_tol)->capture_default_str();
    rosen->add_option("--start", ra.start, "starting point m1 m2")->expected(2);
    rosen->add_option("--out", ra.out, "history CSV");

    ModelGenArgs ma;
    auto* mgen = app.add_subcommand("model-gen", "Synthetic inclusion model");
    mgen->add_option("--shape", ma.shape, "square | disk | ring | cross | all-four | constant")->capture_default_str();
    mgen->add_option("--nz", ma.nz)->capture_default_str();
    mgen->add_option("--nx", ma.nx)->capture_default_str();
    mgen->add_option("--dz", ma.dz)->capture_default_str();
    mgen->add_option("--dx", ma.dx)->capture_default_str();
    mgen->add_option("--v-background", ma.v_background)->capture_default_str();
    mgen->add_option("--v-inclusion", ma.v_inclusion)->capture_default_str();
    mgen->add_option("--kind", ma.kind, "velocity | slowness")->capture_default_str();
    mgen->add_option("--out", ma.out)->required();

    ForwardArgs fa;
    double snr = 0.0;
    auto* fwd = app.add_subcommand("forward", "Frequency-domain data at the receivers");
    fwd->add_option("--model", fa.model)->required();
    fwd->add_option("--reference", fa.reference, "model fixing the absorbing collar (default: --model)");
    fwd->add_option("--out", fa.out)->required();
    fwd->add_option("--noise-out", fa.noise_out, "write the added noise");
    fwd->add_option("--frequencies", fa.frequencies)->capture_default_str();
    fwd->add_option("--sources", fa.sources)->capture_default_str();
    fwd->add_option("--source-depth", fa.source_depth)->capture_default_str();
    fwd->add_option("--receiver-inset", fa.receiver_inset)->capture_default_str();
    fwd->add_option("--receiver-step", fa.receiver_step)->capture_default_str();
    fwd->add_option("--f-peak", fa.f_peak)->capture_default_str();
    fwd->add_option("--pml-cells", fa.pml_cells)->capture_default_str();
    fwd->add_option("--pml-reflection", fa.pml_reflection)->capture_default_str();
    fwd->add_flag("--free-surface", fa.free_surface);
    auto* snr_opt = fwd->add_option("--snr-db", snr, "add seeded Gaussian noise at this SNR");
    fwd->add_option("--seed", fa.seed)->capture_default_str();

    std::string config;
    std::string out_dir;
    auto* inv = app.add_subcommand("invert", "Run an inversion from a key = value config");
    inv->add_option("--config", config)->required();
    inv->add_option("--output-dir", out_dir, "overrides output_dir of the config");

    std::string d_in;
    std::string d_out;
    std::string d_spec = "identity";
    double d_scale = 1.0;
    auto* den = app.add_subcommand("denoise", "Apply a denoiser to a grid file");
    den->add_option("--in", d_in)->required();
    den->add_option("--out", d_out)->required();
    den->add_option("--denoiser", d_spec)->capture_default_str();
    den->add_option("--scale", d_scale, "prox scale")->capture_default_str();

    std::string mt_model;
    std::string mt_truth;
    std::string mt_data;
    std::string mt_noise;
    auto* met = app.add_subcommand("metrics", "RMSE of a model or SNR of data");
    met->add_option("--model", mt_model);
    met->add_option("--truth", mt_truth);
    met->add_option("--data", mt_data, "clean data");
    met->add_option("--noise", mt_noise);

    std::string p_in;
    std::string p_out;
    double vmin = 0.0;
    double vmax = 0.0;
    auto* prev = app.add_subcommand("preview", "Grayscale PGM of a velocity grid");
    prev->add_option("--in", p_in)->required();
    prev->add_option("--out", p_out)->required();
    prev->add_option("--vmin", vmin)->required();
    prev->add_option("--vmax", vmax)->required();

    try {
        app.parse(argc, argv);
        if (rosen->parsed()) return cmd_rosenbrock(ra);
        if (mgen->parsed()) return cmd_model_gen(ma);
        if (fwd->parsed()) {
            if (*snr_opt) {
                fa.snr_db = snr;
            }
            return cmd_forward(fa);
        }
        if (inv->parsed()) return cmd_invert(config, out_dir);
        if (den->parsed()) return cmd_denoise(d_in, d_out, d_spec, d_scale);
        if (met->parsed()) return cmd_metrics(mt_model, mt_truth, mt_data, mt_noise);
        if (prev->parsed()) return cmd_preview(p_in, p_out, vmin, vmax);
        return usage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    } catch (const UsageError& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return usage;
    } catch (const DomainError& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return usage;
    } catch (const FormatError& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return data;
    } catch (const GeometryError& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return data;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return data;
    } catch (const NumericalError& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return numerical;
    } catch (const StateError& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "proxfwi: " << e.what() << "\n";
        return 1;
    }
}

} // namespace proxfwi::cli
