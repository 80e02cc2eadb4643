#include "cli.hpp"

#include "proxfwi/optim.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace proxfwi::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        out.push_back(trim(cur));
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double to_double(const std::string& s, const std::string& what)
{
    double v = 0.0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw UsageError(what + ": '" + s + "' is not a number");
    }
    return v;
}

long to_long(const std::string& s, const std::string& what)
{
    long v = 0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw UsageError(what + ": '" + s + "' is not an integer");
    }
    return v;
}

int to_int(const std::string& s, const std::string& what) { return static_cast<int>(to_long(s, what)); }

bool to_bool(const std::string& s, const std::string& what)
{
    const auto t = trim(s);
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw UsageError(what + ": '" + s + "' is not a boolean");
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + fmt(v[i]);
    }
    return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& what)
{
    std::vector<double> out;
    for (const auto& item : split(s, ',')) {
        out.push_back(to_double(item, what));
    }
    if (out.empty()) {
        throw UsageError(what + ": empty list");
    }
    return out;
}

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (const char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to)
{
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

struct TempDir {
    std::filesystem::path path;
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

std::atomic<long> external_calls{0};

} // namespace

// --- denoisers -----------------------------------------------------------------------------

Denoiser external_denoiser(std::string command_template, double dz, double dx)
{
    if (command_template.find("{in}") == std::string::npos || command_template.find("{out}") == std::string::npos) {
        throw UsageError("external denoiser template needs {in} and {out} placeholders");
    }
    denoisers::Custom c;
    c.name = "external:" + command_template;
    c.fn = [tmpl = std::move(command_template), dz, dx](const Eigen::VectorXd& x, GridShape shape, double scale) {
        TempDir dir{std::filesystem::temp_directory_path() /
                    ("proxfwi-ext-" + std::to_string(::getpid()) + "-" + std::to_string(external_calls++))};
        std::filesystem::create_directories(dir.path);
        const auto in = dir.path / "in.grd";
        const auto out = dir.path / "out.grd";
        write_field(in, FieldRecord{shape.nz, shape.nx, dz, dx, GridKind::squared_slowness, x});

        std::string cmd = tmpl;
        replace_all(cmd, "{in}", shell_quote(in.string()));
        replace_all(cmd, "{out}", shell_quote(out.string()));
        replace_all(cmd, "{scale}", fmt(scale));
        std::fflush(nullptr);
        const int status = std::system(cmd.c_str());
        if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            throw FormatError("external denoiser failed (status " + std::to_string(status) + "): " + cmd);
        }
        if (!std::filesystem::exists(out)) {
            throw FormatError("external denoiser wrote no output: " + cmd);
        }
        FieldRecord rec = read_field(out);
        if (rec.nz != shape.nz || rec.nx != shape.nx) {
            throw GeometryError("external denoiser returned a " + std::to_string(rec.nz) + "x" +
                                std::to_string(rec.nx) + " field for a " + std::to_string(shape.nz) + "x" +
                                std::to_string(shape.nx) + " input");
        }
        return rec.values;
    };
    return c;
}

Denoiser parse_denoiser(const std::string& spec, double dz, double dx)
{
    const std::string prefix = "external:";
    if (spec.rfind(prefix, 0) == 0) {
        return external_denoiser(spec.substr(prefix.size()), dz, dx);
    }
    const auto parts = split(spec, ':');
    if (parts.empty()) {
        throw UsageError("empty denoiser specification");
    }
    const auto& kind = parts[0];
    auto arg = [&](std::size_t i, double fallback) {
        return parts.size() > i ? to_double(parts[i], "denoiser " + kind) : fallback;
    };
    auto check_arity = [&](std::size_t max_args) {
        if (parts.size() > max_args + 1) {
            throw UsageError("denoiser '" + spec + "': too many parameters");
        }
    };
    if (kind == "identity") {
        check_arity(0);
        return denoisers::Identity{};
    }
    if (kind == "l1") {
        check_arity(1);
        return denoisers::L1{arg(1, 1.0)};
    }
    if (kind == "l2sq") {
        check_arity(1);
        return denoisers::L2Sq{arg(1, 1.0), {}};
    }
    if (kind == "tv") {
        check_arity(2);
        return denoisers::Tv{arg(1, 1.0), static_cast<int>(arg(2, 100))};
    }
    if (kind == "nlm") {
        check_arity(4);
        NlmParams p;
        p.h = arg(1, p.h);
        p.sigma = arg(2, p.sigma);
        p.patch_radius = static_cast<int>(arg(3, p.patch_radius));
        p.search_radius = static_cast<int>(arg(4, p.search_radius));
        return denoisers::Nlm{p};
    }
    throw UsageError("unknown denoiser '" + kind + "'");
}

// --- run configuration ---------------------------------------------------------------------

std::vector<double> RunConfig::frequencies() const
{
    std::set<double> all;
    for (const auto& b : batches) {
        all.insert(b.begin(), b.end());
    }
    return {all.begin(), all.end()};
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const
{
    std::string plan;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        plan += (i ? ";" : "") + fmt_list(batches[i]);
    }
    const std::string h = hessian.empty() ? (method == "fwi" ? "lbfgs" : "exact") : hessian;
    return {
        {"data", data.string()},
        {"noise", noise.string()},
        {"start_model", start_model.string()},
        {"true_model", true_model.string()},
        {"output_dir", output_dir.string()},
        {"sources", std::to_string(sources)},
        {"source_depth", std::to_string(source_depth)},
        {"receiver_inset", std::to_string(receiver_inset)},
        {"receiver_step", std::to_string(receiver_step)},
        {"f_peak", fmt(f_peak)},
        {"pml_cells", std::to_string(pml.cells)},
        {"pml_reflection", fmt(pml.reflection)},
        {"free_surface", pml.free_surface_top ? "true" : "false"},
        {"batches", plan},
        {"paths", std::to_string(paths)},
        {"method", method},
        {"algorithm", algorithm},
        {"hessian", h},
        {"denoiser", denoiser},
        {"lambda", fmt(lambda)},
        {"mu", mu ? fmt(*mu) : ""},
        {"mu_factor", fmt(mu_factor)},
        {"refine_data", refine_data ? "true" : "false"},
        {"c_rule", c_rule},
        {"c_safety", fmt(c_safety)},
        {"c_fixed", fmt(c_fixed)},
        {"max_iter", std::to_string(max_iter)},
        {"inner_iter", std::to_string(inner_iter)},
        {"stopping", stopping},
        {"discrepancy", fmt(discrepancy)},
        {"step_tol", fmt(step_tol)},
        {"admm_start", admm_start_at_m0 ? "m0" : "zero"},
        {"seed", std::to_string(seed)},
    };
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir)
{
    RunConfig c;
    auto path_of = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        const std::string what = "config line " + std::to_string(lineno) + " (" + key + ")";
        if (!seen.insert(key).second) {
            throw UsageError(what + ": duplicate key");
        }
        try {
            if (key == "data") c.data = path_of(v);
            else if (key == "noise") c.noise = path_of(v);
            else if (key == "start_model") c.start_model = path_of(v);
            else if (key == "true_model") c.true_model = path_of(v);
            else if (key == "output_dir") c.output_dir = path_of(v);
            else if (key == "sources") c.sources = to_int(v, what);
            else if (key == "source_depth") c.source_depth = to_int(v, what);
            else if (key == "receiver_inset") c.receiver_inset = to_int(v, what);
            else if (key == "receiver_step") c.receiver_step = to_int(v, what);
            else if (key == "f_peak") c.f_peak = to_double(v, what);
            else if (key == "pml_cells") c.pml.cells = to_int(v, what);
            else if (key == "pml_reflection") c.pml.reflection = to_double(v, what);
            else if (key == "free_surface") c.pml.free_surface_top = to_bool(v, what);
            else if (key == "frequencies") c.batches = {parse_list(v, what)};
            else if (key == "batches") {
                c.batches.clear();
                for (const auto& b : split(v, ';')) {
                    c.batches.push_back(parse_list(b, what));
                }
            }
            else if (key == "paths") c.paths = to_int(v, what);
            else if (key == "method") c.method = v;
            else if (key == "algorithm") c.algorithm = v;
            else if (key == "hessian") c.hessian = v;
            else if (key == "denoiser") c.denoiser = v;
            else if (key == "lambda") c.lambda = to_double(v, what);
            else if (key == "mu") c.mu = to_double(v, what);
            else if (key == "mu_factor") c.mu_factor = to_double(v, what);
            else if (key == "refine_data") c.refine_data = to_bool(v, what);
            else if (key == "c_rule") c.c_rule = v;
            else if (key == "c_safety") c.c_safety = to_double(v, what);
            else if (key == "c_fixed") c.c_fixed = to_double(v, what);
            else if (key == "max_iter") c.max_iter = to_int(v, what);
            else if (key == "inner_iter") c.inner_iter = to_int(v, what);
            else if (key == "stopping") c.stopping = v;
            else if (key == "discrepancy") c.discrepancy = to_double(v, what);
            else if (key == "step_tol") c.step_tol = to_double(v, what);
            else if (key == "admm_start") {
                if (v != "m0" && v != "zero") {
                    throw UsageError(what + ": expected m0 or zero");
                }
                c.admm_start_at_m0 = v == "m0";
            }
            else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_long(v, what));
            else throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const DomainError& e) {
            throw UsageError(what + ": " + e.what());
        }
    }

    if (c.data.empty()) throw UsageError("config: 'data' is required");
    if (c.start_model.empty()) throw UsageError("config: 'start_model' is required");
    if (c.batches.empty()) throw UsageError("config: 'frequencies' or 'batches' is required");
    if (c.method != "fwi" && c.method != "irwri") throw UsageError("config: method must be fwi or irwri");
    if (c.paths < 1) throw UsageError("config: paths must be >= 1");
    if (c.max_iter < 0 || c.inner_iter < 1) throw UsageError("config: iteration counts out of range");
    if (c.mu && !(*c.mu > 0.0)) throw UsageError("config: mu must be positive");
    if (!(c.mu_factor > 0.0)) throw UsageError("config: mu_factor must be positive");
    if (!(c.discrepancy > 0.0)) throw UsageError("config: discrepancy must be positive");
    try {
        (void)optim::parse_method(c.algorithm);
        (void)optim::parse_step_rule(c.c_rule);
        (void)optim::parse_stop_rule(c.stopping);
        if (!c.hessian.empty()) {
            (void)optim::parse_hessian(c.hessian);
        }
    } catch (const DomainError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (optim::parse_stop_rule(c.stopping) == optim::StopRule::model_error) {
        throw UsageError("config: model-error stopping is not available from a config file");
    }
    if (optim::parse_stop_rule(c.stopping) == optim::StopRule::data_residual && c.noise.empty()) {
        throw UsageError("config: data-residual stopping needs a 'noise' file");
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open config " + path.string());
    }
    return parse_run_config(in, path.parent_path());
}

} // namespace proxfwi::cli
