#include "proxfwi/inversion.hpp"

#include "proxfwi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace proxfwi::inversion {

void Survey::validate() const
{
    if (!helmholtz) {
        throw StateError("survey has no Helmholtz discretization");
    }
    acq.validate(helmholtz->nz(), helmholtz->nx());
    observed.validate(acq);
    for (const double f : acq.frequencies) {
        (void)observed.find(f);
    }
    if (!(f_peak > 0.0)) {
        throw DomainError("peak frequency must be positive");
    }
}

Survey restrict_frequencies(const Survey& s, const std::vector<double>& frequencies)
{
    Survey out = s;
    out.acq.frequencies = frequencies;
    out.observed = s.observed.subset(frequencies);
    out.validate();
    return out;
}

namespace {

void check_model(const Vec& m, Eigen::Index n)
{
    if (m.size() != n) {
        throw GeometryError("model has " + std::to_string(m.size()) + " values, expected " + std::to_string(n));
    }
    if (!m.allFinite()) {
        throw DomainError("model has non-finite values");
    }
}

std::vector<const Eigen::MatrixXcd*> data_blocks(const Survey& s)
{
    std::vector<const Eigen::MatrixXcd*> out;
    for (const double f : s.acq.frequencies) {
        out.push_back(&s.observed.blocks[s.observed.find(f)].values);
    }
    return out;
}

} // namespace

// --- FWI -------------------------------------------------------------------------------------

FwiOracle::FwiOracle(Survey survey) : survey_(std::move(survey))
{
    survey_.validate();
    rx_ = survey_.helmholtz->rows_of(survey_.acq.receivers);
    data_ = data_blocks(survey_);
}

void FwiOracle::ensure(const Vec& m)
{
    const auto& h = *survey_.helmholtz;
    check_model(m, h.interior_size());
    if (cached_m_ && cached_m_->size() == m.size() && cached_m_->cwiseEqual(m).all()) {
        return;
    }
    states_.clear();
    cached_m_.reset();
    for (std::size_t k = 0; k < survey_.acq.frequencies.size(); ++k) {
        const double f = survey_.acq.frequencies[k];
        const double omega = wave::angular(f);
        auto fact = factorize(h.assemble(m, omega));
        Eigen::MatrixXcd u = fact.solve(h.sources(survey_.acq.sources, wave::ricker_amplitude(f, survey_.f_peak)));
        solves_ += u.cols();
        Eigen::MatrixXcd res = *data_[k] - wave::sample(u, rx_);
        states_.push_back(FreqState{omega, std::move(fact), std::move(u), std::move(res)});
    }
    cached_m_ = m;
}

double FwiOracle::value(const Vec& m)
{
    ensure(m);
    double v = 0.0;
    for (const auto& s : states_) {
        v += 0.5 * s.residual.squaredNorm();
    }
    return v;
}

Vec FwiOracle::gradient(const Vec& m)
{
    ensure(m);
    const auto& rows = survey_.helmholtz->interior_rows();
    const Eigen::Index n_pad = survey_.helmholtz->padded_size();
    Vec g = Vec::Zero(m.size());
    for (const auto& s : states_) {
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n_pad, s.u.cols());
        for (std::size_t r = 0; r < rx_.size(); ++r) {
            rhs.row(rx_[r]) = s.residual.row(static_cast<Eigen::Index>(r)).conjugate();
        }
        const Eigen::MatrixXcd adj = s.fact.solve(rhs);
        solves_ += adj.cols();
        const double w2 = s.omega * s.omega;
        for (Eigen::Index j = 0; j < g.size(); ++j) {
            const auto p = rows[j];
            g[j] += w2 * (s.u.row(p).array() * adj.row(p).array()).real().sum();
        }
    }
    return g;
}

std::pair<double, Vec> FwiOracle::value_gradient(const Vec& m)
{
    const double v = value(m);
    return {v, gradient(m)};
}

Vec FwiOracle::hvp(const Vec& m, const Vec& v)
{
    ensure(m);
    check_model(v, m.size());
    const auto& rows = survey_.helmholtz->interior_rows();
    const Eigen::Index n_pad = survey_.helmholtz->padded_size();
    Vec out = Vec::Zero(m.size());
    for (const auto& s : states_) {
        const double w2 = s.omega * s.omega;
        Eigen::MatrixXcd virt = Eigen::MatrixXcd::Zero(n_pad, s.u.cols());
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            virt.row(rows[j]) = w2 * v[j] * s.u.row(rows[j]);
        }
        const Eigen::MatrixXcd du = s.fact.solve(virt);
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n_pad, s.u.cols());
        for (const auto r : rx_) {
            rhs.row(r) = du.row(r).conjugate();
        }
        const Eigen::MatrixXcd z = s.fact.solve(rhs);
        solves_ += 2 * s.u.cols();
        for (Eigen::Index j = 0; j < out.size(); ++j) {
            const auto p = rows[j];
            out[j] += w2 * (s.u.row(p).array() * z.row(p).array()).real().sum();
        }
    }
    return out;
}

std::optional<double> FwiOracle::data_residual(const Vec& m) { return std::sqrt(2.0 * value(m)); }

FreqData FwiOracle::predicted(const Vec& m)
{
    ensure(m);
    FreqData out;
    for (std::size_t k = 0; k < states_.size(); ++k) {
        out.blocks.push_back({survey_.acq.frequencies[k], wave::sample(states_[k].u, rx_)});
    }
    return out;
}

// --- WRI -------------------------------------------------------------------------------------

WriOracle::WriOracle(Survey survey, const Vec& m_start, WriOptions options)
    : survey_(std::move(survey)), options_(options)
{
    survey_.validate();
    const auto& h = *survey_.helmholtz;
    check_model(m_start, h.interior_size());
    rx_ = h.rows_of(survey_.acq.receivers);
    data_ = data_blocks(survey_);
    mu_ = options_.mu ? *options_.mu : 1e-2 * wave::operator_norm(h, m_start, survey_.acq.frequencies.front());
    if (!(mu_ > 0.0) || !std::isfinite(mu_)) {
        throw DomainError("WRI penalty mu must be positive");
    }
    for (std::size_t k = 0; k < survey_.acq.frequencies.size(); ++k) {
        const double f = survey_.acq.frequencies[k];
        FreqState s;
        s.omega = wave::angular(f);
        s.b = h.sources(survey_.acq.sources, wave::ricker_amplitude(f, survey_.f_peak));
        s.d_assim = *data_[k];
        states_.push_back(std::move(s));
    }
}

void WriOracle::update_wavefields(const Vec& m)
{
    const auto& h = *survey_.helmholtz;
    check_model(m, h.interior_size());
    for (std::size_t k = 0; k < states_.size(); ++k) {
        auto& s = states_[k];
        if (options_.refine_data && have_fields_) {
            s.d_assim += *data_[k] - wave::sample(s.u, rx_);
        }
        const auto a = h.assemble(m, s.omega);
        s.u = wave::augmented_solve(a, rx_, s.b, s.d_assim, mu_);
        s.au = a.multiply(s.u);
    }
    m_ref_ = m;
    have_fields_ = true;
}

void WriOracle::set_wavefields(const Vec& m, std::vector<Eigen::MatrixXcd> fields)
{
    const auto& h = *survey_.helmholtz;
    check_model(m, h.interior_size());
    if (fields.size() != states_.size()) {
        throw GeometryError("set_wavefields: one field block per frequency expected");
    }
    for (std::size_t k = 0; k < states_.size(); ++k) {
        if (fields[k].rows() != h.padded_size() || fields[k].cols() != states_[k].b.cols()) {
            throw GeometryError("set_wavefields: field block has the wrong shape");
        }
        states_[k].u = std::move(fields[k]);
        states_[k].au = h.assemble(m, states_[k].omega).multiply(states_[k].u);
    }
    m_ref_ = m;
    have_fields_ = true;
}

std::vector<Eigen::MatrixXcd> WriOracle::wavefields() const
{
    require_fields();
    std::vector<Eigen::MatrixXcd> out;
    for (const auto& s : states_) {
        out.push_back(s.u);
    }
    return out;
}

void WriOracle::require_fields() const
{
    if (!have_fields_) {
        throw StateError("WRI wavefields have not been computed for any model");
    }
}

Eigen::MatrixXcd WriOracle::residual(const FreqState& s, const Vec& m) const
{
    check_model(m, m_ref_.size());
    const auto& rows = survey_.helmholtz->interior_rows();
    Eigen::MatrixXcd r = s.b - s.au;
    const double w2 = s.omega * s.omega;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
        const double dm = m[j] - m_ref_[j];
        if (dm != 0.0) {
            r.row(rows[j]) -= (w2 * dm) * s.u.row(rows[j]);
        }
    }
    return r;
}

double WriOracle::value(const Vec& m)
{
    require_fields();
    double v = 0.0;
    for (const auto& s : states_) {
        v += 0.5 * residual(s, m).squaredNorm();
    }
    return v;
}

std::pair<double, Vec> WriOracle::value_gradient(const Vec& m)
{
    require_fields();
    const auto& rows = survey_.helmholtz->interior_rows();
    double v = 0.0;
    Vec g = Vec::Zero(m.size());
    for (const auto& s : states_) {
        const Eigen::MatrixXcd r = residual(s, m);
        v += 0.5 * r.squaredNorm();
        const double w2 = s.omega * s.omega;
        for (Eigen::Index j = 0; j < g.size(); ++j) {
            const auto p = rows[j];
            g[j] -= w2 * (s.u.row(p).conjugate().array() * r.row(p).array()).real().sum();
        }
    }
    return {v, g};
}

Vec WriOracle::gradient(const Vec& m) { return value_gradient(m).second; }

std::optional<Vec> WriOracle::hessian_diag(const Vec& m)
{
    require_fields();
    check_model(m, m_ref_.size());
    const auto& rows = survey_.helmholtz->interior_rows();
    Vec h = Vec::Zero(m.size());
    for (const auto& s : states_) {
        const double w4 = std::pow(s.omega, 4);
        for (Eigen::Index j = 0; j < h.size(); ++j) {
            h[j] += w4 * s.u.row(rows[j]).squaredNorm();
        }
    }
    return h;
}

Vec WriOracle::hvp(const Vec& m, const Vec& v)
{
    check_model(v, m.size());
    return hessian_diag(m)->cwiseProduct(v);
}

std::optional<double> WriOracle::data_residual(const Vec& /*m*/)
{
    require_fields();
    double sum = 0.0;
    for (std::size_t k = 0; k < states_.size(); ++k) {
        sum += (wave::sample(states_[k].u, rx_) - *data_[k]).squaredNorm();
    }
    return std::sqrt(sum);
}

double WriOracle::joint_objective(const Vec& m)
{
    require_fields();
    double v = 0.0;
    for (const auto& s : states_) {
        v += 0.5 * residual(s, m).squaredNorm() +
             0.5 * mu_ * mu_ * (wave::sample(s.u, rx_) - s.d_assim).squaredNorm();
    }
    return v;
}

// --- metrics -------------------------------------------------------------------------------

double rmse(const Vec& m, const Vec& m_true)
{
    if (m.size() != m_true.size()) {
        throw GeometryError("rmse: shapes differ");
    }
    const double denom = m_true.norm();
    if (!(denom > 0.0)) {
        throw DomainError("rmse: reference model is zero");
    }
    return 100.0 * (m - m_true).norm() / denom;
}

double snr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& noise)
{
    if (signal.size() == 0 || noise.size() == 0) {
        throw DomainError("snr_db: empty input");
    }
    const double ns = noise.norm() / std::sqrt(static_cast<double>(noise.size()));
    if (!(ns > 0.0)) {
        throw DomainError("snr_db: noise is zero");
    }
    const double ss = signal.norm() / std::sqrt(static_cast<double>(signal.size()));
    return 20.0 * std::log10(ss / ns);
}

// --- continuation ----------------------------------------------------------------------------

ContinuationPlan ContinuationPlan::sequential(std::vector<std::vector<double>> batches, int n_paths)
{
    ContinuationPlan plan;
    plan.batches = std::move(batches);
    std::vector<int> order(plan.batches.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<int>(i);
    }
    for (int p = 0; p < n_paths; ++p) {
        plan.paths.push_back(order);
    }
    plan.validate();
    return plan;
}

void ContinuationPlan::validate() const
{
    if (batches.empty() || paths.empty()) {
        throw DomainError("continuation plan needs at least one batch and one path");
    }
    for (const auto& b : batches) {
        if (b.empty()) {
            throw DomainError("continuation plan has an empty frequency batch");
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!(b[i] > 0.0) || (i > 0 && !(b[i] > b[i - 1]))) {
                throw DomainError("batch frequencies must be positive and strictly increasing");
            }
        }
    }
    for (const auto& p : paths) {
        if (p.empty()) {
            throw DomainError("continuation plan has an empty path");
        }
        for (const int i : p) {
            if (i < 0 || i >= static_cast<int>(batches.size())) {
                throw DomainError("continuation path refers to batch " + std::to_string(i) + " which does not exist");
            }
        }
    }
}

DriveResult multiscale_drive(const ContinuationPlan& plan, const OracleFactory& factory, const Denoiser& d,
                             GridShape shape, const optim::OptConfig& config, optim::Method method, const Vec& m0,
                             const BatchConfigure& configure)
{
    plan.validate();
    DriveResult out;
    out.m = m0;
    for (std::size_t p = 0; p < plan.paths.size(); ++p) {
        for (const int b : plan.paths[p]) {
            const auto& freqs = plan.batches[b];
            optim::OptConfig cfg = config;
            if (configure) {
                configure(freqs, cfg);
            }
            auto oracle = factory(freqs, out.m);
            if (!oracle) {
                throw StateError("oracle factory returned no oracle");
            }
            BatchRecord rec;
            rec.path = static_cast<int>(p);
            rec.batch = b;
            rec.frequencies = freqs;
            rec.start = out.m;
            rec.result = optim::proximal_newton_solve(*oracle, d, shape, cfg, out.m, method);
            out.m = rec.result.m;
            out.batches.push_back(std::move(rec));
        }
    }
    return out;
}

} // namespace proxfwi::inversion
