#include "sgtr/sslg.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <json.hpp>

namespace sgtr {

namespace {

std::vector<double> singular_values_of(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    std::vector<double> sv(static_cast<std::size_t>(svd.singularValues().size()));
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        sv[static_cast<std::size_t>(i)] = svd.singularValues()(i);
    return sv;
}

RankEntry rank_entry(std::complex<double> lambda, const Eigen::MatrixXcd& M,
                     int r, double scale) {
    RankEntry e;
    e.lambda = lambda;
    e.singular_values = singular_values_of(M);
    // Threshold relative to the data-wide scale, so a sample annihilated by a
    // transmission zero registers as rank deficient instead of carrying a
    // full-rank roundoff residue.
    const double threshold = 1e-10 * scale;
    for (double s : e.singular_values)
        if (s > threshold && scale > 0.0) ++e.rank;
    e.full = (e.rank == r);
    return e;
}

} // namespace

void FrequencyData::validate_against(const Exosystem& exo) const {
    if (static_cast<int>(samples.size()) != exo.ell())
        throw ConfigError("frequency data holds " +
                          std::to_string(samples.size()) +
                          " harmonic samples; exosystem expects " +
                          std::to_string(exo.ell()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].omega != exo.frequencies[i])
            throw ConfigError("frequency data sample order does not match the "
                              "exosystem frequency list");
        if (samples[i].response.rows() != P0.rows() ||
            samples[i].response.cols() != P0.cols())
            throw ConfigError("frequency data sample dimensions are inconsistent");
    }
}

NonResonanceReport check_nonresonance(const FrequencyData& fd) {
    NonResonanceReport report;
    const int r = fd.r();
    double scale = fd.P0.cwiseAbs().maxCoeff();
    for (const auto& s : fd.samples)
        scale = std::max(scale, s.response.cwiseAbs().maxCoeff());
    report.entries.push_back(
        rank_entry({0.0, 0.0}, fd.P0.cast<std::complex<double>>(), r, scale));
    for (const auto& s : fd.samples)
        report.entries.push_back(rank_entry({0.0, s.omega}, s.response, r, scale));
    report.pass = true;
    for (const auto& e : report.entries) report.pass = report.pass && e.full;
    return report;
}

Eigen::MatrixXd sslg_apply_data(const FrequencyData& fd, const SpectralData& spec,
                                const Eigen::MatrixXd& F) {
    const int r = fd.r();
    const int m = fd.m();
    const int rq = r * spec.q();
    if (fd.ell() != spec.ell())
        throw ConfigError("sslg_apply_data: frequency data and spectral data "
                          "disagree on the harmonic count");
    if (F.rows() != m || F.cols() != rq)
        throw ConfigError("sslg_apply_data: F must be m x rq");

    const Eigen::MatrixXcd Fc = F.cast<std::complex<double>>();
    Eigen::MatrixXcd acc =
        fd.P0.cast<std::complex<double>>() * Fc * spec.lifted(0, r);
    for (int k = 1; k <= spec.ell(); ++k) {
        const Eigen::MatrixXcd term =
            fd.samples[static_cast<std::size_t>(k - 1)].response * Fc *
            spec.lifted(k, r);
        acc += term + term.conjugate();
    }

    const double imag_residue = acc.imag().cwiseAbs().maxCoeff();
    if (imag_residue > 1e-9 * (1.0 + acc.norm()))
        throw SolverError("sslg_apply_data: imaginary residue " +
                          std::to_string(imag_residue) +
                          " exceeds the internal-consistency bound");
    return acc.real();
}

Eigen::MatrixXd sslg_apply_model(const StateSpaceModel& plant,
                                 const ServoCompensator& servo,
                                 const Eigen::MatrixXd& F) {
    plant.require_stable("sslg_apply_model");
    if (servo.r != plant.r())
        throw ConfigError("sslg_apply_model: servo/plant error dimensions differ");
    if (F.rows() != plant.m() || F.cols() != servo.rq())
        throw ConfigError("sslg_apply_model: F must be m x rq");
    const Eigen::MatrixXd Pi = sylvester_solve(plant.A, servo.Phi, plant.B * F);
    return plant.C * Pi + plant.D * F;
}

double OperatorMatrix::cond() const {
    return sigma_min > 0.0 ? sigma_max / sigma_min
                           : std::numeric_limits<double>::infinity();
}

OperatorMatrix build_M(const FrequencyData& fd, const SpectralData& spec) {
    const int r = fd.r();
    const int m = fd.m();
    const int rq = r * spec.q();
    if (fd.ell() != spec.ell())
        throw ConfigError("build_M: frequency data and spectral data disagree "
                          "on the harmonic count");

    Eigen::MatrixXcd Mc = Eigen::kroneckerProduct(
        spec.lifted(0, r).transpose(), fd.P0.cast<std::complex<double>>());
    for (int k = 1; k <= spec.ell(); ++k) {
        const Eigen::MatrixXcd term = Eigen::kroneckerProduct(
            spec.lifted(k, r).transpose(),
            fd.samples[static_cast<std::size_t>(k - 1)].response);
        Mc += term + term.conjugate();
    }

    OperatorMatrix out;
    out.M = Mc.real();
    out.r = r;
    out.m = m;
    out.rq = rq;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.M);
    out.sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    out.sigma_min = svd.singularValues().size()
                        ? svd.singularValues()(svd.singularValues().size() - 1)
                        : 0.0;
    return out;
}

Eigen::MatrixXd solve_gain(const OperatorMatrix& Mx, const Eigen::MatrixXd& Z) {
    if (Z.rows() != Mx.r || Z.cols() != Mx.rq)
        throw ConfigError("solve_gain: Z must be r x rq");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        Mx.M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    const double threshold = 1e-10 * smax;
    // Full row rank required: M has r*rq rows <= m*rq columns.
    bool full_row_rank = smax > 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        full_row_rank = full_row_rank && sv(i) > threshold;
    if (!full_row_rank) {
        std::vector<double> values(static_cast<std::size_t>(sv.size()));
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            values[static_cast<std::size_t>(i)] = sv(i);
        throw NonResonanceViolated(
            "non-resonance violated: operator matrix is row-rank deficient "
            "(sigma_min = " +
                std::to_string(sv.size() ? sv(sv.size() - 1) : 0.0) +
                ", sigma_max = " + std::to_string(smax) + ")",
            values);
    }

    const Eigen::VectorXd z =
        Eigen::Map<const Eigen::VectorXd>(Z.data(), Z.size());
    // Minimum-norm solution through the pseudoinverse.
    Eigen::VectorXd y = svd.matrixU().transpose() * z;
    for (Eigen::Index i = 0; i < sv.size(); ++i) y(i) /= sv(i);
    Eigen::VectorXd f = svd.matrixV() * y;

    const double residual = (Mx.M * f - z).norm();
    if (!(residual <= 1e-8 * (1.0 + z.norm())))
        throw SolverError("solve_gain: residual " + std::to_string(residual) +
                          " out of tolerance");
    return Eigen::Map<const Eigen::MatrixXd>(f.data(), Mx.m, Mx.rq);
}

// --- serialization ---------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ConfigError(std::string(what) + ": expected a nested array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError(std::string(what) + ": ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c)
            M(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return M;
}

} // namespace

std::string frequency_data_to_json(const FrequencyData& fd) {
    nlohmann::json j;
    j["provenance"] = fd.provenance;
    j["r"] = fd.r();
    j["m"] = fd.m();
    j["p0"] = matrix_to_json(fd.P0);
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : fd.samples) {
        nlohmann::json entry;
        entry["omega"] = s.omega;
        entry["re"] = matrix_to_json(s.response.real());
        entry["im"] = matrix_to_json(s.response.imag());
        samples.push_back(std::move(entry));
    }
    j["samples"] = std::move(samples);
    return j.dump(2) + "\n";
}

FrequencyData frequency_data_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("frequency data: invalid JSON: ") +
                          ex.what());
    }
    FrequencyData fd;
    fd.provenance = j.value("provenance", std::string("analytic"));
    fd.P0 = matrix_from_json(j.at("p0"), "frequency data p0");
    for (const auto& entry : j.at("samples")) {
        FrequencySample s;
        s.omega = entry.at("omega").get<double>();
        const Eigen::MatrixXd re =
            matrix_from_json(entry.at("re"), "frequency data re");
        const Eigen::MatrixXd im =
            matrix_from_json(entry.at("im"), "frequency data im");
        if (re.rows() != im.rows() || re.cols() != im.cols())
            throw ConfigError("frequency data: re/im shape mismatch");
        s.response = re.cast<std::complex<double>>() +
                     std::complex<double>(0.0, 1.0) *
                         im.cast<std::complex<double>>();
        fd.samples.push_back(std::move(s));
    }
    return fd;
}

void save_frequency_data(const FrequencyData& fd, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << frequency_data_to_json(fd);
}

FrequencyData load_frequency_data(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return frequency_data_from_json(buf.str());
}

} // namespace sgtr
