#include "sgtr/davison.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include "sgtr/errors.hpp"

namespace sgtr {

namespace {

std::vector<double> singular_values_of(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    std::vector<double> sv(static_cast<std::size_t>(svd.singularValues().size()));
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        sv[static_cast<std::size_t>(i)] = svd.singularValues()(i);
    return sv;
}

bool has_full_row_rank(const Eigen::MatrixXcd& M) {
    const auto sv = singular_values_of(M);
    if (sv.empty() || sv.front() <= 0.0) return false;
    int rank = 0;
    for (double s : sv)
        if (s > 1e-10 * sv.front()) ++rank;
    return rank == static_cast<int>(M.rows());
}

// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (smax > 0.0 && sv(i) > 1e-10 * smax) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Internal model for an arbitrary subset of blocks (kept in canonical
// ascending order regardless of the closure sequence).
struct BlockSubset {
    std::vector<int> blocks;  // sorted; 0 = constant, k = k-th harmonic
    Eigen::MatrixXd phi;      // q_S x q_S
    Eigen::VectorXd g;        // q_S
    Eigen::MatrixXd Phi, G;   // lifted by I_r
    std::vector<int> offsets; // lifted column offset per member block
    int r = 0;
};

int block_size(int b) { return b == 0 ? 1 : 2; }

BlockSubset build_subset(const Exosystem& exo, std::vector<int> blocks, int r) {
    std::sort(blocks.begin(), blocks.end());
    int q = 0;
    for (int b : blocks) q += block_size(b);

    BlockSubset s;
    s.blocks = blocks;
    s.r = r;
    s.phi = Eigen::MatrixXd::Zero(q, q);
    s.g = Eigen::VectorXd::Zero(q);
    int at = 0;
    for (int b : blocks) {
        s.offsets.push_back(at * r);
        if (b == 0) {
            s.g(at) = 1.0;
        } else {
            const double w = exo.frequencies[static_cast<std::size_t>(b - 1)];
            s.phi(at, at + 1) = 1.0;
            s.phi(at + 1, at) = -w * w;
            s.g(at + 1) = 1.0;
        }
        at += block_size(b);
    }
    const Eigen::MatrixXd Ir = Eigen::MatrixXd::Identity(r, r);
    s.Phi = Eigen::kroneckerProduct(s.phi, Ir);
    s.G = Eigen::kroneckerProduct(s.g, Ir);
    return s;
}

// Aggregated gain over a subset, canonical placement: m x (r q_S).
Eigen::MatrixXd subset_gain(const BlockSubset& s, const DavisonDesign& design,
                            int m) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(m, s.Phi.rows());
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
        const int b = s.blocks[i];
        const Eigen::MatrixXd& Fb =
            (b == 0) ? design.F0 : design.Fk[static_cast<std::size_t>(b - 1)];
        F.middleCols(s.offsets[i], Fb.cols()) =
            design.eps[static_cast<std::size_t>(b)] * Fb;
    }
    return F;
}

// Loop closed over the subset, exposed as a state-space system from the
// exogenous input u (added to the internal feedback) to the error e.
StateSpaceModel stage_model(const StateSpaceModel& plant, const BlockSubset& s,
                            const Eigen::MatrixXd& F) {
    const int n = plant.n();
    const int qs = static_cast<int>(s.Phi.rows());
    Eigen::MatrixXd A(n + qs, n + qs);
    A.topLeftCorner(n, n) = plant.A;
    A.topRightCorner(n, qs) = -plant.B * F;
    A.bottomLeftCorner(qs, n) = s.G * plant.C;
    A.bottomRightCorner(qs, qs) = s.Phi - s.G * plant.D * F;

    Eigen::MatrixXd B(n + qs, plant.m());
    B.topRows(n) = plant.B;
    B.bottomRows(qs) = s.G * plant.D;

    Eigen::MatrixXd C(plant.r(), n + qs);
    C.leftCols(n) = plant.C;
    C.rightCols(qs) = -plant.D * F;

    return StateSpaceModel(A, B, C, plant.D);
}

} // namespace

Eigen::MatrixXd DavisonDesign::combined_gain() const {
    const auto ell = Fk.size();
    const int m = static_cast<int>(F0.rows());
    const int r = static_cast<int>(F0.cols());
    Eigen::MatrixXd F(m, r * (2 * static_cast<int>(ell) + 1));
    F.leftCols(r) = eps[0] * F0;
    int at = r;
    for (std::size_t k = 0; k < ell; ++k) {
        F.middleCols(at, 2 * r) = eps[k + 1] * Fk[k];
        at += 2 * r;
    }
    return F;
}

Eigen::MatrixXd davison_gain_constant(const Eigen::MatrixXd& P0) {
    if (!has_full_row_rank(P0.cast<std::complex<double>>()))
        throw NonResonanceViolated(
            "davison_gain_constant: P(0) is row-rank deficient",
            singular_values_of(P0.cast<std::complex<double>>()));
    return pinv(P0);
}

Eigen::MatrixXd davison_gain_harmonic(const Eigen::MatrixXcd& Pjw,
                                      double omega) {
    if (!(omega > 0.0))
        throw ConfigError("davison_gain_harmonic: omega must be positive");
    if (!has_full_row_rank(Pjw))
        throw NonResonanceViolated(
            "davison_gain_harmonic: P(jw) is row-rank deficient",
            singular_values_of(Pjw));
    const int m = static_cast<int>(Pjw.cols());
    const int r = static_cast<int>(Pjw.rows());
    Eigen::MatrixXd F(m, 2 * r);
    F.leftCols(r) = 2.0 * omega * pinv(Pjw.imag());
    F.rightCols(r) = 2.0 * pinv(Pjw.real());
    return F;
}

DavisonResult davison_sequential_design(const StateSpaceModel& plant,
                                        const Exosystem& exo,
                                        const std::vector<double>& eps,
                                        std::vector<int> order) {
    plant.require_stable("davison_sequential_design");
    const int ell = exo.ell();
    if (static_cast<int>(eps.size()) != ell + 1)
        throw ConfigError("davison_sequential_design: expected " +
                          std::to_string(ell + 1) + " tuning gains");
    for (double e : eps)
        if (!(e > 0.0))
            throw ConfigError("davison_sequential_design: tuning gains must be "
                              "positive");
    if (order.empty()) {
        order.resize(static_cast<std::size_t>(ell) + 1);
        std::iota(order.begin(), order.end(), 0);
    }
    {
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expected(static_cast<std::size_t>(ell) + 1);
        std::iota(expected.begin(), expected.end(), 0);
        if (sorted != expected)
            throw ConfigError("davison_sequential_design: order must be a "
                              "permutation of 0..ell");
    }

    DavisonDesign design;
    design.eps = eps;
    design.order = order;
    design.Fk.resize(static_cast<std::size_t>(ell));

    std::vector<int> closed;
    for (std::size_t stage = 0; stage < order.size(); ++stage) {
        const int b = order[stage];
        // Frequency response of the loop closed so far at this block's pole.
        const std::complex<double> lambda =
            (b == 0) ? std::complex<double>(0.0, 0.0)
                     : std::complex<double>(
                           0.0, exo.frequencies[static_cast<std::size_t>(b - 1)]);
        Eigen::MatrixXcd response;
        if (closed.empty()) {
            response = eval_transfer(plant, lambda);
        } else {
            const BlockSubset subset = build_subset(exo, closed, plant.r());
            const Eigen::MatrixXd F = subset_gain(subset, design, plant.m());
            response = eval_transfer(stage_model(plant, subset, F), lambda);
        }

        try {
            if (b == 0) {
                design.F0 = davison_gain_constant(response.real());
            } else {
                design.Fk[static_cast<std::size_t>(b - 1)] =
                    davison_gain_harmonic(
                        response, exo.frequencies[static_cast<std::size_t>(b - 1)]);
            }
        } catch (const NonResonanceViolated& ex) {
            throw NonResonanceViolated("stage " + std::to_string(stage) +
                                           " (block " + std::to_string(b) +
                                           "): " + ex.what(),
                                       ex.singular_values);
        }

        closed.push_back(b);
        const BlockSubset subset = build_subset(exo, closed, plant.r());
        const Eigen::MatrixXd F = subset_gain(subset, design, plant.m());
        const StateSpaceModel stage_loop = stage_model(plant, subset, F);
        if (spectral_abscissa(stage_loop.A) >= 0.0)
            throw StageDestabilized(
                "stage " + std::to_string(stage) + " destabilized: closing block " +
                    std::to_string(b) + " at eps = " +
                    std::to_string(eps[static_cast<std::size_t>(b)]) +
                    " leaves the loop non-Hurwitz",
                static_cast<int>(stage));
    }

    const ServoCompensator servo = build_servocompensator(exo, plant.r());
    DavisonResult result{design,
                         assemble_closed_loop(plant, servo, design.combined_gain())};
    return result;
}

double davison_eps1_stability_upper(const StateSpaceModel& plant,
                                    const Exosystem& exo, double eps0) {
    plant.require_stable("davison_eps1_stability_upper");
    if (exo.ell() < 1)
        throw ConfigError("davison_eps1_stability_upper: exosystem has no "
                          "harmonic component");
    if (!(eps0 > 0.0))
        throw ConfigError("davison_eps1_stability_upper: eps0 must be positive");

    DavisonDesign design;
    design.eps = {eps0, 0.0}; // eps1 filled per candidate
    design.Fk.resize(1);
    design.F0 = davison_gain_constant(eval_transfer(plant, {0.0, 0.0}).real());

    const BlockSubset stage0 = build_subset(exo, {0}, plant.r());
    const Eigen::MatrixXd F0agg = subset_gain(stage0, design, plant.m());
    const StateSpaceModel loop0 = stage_model(plant, stage0, F0agg);
    if (spectral_abscissa(loop0.A) >= 0.0)
        throw StageDestabilized("constant stage at eps0 = " +
                                    std::to_string(eps0) + " is unstable",
                                0);

    const double w1 = exo.frequencies.front();
    design.Fk[0] = davison_gain_harmonic(eval_transfer(loop0, {0.0, w1}), w1);

    const BlockSubset stage1 = build_subset(exo, {0, 1}, plant.r());
    const auto alpha1 = [&](double eps1) {
        DavisonDesign d = design;
        d.eps[1] = eps1;
        const Eigen::MatrixXd F = subset_gain(stage1, d, plant.m());
        return spectral_abscissa(stage_model(plant, stage1, F).A);
    };

    double lo = 1e-6;
    if (alpha1(lo) >= 0.0) return 0.0;
    double hi = lo;
    bool unstable_found = false;
    for (int i = 0; i < 40; ++i) {
        hi *= 2.0;
        if (alpha1(hi) >= 0.0) {
            unstable_found = true;
            break;
        }
        lo = hi;
    }
    if (!unstable_found) return std::numeric_limits<double>::infinity();
    while ((hi - lo) > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (alpha1(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace sgtr
