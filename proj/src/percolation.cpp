#include "sbmrobust/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace sbmrobust {

namespace {

constexpr double kChangeTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-10;
constexpr long kMaxIterations = 1'000'000;
constexpr double kTargetedResidual = 1e-12;
constexpr double kTargetedLowerX = 1e-15;

}  // namespace

std::string_view to_string(Schedule schedule)
{
    return schedule == Schedule::Random ? "random" : "targeted";
}

Schedule parse_schedule(std::string_view text)
{
    if (text == "random") return Schedule::Random;
    if (text == "targeted") return Schedule::Targeted;
    throw std::invalid_argument("unknown removal schedule '" + std::string(text) +
                                "', expected random or targeted");
}

Percolation::Percolation(const BlockModel& model)
    : model_(model),
      kappa_(model.block_degrees()),
      c_(sbmrobust::poisson_params(model)),
      mixing_(mixing_matrix(model))
{
    double lo = INFINITY;
    double hi = -INFINITY;
    for (int r = 0; r < model.blocks(); ++r) {
        if (model.size(r) < kAbsentBlockSize) continue;
        lo = std::min(lo, kappa_(r));
        hi = std::max(hi, kappa_(r));
    }
    equal_degrees_ = hi - lo <= 1e-12 * hi;
}

PhiVector Percolation::phi(Schedule schedule, double q) const
{
    const int B = model_.blocks();
    if (q <= 0.0) return {Eigen::VectorXd::Ones(B), 0.0};
    if (q >= 1.0) return {Eigen::VectorXd::Zero(B), 1.0};
    if (schedule == Schedule::Random || equal_degrees_)
        return {Eigen::VectorXd::Constant(B, 1.0 - q), q};

    // Solve 1 - q = sum_r n_r exp(-kappa_r (1 - x) / x); the right-hand side
    // increases with x, from 0 at x -> 0 to 1 at x = 1.
    const Eigen::VectorXd& n = model_.sizes();
    const auto residual = [&](double x) {
        const double t = (1.0 - x) / x;
        double kept = 0.0;
        for (int r = 0; r < B; ++r) kept += n(r) * std::exp(-kappa_(r) * t);
        return 1.0 - q - kept;
    };
    double lo = kTargetedLowerX;
    double hi = 1.0;
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 400; ++i) {
        x = 0.5 * (lo + hi);
        if (x <= lo || x >= hi) break;
        const double res = residual(x);
        if (std::abs(res) < kTargetedResidual) break;
        if (res > 0.0)
            lo = x;
        else
            hi = x;
    }
    const double t = (1.0 - x) / x;
    PhiVector out{Eigen::VectorXd(B), q};
    for (int r = 0; r < B; ++r) out.phi(r) = std::exp(-kappa_(r) * t);
    return out;
}

Eigen::VectorXd Percolation::map(const PhiVector& phi, const Eigen::VectorXd& u) const
{
    const int B = model_.blocks();
    Eigen::VectorXd h(B);
    for (int s = 0; s < B; ++s) h(s) = 1.0 - phi.phi(s) + phi.phi(s) * g1(c_(s), u(s));
    return mixing_ * h;
}

bool Percolation::unit_is_least_fixed_point(const PhiVector& phi) const
{
    // u = 1 is the least fixed point iff the linearization at 1 has
    // spectral radius <= 1, i.e. there is no giant component.
    const Eigen::MatrixXd jac = mixing_ * phi.phi.cwiseProduct(c_).asDiagonal();
    const Eigen::VectorXcd eig = jac.eigenvalues();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i) radius = std::max(radius, std::abs(eig(i)));
    return radius <= 1.0 + 1e-12;
}

Eigen::VectorXd Percolation::solve(const PhiVector& phi, const Eigen::VectorXd& start) const
{
    const int B = model_.blocks();
    Eigen::VectorXd u = start.cwiseMax(0.0).cwiseMin(1.0);
    Eigen::VectorXd h(B);
    Eigen::VectorXd slope(B);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(B, B);

    double residual = INFINITY;
    for (long iter = 0; iter < kMaxIterations; ++iter) {
        for (int s = 0; s < B; ++s) {
            const double g = g1(c_(s), u(s));
            h(s) = 1.0 - phi.phi(s) + phi.phi(s) * g;
            slope(s) = phi.phi(s) * c_(s) * g;
        }
        const Eigen::VectorXd fu = mixing_ * h;
        const Eigen::VectorXd gap = fu - u;
        residual = gap.cwiseAbs().maxCoeff();

        Eigen::VectorXd next = fu;
        const Eigen::MatrixXd lhs = identity - mixing_ * slope.asDiagonal();
        const Eigen::VectorXd step = lhs.partialPivLu().solve(gap);
        if (step.allFinite() && step.minCoeff() >= -1e-15) {
            const Eigen::VectorXd candidate = (u + step).cwiseMin(1.0);
            if ((map(phi, candidate) - candidate).minCoeff() >= -1e-14) next = candidate;
        }

        const double change = (next - u).cwiseAbs().maxCoeff();
        u = next;
        if (change < kChangeTolerance) {
            residual = (map(phi, u) - u).cwiseAbs().maxCoeff();
            if (residual < kResidualTolerance) {
                if ((1.0 - u.array()).maxCoeff() < 1e-8 && unit_is_least_fixed_point(phi))
                    u.setOnes();
                return u;
            }
        }
    }
    throw ConvergenceError("self-consistency iteration did not converge", residual);
}

double Percolation::giant(const PhiVector& phi, const Eigen::VectorXd& u) const
{
    double s = 0.0;
    for (int r = 0; r < model_.blocks(); ++r)
        s += model_.size(r) * phi.phi(r) * (1.0 - g0(c_(r), u(r)));
    return s;
}

SCurve Percolation::curve(Schedule schedule, int grid_size) const
{
    if (grid_size < 3 || grid_size % 2 == 0)
        throw std::invalid_argument("grid size must be odd and at least 3");
    const int B = model_.blocks();
    SCurve out;
    out.q_grid.resize(grid_size);
    out.s_values.resize(grid_size);

    // Survival fractions fall with q under both schedules, so the solution at
    // the previous grid point is a sub-solution for the next one.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(B);
    bool collapsed = false;
    for (int i = 0; i < grid_size; ++i) {
        const double q = static_cast<double>(i) / (grid_size - 1);
        out.q_grid[i] = q;
        if (collapsed) {
            out.s_values[i] = 0.0;
            continue;
        }
        const PhiVector p = phi(schedule, q);
        try {
            u = solve(p, u);
        } catch (const ConvergenceError& err) {
            throw ConvergenceError(std::string(err.what()) + " at q = " + std::to_string(q),
                                   err.residual(), q);
        }
        collapsed = (u.array() == 1.0).all();
        out.s_values[i] = collapsed ? 0.0 : giant(p, u);
    }
    out.robustness = 2.0 * simpson(out.s_values, 1.0 / (grid_size - 1));
    return out;
}

PhiVector phi_for(const BlockModel& model, Schedule schedule, double q)
{
    return Percolation(model).phi(schedule, q);
}

Eigen::VectorXd solve_u(const BlockModel& model, const PhiVector& phi)
{
    return Percolation(model).solve(phi, Eigen::VectorXd::Zero(model.blocks()));
}

double giant_component(const BlockModel& model, const PhiVector& phi)
{
    const Percolation perc(model);
    return perc.giant(phi, perc.solve(phi, Eigen::VectorXd::Zero(model.blocks())));
}

SCurve s_curve(const BlockModel& model, Schedule schedule, int grid_size)
{
    return Percolation(model).curve(schedule, grid_size);
}

RobustnessPair robustness_pair(const BlockModel& model, int grid_size)
{
    const Percolation perc(model);
    return {perc.curve(Schedule::Targeted, grid_size).robustness,
            perc.curve(Schedule::Random, grid_size).robustness};
}

double simpson(std::span<const double> values, double h)
{
    const std::size_t n = values.size();
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("Simpson rule needs an odd number >= 3 of samples");
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) (i % 2 == 1 ? odd : even) += values[i];
    return h / 3.0 * (values.front() + 4.0 * odd + 2.0 * even + values.back());
}

}  // namespace sbmrobust
