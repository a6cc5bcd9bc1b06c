#pragma once

#include "sbmrobust/blockmodel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sbmrobust {

enum class Schedule { Random, Targeted };

std::string_view to_string(Schedule schedule);
/// Accepts "random" and "targeted"; throws std::invalid_argument otherwise.
Schedule parse_schedule(std::string_view text);

/// Per-block surviving fractions after removing a fraction q of all nodes.
struct PhiVector {
    Eigen::VectorXd phi;
    double q = 0.0;
};

struct SCurve {
    std::vector<double> q_grid;
    std::vector<double> s_values;
    double robustness = 0.0;
};

/// Robustness against targeted and random removal, in that order.
struct RobustnessPair {
    double targeted = 0.0;
    double random = 0.0;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, std::optional<double> q = {})
        : std::runtime_error(what), residual_(residual), q_(q) {}

    double residual() const { return residual_; }
    std::optional<double> q() const { return q_; }

private:
    double residual_;
    std::optional<double> q_;
};

inline constexpr int kDefaultGridSize = 201;

/*
 * Percolation state of one block model: block degrees, modified Poisson
 * parameters and mixing matrix, computed once and reused across q.
 *
 * The self-consistency map is
 *     F_r(u) = sum_s m_rs [1 - phi_s + phi_s g1_s(u_s)],
 * a monotone convex map on [0,1]^B with F(1) = 1. The least fixed point is
 * approached from below with Newton steps that are only accepted while
 * they keep the iterate a sub-solution (F(u) >= u); otherwise a plain
 * fixed-point step is taken.
 */
class Percolation {
public:
    explicit Percolation(const BlockModel& model);

    const BlockModel& model() const { return model_; }
    const Eigen::VectorXd& block_degrees() const { return kappa_; }
    const Eigen::VectorXd& poisson_params() const { return c_; }
    const Eigen::MatrixXd& mixing() const { return mixing_; }

    PhiVector phi(Schedule schedule, double q) const;

    /// F(u) for the given survival fractions.
    Eigen::VectorXd map(const PhiVector& phi, const Eigen::VectorXd& u) const;

    /// Least fixed point. `start` must be a sub-solution (e.g. zero, or the
    /// solution at a smaller q of the same schedule).
    Eigen::VectorXd solve(const PhiVector& phi, const Eigen::VectorXd& start) const;

    double giant(const PhiVector& phi, const Eigen::VectorXd& u) const;

    SCurve curve(Schedule schedule, int grid_size = kDefaultGridSize) const;

private:
    bool unit_is_least_fixed_point(const PhiVector& phi) const;

    BlockModel model_;
    Eigen::VectorXd kappa_;
    Eigen::VectorXd c_;
    Eigen::MatrixXd mixing_;
    bool equal_degrees_ = false;
};

PhiVector phi_for(const BlockModel& model, Schedule schedule, double q);

/// Least fixed point of the self-consistency system, iterated from u = 0.
Eigen::VectorXd solve_u(const BlockModel& model, const PhiVector& phi);

double giant_component(const BlockModel& model, const PhiVector& phi);

/// S(q) on a uniform grid of grid_size points (odd, >= 3) and
/// R = 2 * composite Simpson integral of S.
SCurve s_curve(const BlockModel& model, Schedule schedule, int grid_size = kDefaultGridSize);

RobustnessPair robustness_pair(const BlockModel& model, int grid_size = kDefaultGridSize);

/// Composite Simpson rule over uniformly spaced samples with step h.
double simpson(std::span<const double> values, double h);

}  // namespace sbmrobust
