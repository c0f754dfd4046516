#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mkc/costs.hpp"
#include "mkc/ensemble.hpp"
#include "mkc/measures.hpp"

namespace mkc {

// Optimal coupling between two discrete measures with its dual certificate.
struct TransportPlan {
    EmpiricalMeasure rows;
    EmpiricalMeasure cols;
    Eigen::MatrixXd plan;       // rows.size() x cols.size()
    Eigen::MatrixXd cost;       // rho(x_i, y_j)
    double cost_value = 0.0;
    std::vector<double> dual_row;  // phi
    std::vector<double> dual_col;  // psi
    bool rational = false;         // weights were solved exactly over a common denominator

    double dual_value() const;
    // Largest phi_i + psi_j - c_ij (nonpositive for a feasible dual).
    double max_dual_violation() const;
    // Largest |phi_i + psi_j - c_ij| over cells carrying mass.
    double max_slackness_violation(double mass_floor = 0.0) const;
    double max_row_marginal_error() const;
    double max_col_marginal_error() const;
};

// (1/p) int_0^1 |F1^{-1}(q) - F2^{-1}(q)|^p dq on the merged weight partition.
double wasserstein_1d(const EmpiricalMeasure& u1, const EmpiricalMeasure& u2, const CostSpec& c);
double wasserstein_1d(const SortedMeasure1D& u1, const SortedMeasure1D& u2, double p);

// Exact primal-dual solve (successive shortest paths). N*M <= 1e6.
TransportPlan wasserstein_lp(const EmpiricalMeasure& u1, const EmpiricalMeasure& u2, const CostSpec& c);

// Optimal matching of two equal-size clouds: result[i] is the partner of point i.
std::vector<std::size_t> optimal_assignment(const EmpiricalMeasure& u1, const EmpiricalMeasure& u2,
                                            const CostSpec& c);

// rho(X_i, Y_i) per pair. Translation-invariant costs read the stored gap.
std::vector<double> pair_costs(const CoupledEnsemble& e, const CostSpec& c);
double coupled_cost(const CoupledEnsemble& e, const CostSpec& c);

// phi(x) + psi(y) <= |x - y|^p + 1e-10 on the product of the supports.
bool dual_feasibility(const std::function<double(double)>& phi, const std::function<double(double)>& psi, double p,
                      std::span<const double> xs, std::span<const double> ys);
bool dual_feasibility(std::span<const double> phi, std::span<const double> psi, double p, std::span<const double> xs,
                      std::span<const double> ys);

} // namespace mkc
