#pragma once

#include <functional>
#include <vector>

#include "mkc/costs.hpp"
#include "mkc/measures.hpp"
#include "mkc/series.hpp"

namespace mkc {

// Doubled-variable densities v(x, y) live on square 2D grids (equal spacing
// and shape on both axes); the boundary of the box is reflecting.

struct GridMonitor {
    double t = 0.0;
    double mass = 0.0;
    double min_value = 0.0;
    double cost_integral = 0.0;
};

struct CouplingGridRun {
    GridDensity v;
    GridDensity u1;  // x-marginal of v
    GridDensity u2;  // y-marginal of v
    double time = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    std::vector<GridMonitor> monitors;
};

struct GridRunOptions {
    double T = 1.0;
    double dt = 0.0;               // 0 picks the largest stable step
    std::size_t checkpoints = 11;  // including t = 0 and t = T
    CostSpec cost = cost::Power{2.0};
};

// x- and y-marginals of a 2D density (as 1D densities).
GridDensity marginal(const GridDensity& v, std::size_t axis);

double l1_distance(const GridDensity& a, const GridDensity& b);

// dv/dt = (d/dx + d/dy)^2 v, one 1D diffusion per diagonal x - y = const.
CouplingGridRun solve_coupling_heat(const GridDensity& v0, const GridRunOptions& options);
// Same operator assembled in 2D as d_xx + d_yy + 7-point mixed stencil.
CouplingGridRun solve_coupling_heat_direct(const GridDensity& v0, const GridRunOptions& options);

// dv/dt = (d/dx + d/dy)^2 v - d_x(V(x) v) - d_y(V(y) v), limited upwind fluxes.
CouplingGridRun solve_coupling_fp(const GridDensity& v0, const ScalarField& V, const GridRunOptions& options);

// dv/dt = d_xx(s(x)^2 v) + d_yy(s(y)^2 v) + 2 d_xy(s(x) s(y) v).
CouplingGridRun solve_coupling_varcoef(const GridDensity& v0, const ScalarField& sigma, const GridRunOptions& options);

// 1D references for the marginals: Crank-Nicolson heat, and the 1D analogue
// of the coupled FP scheme.
GridDensity solve_heat_1d(const GridDensity& u0, double T, double dt);
GridDensity solve_fp_1d(const GridDensity& u0, const ScalarField& V, double T, double dt);

// Lattice hZ cut to [-R, R]; values are densities (site mass = u h).
struct Lattice {
    double h = 0.1;
    double R = 5.0;
    std::size_t sites() const;
    double site(std::size_t k) const;
};

struct LatticeSolution {
    Lattice lattice;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
};

// du/dt = [u(x+h) + u(x-h) - 2u(x)] / h^2, RK4 with dt <= h^2/4.
LatticeSolution solve_discrete_heat(const Lattice& lattice, std::vector<double> u0, double T, std::size_t checkpoints,
                                    double dt = 0.0);

std::vector<double> lattice_atom(const Lattice& lattice, double x);

struct DualityCheckpoint {
    double t = 0.0;
    double distance = 0.0;          // d_p
    double dual_value = 0.0;
    double duality_gap = 0.0;
    double dual_violation = 0.0;    // max phi + psi - c, all lattice pairs
    double shifted_violation = 0.0; // same for the shifts by +h and -h on the interior
    bool in_qp = false;             // p (phi, psi) and both shifts satisfy the Q_p constraint
};

struct DualityExperiment {
    DistanceSeries series;
    std::vector<DualityCheckpoint> checkpoints;
};

DualityExperiment discrete_duality_experiment(const Lattice& lattice, const std::vector<double>& u1_0,
                                              const std::vector<double>& u2_0, double p, double T,
                                              std::size_t checkpoints);

} // namespace mkc
