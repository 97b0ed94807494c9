#pragma once

#include <vector>

#include "rgsym/scenarios.hpp"

namespace rgsym {

/// u(z, x) for each x by locating the foot point of the characteristic
/// x = x0 + eps z U(x0). Throws SolveError once characteristics cross.
std::vector<double> hopf_characteristics(const HopfScenario& s, double z, const std::vector<double>& xs,
                                         double xtol = 1e-14);

/// d u / d x at x = 0 by a centred difference of the characteristic solution.
double hopf_axis_slope(const HopfScenario& s, double z, double h = 1e-4);

/// Smallest z at which the foot-point map stops being monotone on [x_min, x_max].
double hopf_crossing_distance(const HopfScenario& s, double tol = 1e-12);

enum class Precision { Double, Quad };

struct GridOptions {
  int nodes = 0;            // 0 takes the scenario value
  double half_width = 0;    // 0 takes the scenario value or the profile default
  double cfl = 0;           // 0 takes the scenario value
  double dissipation = 5;   // strength of the fourth-difference damping
  int outputs = 100;        // axis samples on (0, z_max]
  Precision precision = Precision::Double;
  Expr initial_velocity = Expr(0);  // odd in x
};

struct AxisHistory {
  std::vector<double> z, I0, W0;
  // profiles at z_max
  std::vector<double> x, v, I;
  double dx = 0;
  long steps = 0;
  double max_cfl = 0;
};

/// Method of lines on x >= 0 with mirror symmetry at the axis.
AxisHistory optics_grid_solve(const OpticsScenario& s, double z_max, const GridOptions& opt = {});

struct GridStudy {
  std::vector<int> nodes;
  std::vector<AxisHistory> runs;
  std::vector<double> error;    // |I0 - reference| / reference at z_max, per run
  std::vector<double> order;    // observed orders between successive runs
  double richardson_error = 0;  // |I0(finest) - I0(next)| / (2^p - 1) with p = 2
};

GridStudy optics_grid_study(const OpticsScenario& s, double z_max, const std::vector<int>& nodes,
                            const GridOptions& opt = {});

struct SolitonAxis {
  std::vector<double> z, I0, I0z, W0;
  double z_blowup = 0;  // extrapolated singularity location
  double I_blowup = 0;  // intensity extrapolated to z_blowup
  double max_relation_residual = 0;
  bool blowup_detected = false;
};

/// Integrates the reduced invariance condition kappa^{I0} = 0 from the series seed.
SolitonAxis soliton_axis_ode(const OpticsScenario& s, int outputs = 400);

}  // namespace rgsym
