#pragma once

// CSV / JSON emission for trajectories, traces, and residual tables. Numeric
// fields are printed with 17 significant digits so files round-trip losslessly.

#include "sweep/mesh.hpp"

#include <map>
#include <string>
#include <vector>

namespace sweep {

std::string format_number(Scalar v);  // %.17g

struct Trajectory {
  ControlPath ctrl;
  StatePath state;
};

// Header: t, x0..x{n-1}, u0..u{m*n-1}, b0..b{m-1}, eta0..eta{m-1}; one row per
// node with the eta cells left blank on the last row.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path, Index n, Index m, Scalar tau = 0.0);

void write_trace_csv(const std::string& path,
                     const std::vector<std::pair<int, Scalar>>& cost_trace);

void write_residuals_csv(const std::string& path, const std::map<std::string, Scalar>& residuals);

void write_convergence_csv(const std::string& path, const struct ConvergenceTable& table);

}  // namespace sweep
