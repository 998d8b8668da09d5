#include "sweep/io.hpp"

#include "sweep/sweeping.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sweep {

std::string format_number(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  const Mesh& mesh = traj.ctrl.mesh;
  const Index n = traj.ctrl.n();
  const Index m = traj.ctrl.m();
  std::ofstream f(path);
  if (!f) throw BadConfig("cannot open " + path + " for writing");

  f << "t";
  for (Index i = 0; i < n; ++i) f << ",x" << i;
  for (Index i = 0; i < m * n; ++i) f << ",u" << i;
  for (Index i = 0; i < m; ++i) f << ",b" << i;
  for (Index i = 0; i < m; ++i) f << ",eta" << i;
  f << "\n";

  for (int j = 0; j <= mesh.k; ++j) {
    f << format_number(mesh.t(j));
    for (Index i = 0; i < n; ++i) f << "," << format_number(traj.state.x(j, i));
    const Matrix& uj = traj.ctrl.u[static_cast<size_t>(j)];
    for (Index r = 0; r < m; ++r)
      for (Index c = 0; c < n; ++c) f << "," << format_number(uj(r, c));
    for (Index i = 0; i < m; ++i) f << "," << format_number(traj.ctrl.b(j, i));
    for (Index i = 0; i < m; ++i) {
      f << ",";
      if (j < mesh.k) f << format_number(traj.state.eta(j, i));
    }
    f << "\n";
  }
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace

Trajectory read_trajectory_csv(const std::string& path, Index n, Index m, Scalar tau) {
  std::ifstream f(path);
  if (!f) throw BadConfig("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw BadConfig("empty trajectory file " + path);

  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv(line));
  }
  if (rows.size() < 2) throw BadConfig("trajectory needs at least two nodes");
  const int k = static_cast<int>(rows.size()) - 1;
  const size_t expect = 1 + static_cast<size_t>(n + m * n + 2 * m);
  for (const auto& r : rows)
    if (r.size() != expect) throw BadConfig("trajectory row has wrong column count");

  const Scalar T = std::stod(rows.back()[0]);
  Trajectory traj;
  traj.ctrl.mesh = Mesh(T, k);
  traj.ctrl.tau = tau;
  traj.state.mesh = traj.ctrl.mesh;
  traj.state.x.resize(k + 1, n);
  traj.state.eta = Matrix::Zero(k, m);
  traj.ctrl.b.resize(k + 1, m);
  traj.ctrl.u.assign(static_cast<size_t>(k) + 1, Matrix(m, n));

  for (int j = 0; j <= k; ++j) {
    const auto& r = rows[static_cast<size_t>(j)];
    size_t col = 1;
    for (Index i = 0; i < n; ++i) traj.state.x(j, i) = std::stod(r[col++]);
    for (Index ri = 0; ri < m; ++ri)
      for (Index ci = 0; ci < n; ++ci) traj.ctrl.u[static_cast<size_t>(j)](ri, ci) = std::stod(r[col++]);
    for (Index i = 0; i < m; ++i) traj.ctrl.b(j, i) = std::stod(r[col++]);
    for (Index i = 0; i < m; ++i) {
      const std::string& cell = r[col++];
      if (j < k && !cell.empty()) traj.state.eta(j, i) = std::stod(cell);
    }
  }
  return traj;
}

void write_trace_csv(const std::string& path,
                     const std::vector<std::pair<int, Scalar>>& cost_trace) {
  std::ofstream f(path);
  if (!f) throw BadConfig("cannot open " + path + " for writing");
  f << "iter,cost\n";
  for (const auto& [it, c] : cost_trace) f << it << "," << format_number(c) << "\n";
}

void write_residuals_csv(const std::string& path, const std::map<std::string, Scalar>& residuals) {
  std::ofstream f(path);
  if (!f) throw BadConfig("cannot open " + path + " for writing");
  f << "condition,residual\n";
  for (const auto& [name, v] : residuals) f << name << "," << format_number(v) << "\n";
}

void write_convergence_csv(const std::string& path, const ConvergenceTable& table) {
  std::ofstream f(path);
  if (!f) throw BadConfig("cannot open " + path + " for writing");
  f << "k,error,order\n";
  for (size_t i = 0; i < table.rows.size(); ++i) {
    f << table.rows[i].k << "," << format_number(table.rows[i].error) << ",";
    if (i > 0 && i - 1 < table.orders.size()) f << format_number(table.orders[i - 1]);
    f << "\n";
  }
}

}  // namespace sweep
