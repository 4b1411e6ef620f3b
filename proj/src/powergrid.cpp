#include "privdet/powergrid.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "privdet/rng.hpp"

namespace privdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Matrix linearized_coupling(const GridSpec& grid) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.generators.size());
  require(n > 0, "grid: no generators");
  require(grid.reactance.rows() == n && grid.reactance.cols() == n,
          "grid: reactance matrix shape mismatch");
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::isinf(grid.reactance(i, i)),
            "grid: diagonal reactance must be +inf (no self line)");
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      const double x = grid.reactance(i, k);
      require(x == grid.reactance(k, i), "grid: reactance not symmetric");
      require(x > 0.0, "grid: reactance must be positive");
      if (std::isinf(x)) continue;
      const auto& gi = grid.generators[i];
      const auto& gk = grid.generators[k];
      l(i, k) = -(gi.voltage * gk.voltage / x) * std::cos(gi.angle - gk.angle);
    }
    l(i, i) = -l.row(i).sum();  // rows sum to zero

  }
  return l;
}

ContinuousGridModel grid_continuous_model(const GridSpec& grid,
                                          const std::vector<int>& attacked) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.generators.size());
  const Matrix l = linearized_coupling(grid);

  ContinuousGridModel m;
  m.A = Matrix::Zero(2 * n, 2 * n);
  m.A.topRightCorner(n, n) = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& g = grid.generators[i];
    require(g.inertia > 0.0, "grid: inertia must be positive");
    m.A.block(n + i, 0, 1, n) = -l.row(i) / g.inertia;
    m.A(n + i, n + i) = -g.damping / g.inertia;
  }

  m.B_a = Matrix::Zero(2 * n, static_cast<Eigen::Index>(attacked.size()));
  for (std::size_t c = 0; c < attacked.size(); ++c) {
    const int g = attacked[c];
    require(g >= 0 && g < n, "grid: attacked generator out of range");
    m.B_a(n + g, static_cast<Eigen::Index>(c)) =
        1.0 / grid.generators[g].inertia;
  }

  // Permutation to per-subsystem (angle, velocity) interleaving.
  std::vector<int> flat;
  for (const auto& group : grid.partition) {
    for (int g : group) flat.push_back(g);
  }
  require(static_cast<Eigen::Index>(flat.size()) == n,
          "grid: partition must cover every generator once");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(flat[static_cast<std::size_t>(i)] == i,
            "grid: partition groups must be ascending and contiguous");
  }
  m.permutation = Matrix::Zero(2 * n, 2 * n);
  Eigen::Index pos = 0;
  for (const auto& group : grid.partition) {
    for (int g : group) {
      m.permutation(pos++, g) = 1.0;      // angle of g
      m.permutation(pos++, n + g) = 1.0;  // velocity of g
    }
  }
  return m;
}

std::pair<Matrix, Matrix> discretize(const Matrix& A, const Matrix& B_a,
                                     double ts) {
  require(ts > 0.0, "discretize: sampling period must be positive");
  require(A.rows() == B_a.rows(), "discretize: A/B row mismatch");
  return {matrix_exponential(A * ts), exp_integral(A, ts) * B_a};
}

std::vector<GeneratorParams> load_generator_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("load_generator_table: cannot open " + path);
  }
  std::vector<GeneratorParams> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    int gen = 0, bus = 0;
    GeneratorParams g;
    if (!(row >> gen >> bus >> g.voltage >> g.angle >> g.power)) continue;
    out.push_back(g);
  }
  if (out.empty()) {
    throw std::invalid_argument("load_generator_table: no rows in " + path);
  }
  return out;
}

std::string default_generator_table() {
  return std::string(PRIVDET_DATA_DIR) + "/ieee39_generators.txt";
}

GridScenario benchmark_scenario(std::uint64_t seed,
                                const std::string& generator_table_path) {
  GridScenario sc;
  sc.grid.generators = load_generator_table(generator_table_path);
  require(sc.grid.generators.size() == 10,
          "benchmark_scenario: expected the ten-generator table");

  const double inertia[10] = {70, 10, 40, 30, 70, 30, 90, 80, 40, 50};
  for (int i = 0; i < 10; ++i) {
    sc.grid.generators[i].inertia = inertia[i];
    sc.grid.generators[i].damping = 10.0;
  }

  // Random all-to-all line reactances |N(0, 0.01)|, floored away from 0.
  GaussianStream lines(derive_seed(seed, 0, StreamKind::kTrial));
  sc.grid.reactance = Matrix::Constant(10, 10, kInf);
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      const double x = std::max(std::abs(0.1 * lines.next()), 1e-3);
      sc.grid.reactance(i, j) = x;
      sc.grid.reactance(j, i) = x;
    }
  }
  sc.grid.partition = {{0, 1, 2}, {3, 4, 5, 6}, {7, 8, 9}};
  sc.grid.ts = 0.1;
  sc.attacked = {0, 3, 7};
  sc.horizon = 3;
  sc.p_false_alarm = 0.05;

  const ContinuousGridModel cm = grid_continuous_model(sc.grid, sc.attacked);
  const Matrix a_c = cm.permutation * cm.A * cm.permutation.transpose();
  const Matrix b_c = cm.permutation * cm.B_a;
  const auto [a_d, b_d] = discretize(a_c, b_c, sc.grid.ts);

  // Slice the global model into the three subsystems; each attack column
  // is kept only on the rows of the subsystem owning that generator.
  const std::vector<Eigen::Index> dims = {6, 8, 6};
  const std::vector<double> meas_var = {1.0, 0.5, 1.0};
  std::vector<Eigen::Index> offset = {0, 6, 14};
  for (int i = 0; i < 3; ++i) {
    SubsystemModel sub;
    const Eigen::Index n = dims[i], off = offset[i];
    sub.A = a_d.block(off, off, n, n);
    sub.B = Matrix(n, 20 - n);
    Eigen::Index col = 0;
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      sub.B.middleCols(col, dims[j]) = a_d.block(off, offset[j], n, dims[j]);
      col += dims[j];
    }
    sub.B_a = b_d.block(off, i, n, 1);
    sub.C = Matrix::Identity(n, n);
    sub.sigma_w = 0.5 * Matrix::Identity(n, n);
    sub.sigma_v = meas_var[static_cast<std::size_t>(i)] *
                  Matrix::Identity(n, n);
    sub.sigma_x0 = Matrix::Identity(n, n);
    sc.system.subsystems.push_back(std::move(sub));
  }
  sc.system.validate();

  // Nested sharing configurations for the two neighbors of subsystem 1:
  // everything; everything/only generator-8-and-9 pairs; first six of
  // subsystem 2 and first four of subsystem 3.
  auto share_all = [](Eigen::Index p) {
    return PrivacyMechanism{Matrix::Identity(p, p), Matrix::Zero(p, p)};
  };
  auto share_top = [](Eigen::Index rows, Eigen::Index p) {
    return PrivacyMechanism{Matrix::Identity(p, p).topRows(rows),
                            Matrix::Identity(rows, rows)};
  };
  sc.mechanism_sets = {
      {share_all(8), share_all(6)},
      {share_all(8), share_top(4, 6)},
      {share_top(6, 8), share_top(4, 6)},
  };
  return sc;
}

}  // namespace privdet
