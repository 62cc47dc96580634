#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

// Time-varying undirected weighted graph algebra: Laplacians, incidence
// matrices, union graphs, connectivity and bipartiteness.

namespace bec::graph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric non-negative weight matrix with zero diagonal. Immutable.
class WeightedAdjacency {
public:
  explicit WeightedAdjacency(Matrix weights,
                             std::optional<double> max_weight = std::nullopt);

  static WeightedAdjacency zero(int n) {
    return WeightedAdjacency(Matrix::Zero(n, n));
  }

  int size() const { return static_cast<int>(a_.rows()); }
  const Matrix& weights() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

private:
  Matrix a_;
};

// Piecewise-constant adjacency over [0, horizon]; segments contiguous.
class GraphSchedule {
public:
  struct Segment {
    double t_start;
    double t_end;
    WeightedAdjacency adj;
  };

  GraphSchedule() = default; // empty; must be assigned before use
  explicit GraphSchedule(std::vector<Segment> segments);

  bool empty() const { return segments_.empty(); }

  double horizon() const { return segments_.back().t_end; }
  int node_count() const { return segments_.front().adj.size(); }
  const std::vector<Segment>& segments() const { return segments_; }

  // Segment active at time t; half-open [t_start, t_end), last segment
  // closed at the horizon.
  const WeightedAdjacency& at(double t) const;

  // Switch instants interior to [t0, t1].
  std::vector<double> boundaries_in(double t0, double t1) const;

private:
  std::vector<Segment> segments_;
};

// Lexicographic enumeration of the n(n-1)/2 unordered pairs (i,j), i<j.
// Columns of the incidence matrix follow this order; the lower-index node
// is the tail (+sqrt(a)), the higher-index node the head (-sqrt(a)).
struct EdgeIndexing {
  int n;

  explicit EdgeIndexing(int node_count) : n(node_count) {}
  int edge_count() const { return n * (n - 1) / 2; }
  int column(int i, int j) const;                // i < j
  std::pair<int, int> pair_of(int column) const; // inverse
};

struct LaplacianSet {
  Matrix laplacian; // L = D - A
  Matrix signless;  // Q = D + A
  Matrix degree;    // D
};

LaplacianSet laplacian_matrices(const WeightedAdjacency& adj);

// n x n(n-1)/2, columns per EdgeIndexing; H * H^T == L.
Matrix weighted_incidence(const WeightedAdjacency& adj);

struct BipartiteResult {
  bool bipartite;
  // side[i] in {0,1} when bipartite (component-wise 2-coloring), empty
  // otherwise.
  std::vector<int> side;
};

BipartiteResult is_bipartite(const WeightedAdjacency& adj);

bool is_connected(const WeightedAdjacency& adj);

// Entrywise integral of the adjacency over [t0, t1]; exact for the
// piecewise-constant schedule.
WeightedAdjacency union_graph(const GraphSchedule& sched, double t0, double t1);

// True iff every window [t, t+T] in the horizon accumulates, after
// thresholding edge integrals at delta, a connected graph. Window starts are
// scanned at segment boundaries plus a grid of step grid_step (default T/20).
bool is_jointly_connected(const GraphSchedule& sched, double delta, double T,
                          double grid_step = -1.0);

// Unit vector h with H h = 0. Smallest right singular vector, sign fixed so
// the first entry above 1e-12 in magnitude is positive. Throws if the kernel
// is trivial (n = 2 with the edge present).
Vector kernel_unit_vector(const Matrix& incidence);

// N = H + 1 h^T / sqrt(n); satisfies N N^T = L + 1 1^T / n for connected
// graphs and is persistently exciting along jointly connected schedules.
Matrix pe_factor(const WeightedAdjacency& adj);

} // namespace bec::graph
