#include "bec/graph.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace bec::graph {

namespace {
constexpr double kSymTol = 1e-12;
} // namespace

WeightedAdjacency::WeightedAdjacency(Matrix weights,
                                     std::optional<double> max_weight)
    : a_(std::move(weights)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1) {
    throw std::invalid_argument("adjacency must be square and non-empty");
  }
  const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    if (std::abs(a_(i, i)) > 0.0) {
      throw std::invalid_argument("adjacency must have zero diagonal");
    }
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
      if (a_(i, j) < 0.0) {
        throw std::invalid_argument("adjacency weights must be non-negative");
      }
      if (std::abs(a_(i, j) - a_(j, i)) > kSymTol * scale) {
        throw std::invalid_argument("adjacency must be symmetric");
      }
      if (max_weight && a_(i, j) > *max_weight) {
        throw std::invalid_argument("adjacency weight exceeds bound");
      }
    }
  }
}

GraphSchedule::GraphSchedule(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw std::invalid_argument("schedule needs at least one segment");
  }
  const int n = segments_.front().adj.size();
  double t = segments_.front().t_start;
  if (std::abs(t) > 1e-12) {
    throw std::invalid_argument("schedule must start at t = 0");
  }
  for (const auto& seg : segments_) {
    if (seg.adj.size() != n) {
      throw std::invalid_argument("all segments must share the node count");
    }
    if (std::abs(seg.t_start - t) > 1e-9 || seg.t_end <= seg.t_start) {
      throw std::invalid_argument("segments must be contiguous and ordered");
    }
    t = seg.t_end;
  }
}

const WeightedAdjacency& GraphSchedule::at(double t) const {
  if (t < 0.0 || t > horizon() + 1e-9) {
    throw std::out_of_range("time outside schedule horizon");
  }
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double v, const Segment& s) { return v < s.t_end; });
  if (it == segments_.end()) {
    return segments_.back().adj;
  }
  return it->adj;
}

std::vector<double> GraphSchedule::boundaries_in(double t0, double t1) const {
  std::vector<double> out;
  for (const auto& seg : segments_) {
    if (seg.t_start > t0 + 1e-12 && seg.t_start < t1 - 1e-12) {
      out.push_back(seg.t_start);
    }
  }
  return out;
}

int EdgeIndexing::column(int i, int j) const {
  if (i >= j || i < 0 || j >= n) {
    throw std::invalid_argument("edge index requires 0 <= i < j < n");
  }
  // columns before row block i, plus offset within it
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<int, int> EdgeIndexing::pair_of(int column) const {
  int i = 0;
  int remaining = column;
  while (remaining >= n - 1 - i) {
    remaining -= n - 1 - i;
    ++i;
  }
  return {i, i + 1 + remaining};
}

LaplacianSet laplacian_matrices(const WeightedAdjacency& adj) {
  const Matrix& a = adj.weights();
  Matrix d = Matrix::Zero(a.rows(), a.cols());
  d.diagonal() = a.rowwise().sum();
  return LaplacianSet{d - a, d + a, d};
}

Matrix weighted_incidence(const WeightedAdjacency& adj) {
  const int n = adj.size();
  EdgeIndexing idx(n);
  Matrix h = Matrix::Zero(n, idx.edge_count());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = adj(i, j);
      if (w > 0.0) {
        const int c = idx.column(i, j);
        h(i, c) = std::sqrt(w);
        h(j, c) = -std::sqrt(w);
      }
    }
  }
  return h;
}

BipartiteResult is_bipartite(const WeightedAdjacency& adj) {
  const int n = adj.size();
  std::vector<int> side(n, -1);
  for (int root = 0; root < n; ++root) {
    if (side[root] >= 0) continue;
    side[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < n; ++v) {
        if (adj(u, v) <= 0.0) continue;
        if (side[v] < 0) {
          side[v] = 1 - side[u];
          queue.push_back(v);
        } else if (side[v] == side[u]) {
          return {false, {}};
        }
      }
    }
  }
  return {true, side};
}

bool is_connected(const WeightedAdjacency& adj) {
  const int n = adj.size();
  std::vector<char> seen(n, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v = 0; v < n; ++v) {
      if (adj(u, v) > 0.0 && !seen[v]) {
        seen[v] = 1;
        ++count;
        queue.push_back(v);
      }
    }
  }
  return count == n;
}

WeightedAdjacency union_graph(const GraphSchedule& sched, double t0,
                              double t1) {
  if (t0 < -1e-12 || t1 > sched.horizon() + 1e-9 || t0 >= t1) {
    throw std::out_of_range("union window outside schedule horizon");
  }
  const int n = sched.node_count();
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& seg : sched.segments()) {
    const double lo = std::max(t0, seg.t_start);
    const double hi = std::min(t1, seg.t_end);
    if (hi > lo) {
      acc += (hi - lo) * seg.adj.weights();
    }
  }
  return WeightedAdjacency(std::move(acc));
}

bool is_jointly_connected(const GraphSchedule& sched, double delta, double T,
                          double grid_step) {
  if (delta <= 0.0 || T <= 0.0) {
    throw std::invalid_argument("delta and T must be positive");
  }
  if (T > sched.horizon() + 1e-9) {
    throw std::invalid_argument("window longer than schedule horizon");
  }
  if (grid_step <= 0.0) grid_step = T / 20.0;

  std::vector<double> starts;
  for (double t = 0.0; t <= sched.horizon() - T + 1e-9; t += grid_step) {
    starts.push_back(std::min(t, sched.horizon() - T));
  }
  for (const auto& seg : sched.segments()) {
    for (double t : {seg.t_start, seg.t_end - T}) {
      if (t >= 0.0 && t <= sched.horizon() - T + 1e-9) starts.push_back(t);
    }
  }
  starts.push_back(sched.horizon() - T);

  const int n = sched.node_count();
  for (double t : starts) {
    const WeightedAdjacency u = union_graph(sched, t, t + T);
    Matrix thr = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        thr(i, j) = u(i, j) >= delta ? u(i, j) : 0.0;
      }
    }
    if (!is_connected(WeightedAdjacency(std::move(thr)))) return false;
  }
  return true;
}

Vector kernel_unit_vector(const Matrix& incidence) {
  Eigen::JacobiSVD<Matrix> svd(incidence,
                               Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::Index cols = incidence.cols();
  const auto& sing = svd.singularValues();
  const double smax = sing.size() > 0 ? sing(0) : 0.0;
  // A kernel exists for free when the matrix is wide; otherwise the smallest
  // singular value must vanish.
  if (cols <= incidence.rows() &&
      sing(cols - 1) > 1e-10 * std::max(1.0, smax)) {
    throw std::runtime_error("incidence matrix has trivial kernel");
  }
  Vector h = svd.matrixV().col(cols - 1);
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (std::abs(h(i)) > 1e-12) {
      if (h(i) < 0.0) h = -h;
      break;
    }
  }
  return h / h.norm();
}

Matrix pe_factor(const WeightedAdjacency& adj) {
  const Matrix h = weighted_incidence(adj);
  const Vector k = kernel_unit_vector(h);
  const int n = adj.size();
  return h + Vector::Ones(n) * k.transpose() / std::sqrt(double(n));
}

} // namespace bec::graph
