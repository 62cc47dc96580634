#include "bec/plant.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bec/linalg.hpp"

namespace bec::plant {

double KSpec::operator()(double t) const {
  double k = c0;
  for (const auto& term : terms) {
    const double base = term.fn == Fn::Cos2 ? std::cos(term.freq * t)
                                            : std::sin(term.freq * t);
    k += term.coef * base * base;
  }
  return k;
}

void SimConfig::validate() const {
  if (n < 2 || m < 1) {
    throw std::invalid_argument("need n >= 2 agents and m >= 1 coordinates");
  }
  gains.validate();
  if (dt <= 0.0 || horizon <= 0.0 || log_stride < 1 || mat_stride < 1) {
    throw std::invalid_argument("invalid integrator settings");
  }
  if (sched.empty()) {
    throw std::invalid_argument("schedule is empty");
  }
  if (sched.node_count() != n) {
    throw std::invalid_argument("schedule node count does not match n");
  }
  if (sched.horizon() + 1e-9 < horizon) {
    throw std::invalid_argument("schedule does not cover the horizon");
  }
  const Eigen::Index mn = static_cast<Eigen::Index>(m) * n;
  if (bias.size() != mn || q0.size() != mn || qdot0.size() != mn) {
    throw std::invalid_argument("bias/q0/qdot0 must have length m*n");
  }
  if (!theta0.empty() && static_cast<int>(theta0.size()) != n) {
    throw std::invalid_argument("theta0 must have one entry per agent");
  }
  for (double t = 0.0; t <= horizon; t += std::max(horizon / 1000.0, dt)) {
    if (k(t) <= 0.0) {
      throw std::invalid_argument("k(t) must stay strictly positive");
    }
  }
}

NetworkState initial_state(const SimConfig& cfg) {
  NetworkState st;
  st.t = 0.0;
  st.q = cfg.q0;
  st.qdot = cfg.qdot0;
  const int p = cfg.m * cfg.n + 2;
  for (int i = 0; i < cfg.n; ++i) {
    const Vector theta0 =
        cfg.theta0.empty() ? Vector(Vector::Zero(p)) : cfg.theta0[i];
    st.ctrl.push_back(controller::ControllerState::initial(
        cfg.n, cfg.m, i, theta0, cfg.qdot0.segment(i * cfg.m, cfg.m)));
  }
  return st;
}

std::vector<controller::MeasurementSet> measurements(
    const NetworkState& state, const Vector& bias,
    const graph::WeightedAdjacency& adj) {
  const int n = adj.size();
  const int m = static_cast<int>(state.q.size()) / n;
  const int mn = m * n;
  std::vector<controller::MeasurementSet> out(n);
  const Matrix q_signless = graph::laplacian_matrices(adj).signless;
  for (int i = 0; i < n; ++i) {
    auto& ms = out[i];
    ms.own_vel = state.qdot.segment(i * m, m);
    ms.q_row = q_signless.row(i);
    for (int j = 0; j < n; ++j) {
      if (j == i || adj(i, j) <= 0.0) continue;
      controller::NeighborData nb;
      nb.index = j;
      nb.weight = adj(i, j);
      const Vector qi = state.q.segment(i * m, m);
      const Vector qj = state.q.segment(j * m, m);
      nb.z_ij = qi - qj + bias.segment(i * m, m);
      nb.z_ji = qj - qi + bias.segment(j * m, m);
      nb.relvel = ms.own_vel - state.qdot.segment(j * m, m);
      nb.bhat_j = state.ctrl[j].theta_hat.tail(mn);
      nb.theta_hat_j = state.ctrl[j].theta_hat;
      ms.neighbors.push_back(std::move(nb));
    }
  }
  return out;
}

StateDerivative closed_loop_derivative(const NetworkState& state,
                                       const SimConfig& cfg) {
  return closed_loop_derivative(state, cfg, cfg.sched.at(state.t));
}

StateDerivative closed_loop_derivative(const NetworkState& state,
                                       const SimConfig& cfg,
                                       const graph::WeightedAdjacency& adj) {
  const int n = cfg.n;
  const int m = cfg.m;
  const double k_t = cfg.k(state.t);
  const auto meas = measurements(state, cfg.bias, adj);

  StateDerivative d;
  d.qddot = Vector::Zero(n * m);
  d.u = Vector::Zero(n * m);
  d.w = Vector::Zero(n * m);
  d.theta_dot.resize(n);
  d.filters.resize(n);

  for (int i = 0; i < n; ++i) {
    const auto& cs = state.ctrl[i];
    const Vector qdot_i = state.qdot.segment(i * m, m);
    const Matrix y_f =
        controller::filtered_regressor(cs, qdot_i, state.t, cfg.gains.beta);
    d.theta_dot[i] =
        controller::adaptation_derivative(meas[i], cs, y_f, cfg.gains);
    auto [w_i, u_i] =
        controller::control_w_u(meas[i], cs, d.theta_dot[i], cfg.gains, k_t);
    d.filters[i] = controller::filter_derivatives(
        cs, w_i, y_f, qdot_i, meas[i].q_row, k_t, cfg.gains.beta);
    if (!u_i.allFinite() || !d.theta_dot[i].allFinite()) {
      std::ostringstream msg;
      msg << "non-finite derivative for agent " << i << " at t = " << state.t;
      throw std::runtime_error(msg.str());
    }
    d.qddot.segment(i * m, m) = u_i;
    d.u.segment(i * m, m) = u_i;
    d.w.segment(i * m, m) = w_i;
  }
  return d;
}

namespace {

// Flat layout: q, qdot, then per agent theta, Y_F2 (col-major), h, w_F,
// Y_IF (col-major), w_IF.
int flat_dim(int n, int m) {
  const int p = m * n + 2;
  return 2 * m * n + n * (p + m * p + 2 * m + p * p + p);
}

void pack(const NetworkState& st, Vector& y) {
  const int n = static_cast<int>(st.ctrl.size());
  const int m = static_cast<int>(st.ctrl.front().m);
  const int p = m * n + 2;
  const int mn = m * n;
  y.segment(0, mn) = st.q;
  y.segment(mn, mn) = st.qdot;
  int off = 2 * mn;
  for (int i = 0; i < n; ++i) {
    const auto& cs = st.ctrl[i];
    y.segment(off, p) = cs.theta_hat;
    off += p;
    y.segment(off, m * p) = Eigen::Map<const Vector>(cs.y_f2.data(), m * p);
    off += m * p;
    y.segment(off, m) = cs.h;
    off += m;
    y.segment(off, m) = cs.w_f;
    off += m;
    y.segment(off, p * p) = Eigen::Map<const Vector>(cs.y_if.data(), p * p);
    off += p * p;
    y.segment(off, p) = cs.w_if;
    off += p;
  }
}

void unpack(const Vector& y, NetworkState& st) {
  const int n = static_cast<int>(st.ctrl.size());
  const int m = st.ctrl.front().m;
  const int p = m * n + 2;
  const int mn = m * n;
  st.q = y.segment(0, mn);
  st.qdot = y.segment(mn, mn);
  int off = 2 * mn;
  for (int i = 0; i < n; ++i) {
    auto& cs = st.ctrl[i];
    cs.theta_hat = y.segment(off, p);
    off += p;
    cs.y_f2 = Eigen::Map<const Matrix>(y.segment(off, m * p).data(), m, p);
    off += m * p;
    cs.h = y.segment(off, m);
    off += m;
    cs.w_f = y.segment(off, m);
    off += m;
    cs.y_if = Eigen::Map<const Matrix>(y.segment(off, p * p).data(), p, p);
    off += p * p;
    cs.w_if = y.segment(off, p);
    off += p;
  }
}

void pack_derivative(const StateDerivative& d, const NetworkState& st,
                     Vector& out) {
  const int n = static_cast<int>(st.ctrl.size());
  const int m = st.ctrl.front().m;
  const int p = m * n + 2;
  const int mn = m * n;
  out.segment(0, mn) = st.qdot;
  out.segment(mn, mn) = d.qddot;
  int off = 2 * mn;
  for (int i = 0; i < n; ++i) {
    const auto& f = d.filters[i];
    out.segment(off, p) = d.theta_dot[i];
    off += p;
    out.segment(off, m * p) =
        Eigen::Map<const Vector>(f.y_f2_dot.data(), m * p);
    off += m * p;
    out.segment(off, m) = f.h_dot;
    off += m;
    out.segment(off, m) = f.w_f_dot;
    off += m;
    out.segment(off, p * p) =
        Eigen::Map<const Vector>(f.y_if_dot.data(), p * p);
    off += p * p;
    out.segment(off, p) = f.w_if_dot;
    off += p;
  }
}

} // namespace

Vector TrajectoryLog::btilde(size_t point) const {
  const int mn = m * n;
  Vector out(static_cast<Eigen::Index>(n) * mn);
  for (int k = 0; k < n; ++k) {
    out.segment(static_cast<Eigen::Index>(k) * mn, mn) =
        bias - theta_agent(point, k).tail(mn);
  }
  return out;
}

TrajectoryLog integrate(const SimConfig& cfg) {
  cfg.validate();
  NetworkState st = initial_state(cfg);
  const int n = cfg.n;
  const int m = cfg.m;
  const int p = m * n + 2;
  const int dim = flat_dim(n, m);

  Vector y(dim), k1(dim), k2(dim), k3(dim), k4(dim), ytmp(dim);
  pack(st, y);

  std::vector<double> boundaries;
  for (const auto& seg : cfg.sched.segments()) {
    if (seg.t_start > 1e-12 && seg.t_start < cfg.horizon - 1e-12) {
      boundaries.push_back(seg.t_start);
    }
  }
  size_t next_boundary = 0;

  TrajectoryLog log;
  log.n = n;
  log.m = m;
  log.bias = cfg.bias;

  NetworkState scratch = st;
  auto rhs = [&](double t, const Vector& yy, Vector& out,
                 const graph::WeightedAdjacency& adj) {
    scratch.t = t;
    unpack(yy, scratch);
    const StateDerivative d = closed_loop_derivative(scratch, cfg, adj);
    pack_derivative(d, scratch, out);
  };

  auto log_point = [&](double t) {
    unpack(y, st);
    st.t = t;
    log.times.push_back(t);
    log.q.push_back(st.q);
    log.qdot.push_back(st.qdot);
    log.k_values.push_back(cfg.k(t));
    Vector theta(static_cast<Eigen::Index>(n) * p);
    std::vector<Matrix> yfs;
    Matrix gram_sum = Matrix::Zero(p, p);
    for (int i = 0; i < n; ++i) {
      theta.segment(static_cast<Eigen::Index>(i) * p, p) =
          st.ctrl[i].theta_hat;
      yfs.push_back(controller::filtered_regressor(
          st.ctrl[i], st.qdot.segment(i * m, m), t, cfg.gains.beta));
      gram_sum += st.ctrl[i].y_if;
    }
    log.theta.push_back(std::move(theta));
    log.y_f.push_back(std::move(yfs));
    log.gramian_min_eig.push_back(linalg::min_eigenvalue(gram_sum));
    const StateDerivative d =
        closed_loop_derivative(st, cfg, cfg.sched.at(std::min(
                                            t, cfg.sched.horizon() - 1e-12)));
    log.u.push_back(d.u);
  };
  auto mat_log_point = [&](double t) {
    unpack(y, st);
    log.mat_times.push_back(t);
    std::vector<Matrix> yifs;
    std::vector<Vector> wifs;
    for (int i = 0; i < n; ++i) {
      yifs.push_back(st.ctrl[i].y_if);
      wifs.push_back(st.ctrl[i].w_if);
    }
    log.y_if.push_back(std::move(yifs));
    log.w_if.push_back(std::move(wifs));
  };

  double t = 0.0;
  long step = 0;
  log_point(0.0);
  mat_log_point(0.0);

  while (t < cfg.horizon - 1e-12) {
    while (next_boundary < boundaries.size() &&
           boundaries[next_boundary] <= t + 1e-12) {
      ++next_boundary;
    }
    double h = std::min(cfg.dt, cfg.horizon - t);
    if (next_boundary < boundaries.size()) {
      h = std::min(h, boundaries[next_boundary] - t);
    }
    const auto& adj = cfg.sched.at(t + 0.5 * h);

    rhs(t, y, k1, adj);
    ytmp = y + 0.5 * h * k1;
    rhs(t + 0.5 * h, ytmp, k2, adj);
    ytmp = y + 0.5 * h * k2;
    rhs(t + 0.5 * h, ytmp, k3, adj);
    ytmp = y + h * k3;
    rhs(t + h, ytmp, k4, adj);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    ++step;

    if (y.norm() > cfg.blowup) {
      std::ostringstream msg;
      msg << "state blow-up at t = " << t << " (norm " << y.norm() << ")";
      throw std::runtime_error(msg.str());
    }
    const bool at_end = t >= cfg.horizon - 1e-12;
    if (step % cfg.log_stride == 0 || at_end) log_point(t);
    if (step % cfg.mat_stride == 0 || at_end) mat_log_point(t);
  }
  return log;
}

ConsensusMetrics consensus_metrics(const TrajectoryLog& log) {
  if (log.times.empty()) {
    throw std::invalid_argument("empty trajectory log");
  }
  ConsensusMetrics out;
  const int n = log.n;
  const int m = log.m;
  for (size_t pt = 0; pt < log.times.size(); ++pt) {
    double max_pair = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        max_pair = std::max(max_pair, (log.q[pt].segment(i * m, m) -
                                       log.q[pt].segment(j * m, m))
                                          .norm());
      }
    }
    out.max_pairwise_pos.push_back(max_pair);
    out.vel_norm.push_back(log.qdot[pt].norm());
    out.bias_err_norm.push_back(log.btilde(pt).norm());
  }
  return out;
}

} // namespace bec::plant
