#include "misac/sdr_ao.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "misac/channel.hpp"
#include "misac/conic/hermitian.hpp"

namespace misac {

using conic::Cone;
using conic::LinearForm;
using conic::ProblemBuilder;
using conic::SolveStatus;

namespace {

// Rows and violations are relative to the requirement, or in watts when it is zero.
double requirement_scale(double req) { return req > 0.0 ? req : 1.0; }

// Adds scale * (coef . params) to `row`, where the Hermitian coordinates are
// free variables starting at column `first`.
void add_on_params(ProblemBuilder& pb, int row, int first, const VectorXd& coef, double scale) {
  for (int p = 0; p < coef.size(); ++p) {
    if (coef(p) != 0.0) pb.add(row, first + p, scale * coef(p));
  }
}

// Rows first .. first + svec size - 1 of a PSD cone on the matrix whose
// Hermitian coordinates are sum_j scale_j * params at column first_j.
void add_psd_rows(ProblemBuilder& pb, int first_row, const std::vector<std::pair<int, double>>& parts,
                  const conic::ParamToSvec& embed) {
  for (int p = 0; p < static_cast<int>(embed.size()); ++p) {
    for (const auto& term : embed[p]) {
      if (term.index < 0) continue;
      for (const auto& [col, scale] : parts) pb.add(first_row + term.index, col + p, -scale * term.weight);
    }
  }
}

// C with Tr(C Z) = a^H Z D_m a: C = D_m a a^H.
MatrixXc transmit_pattern_matrix(int m, int i, int blocks, const AngularGrid& grid) {
  const int N = grid.antennas();
  const VectorXc a = grid.stacked_steering(i, blocks);
  MatrixXc C = MatrixXc::Zero(N * blocks, N * blocks);
  C.middleRows(m * N, N) = a.segment(m * N, N) * a.adjoint();
  return C;
}

std::vector<IdealPattern> transmit_masks(const DesignInstance& d, const AngularGrid& grid) {
  std::vector<IdealPattern> masks;
  for (int m = 0; m < d.num_blocks; ++m) masks.push_back(ideal_pattern(d.tx_center[m], d.beamwidth, grid));
  return masks;
}

void check_grid(const DesignInstance& d, const AngularGrid& grid) {
  d.validate();
  if (grid.antennas() != d.antennas || grid.size() != d.grid_size) {
    throw std::invalid_argument("subproblem: grid does not match the design instance");
  }
}

MatrixXc hermitian_part(const MatrixXc& X) { return 0.5 * (X + X.adjoint()); }

}  // namespace

TransmitSubproblem build_transmit_subproblem(const DesignInstance& d, const MatrixXc& V,
                                             const AngularGrid& grid, bool feasibility_only) {
  check_grid(d, grid);
  if (V.rows() != d.antennas || V.cols() != d.antennas) throw std::invalid_argument("transmit subproblem: V dimension");
  require_psd(V, "transmit subproblem V");

  const int n = d.stacked_dim();
  const int K = d.num_beams;
  const int I = grid.size();
  const int params = conic::hermitian_param_count(n);
  const auto embed = conic::hermitian_embedding_map(n);

  TransmitSubproblem out;
  TransmitMap& map = out.map;
  map.dim = n;
  map.grid_size = I;
  ProblemBuilder pb;
  map.z = pb.add_variables(params);
  for (int k = 0; k + 1 < K; ++k) map.w.push_back(pb.add_variables(params));
  if (!feasibility_only) {
    for (int m = 0; m < d.num_blocks; ++m) map.zeta.push_back(pb.add_variables(1));
    for (int m = 0; m < d.num_blocks; ++m) map.t.push_back(pb.add_variables(I));
  }

  // Beam k < K-1 has its own coordinates; the last one is Z minus the others.
  std::vector<std::vector<std::pair<int, double>>> beam(K);
  for (int k = 0; k + 1 < K; ++k) beam[k] = {{map.w[k], 1.0}};
  beam[K - 1] = {{map.z, 1.0}};
  for (int k = 0; k + 1 < K; ++k) beam[K - 1].emplace_back(map.w[k], -1.0);
  const auto add_beam_form = [&](int row, int k, const VectorXd& coef, double scale) {
    for (const auto& [col, s] : beam[k]) add_on_params(pb, row, col, coef, s * scale);
  };

  const int num_users = static_cast<int>(d.users.size());
  const int r1 = pb.add_cone(Cone::nonneg(d.num_blocks + 2 + num_users));
  int row = r1;
  // C1: Tr(D_m Z) <= budget, scaled by the budget.
  for (int m = 0; m < d.num_blocks; ++m, ++row) {
    VectorXd coef = VectorXd::Zero(params);
    for (int p = m * d.antennas; p < (m + 1) * d.antennas; ++p) coef(conic::hermitian_diag_param(p, n)) = 1.0;
    add_on_params(pb, row, map.z, coef, 1.0 / d.power_budget[m]);
    pb.set_rhs(row, 1.0);
  }
  // C3: Tr(E^H V E Z) >= requirement.
  {
    const LinearForm f = conic::trace_form(hermitian_part(d.echo.adjoint() * V * d.echo));
    add_on_params(pb, row, map.z, f.re, -1.0 / requirement_scale(d.echo_req));
    pb.set_rhs(row, -d.echo_req / requirement_scale(d.echo_req));
    ++row;
  }
  // C4: I_S <= tolerance.
  {
    const LinearForm f = conic::trace_form(hermitian_part(interference_in_z(d, V)));
    add_on_params(pb, row, map.z, f.re, 1.0 / requirement_scale(d.interference_tol));
    pb.set_rhs(row, d.interference_tol / requirement_scale(d.interference_tol));
    ++row;
  }
  // C5: (1 + Gamma) g^H W_k g - Gamma g^H Z g >= Gamma sigma^2.
  for (int k = 0; k < num_users; ++k, ++row) {
    const auto& u = d.users[k];
    const LinearForm f = conic::trace_form(u.g * u.g.adjoint());
    const double s = 1.0 / (u.sinr_req * u.noise);
    add_beam_form(row, k, f.re, -(1.0 + u.sinr_req) * s);
    add_on_params(pb, row, map.z, f.re, u.sinr_req * s);
    pb.set_rhs(row, -1.0);
  }

  if (!feasibility_only) {
    const auto masks = transmit_masks(d, grid);
    for (int m = 0; m < d.num_blocks; ++m) {
      for (int i = 0; i < I; ++i) {
        const int r = pb.add_cone(Cone::soc(3));
        const LinearForm f = conic::trace_form(transmit_pattern_matrix(m, i, d.num_blocks, grid));
        pb.add(r, map.t[m] + i, -1.0);
        if (masks[m].mask(i) != 0.0) pb.add(r + 1, map.zeta[m], -masks[m].mask(i));
        add_on_params(pb, r + 1, map.z, f.re, 1.0);
        add_on_params(pb, r + 2, map.z, f.im, 1.0);
        pb.set_objective(map.t[m] + i, 1.0);
      }
    }
  }

  for (int k = 0; k < K; ++k) add_psd_rows(pb, pb.add_cone(Cone::psd(2 * n)), beam[k], embed);
  out.problem = pb.build();
  return out;
}

TransmitBlock read_transmit_solution(const TransmitMap& map, const VectorXd& x) {
  const int params = conic::hermitian_param_count(map.dim);
  TransmitBlock b;
  MatrixXc last = conic::hermitian_from_params(x.segment(map.z, params), map.dim);
  for (int first : map.w) {
    b.W.push_back(conic::hermitian_from_params(x.segment(first, params), map.dim));
    last -= b.W.back();
  }
  b.W.push_back(last);
  for (int z : map.zeta) b.zeta.push_back(x(z));
  return b;
}

ReceiveSubproblem build_receive_subproblem(const DesignInstance& d, const MatrixXc& Z,
                                           const AngularGrid& grid) {
  check_grid(d, grid);
  if (Z.rows() != d.stacked_dim() || Z.cols() != d.stacked_dim()) {
    throw std::invalid_argument("receive subproblem: Z dimension");
  }
  require_psd(Z, "receive subproblem Z");

  const int N = d.antennas;
  const int I = grid.size();

  ReceiveSubproblem out;
  ReceiveMap& map = out.map;
  map.dim = N;
  map.grid_size = I;
  ProblemBuilder pb;
  map.v = pb.add_variables(conic::hermitian_param_count(N));
  map.zeta = pb.add_variables(1);
  map.t = pb.add_variables(I);

  // C2: Tr V = 1
  const int r0 = pb.add_cone(Cone::zero(1));
  add_on_params(pb, r0, map.v, conic::trace_form(MatrixXc::Identity(N, N)).re, 1.0);
  pb.set_rhs(r0, 1.0);

  const int r1 = pb.add_cone(Cone::nonneg(2));
  // C3
  add_on_params(pb, r1, map.v, conic::trace_form(hermitian_part(d.echo * Z * d.echo.adjoint())).re,
                -1.0 / requirement_scale(d.echo_req));
  pb.set_rhs(r1, -d.echo_req / requirement_scale(d.echo_req));
  // C4
  add_on_params(pb, r1 + 1, map.v, conic::trace_form(hermitian_part(interference_in_v(d, Z))).re,
                1.0 / requirement_scale(d.interference_tol));
  pb.set_rhs(r1 + 1, d.interference_tol / requirement_scale(d.interference_tol));

  // t_i >= +-(zeta P(phi_i) - a^H V a)
  const IdealPattern mask = ideal_pattern(d.rx_center, d.beamwidth, grid);
  for (int i = 0; i < I; ++i) {
    const VectorXc& a = grid.steering(i);
    const VectorXd coef = conic::trace_form(a * a.adjoint()).re;
    const int r = pb.add_cone(Cone::nonneg(2));
    const double P = mask.mask(i);
    pb.add(r, map.t + i, -1.0);
    pb.add(r + 1, map.t + i, -1.0);
    if (P != 0.0) {
      pb.add(r, map.zeta, P);
      pb.add(r + 1, map.zeta, -P);
    }
    add_on_params(pb, r, map.v, coef, -1.0);
    add_on_params(pb, r + 1, map.v, coef, 1.0);
    pb.set_objective(map.t + i, 1.0);
  }

  add_psd_rows(pb, pb.add_cone(Cone::psd(2 * N)), {{map.v, 1.0}}, conic::hermitian_embedding_map(N));
  out.problem = pb.build();
  return out;
}

ReceiveBlock read_receive_solution(const ReceiveMap& map, const VectorXd& x) {
  return {conic::hermitian_from_params(x.segment(map.v, conic::hermitian_param_count(map.dim)), map.dim),
          x(map.zeta)};
}

RankOne extract_rank_one(const MatrixXc& X) {
  require_hermitian(X, "extract_rank_one");
  const int n = static_cast<int>(X.rows());
  RankOne r;
  r.vector = VectorXc::Zero(n);
  if (n == 0) {
    r.zero = true;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(hermitian_part(X));
  if (eig.info() != Eigen::Success) throw std::runtime_error("extract_rank_one: eigensolver failed");
  const double l1 = eig.eigenvalues()(n - 1);
  if (!(l1 > 0.0)) {
    r.zero = true;
    return r;
  }
  const double l2 = n > 1 ? std::max(eig.eigenvalues()(n - 2), 0.0) : 0.0;
  r.ratio = l2 / l1;
  VectorXc u = eig.eigenvectors().col(n - 1);
  const double thresh = 1e-12 * u.norm();
  for (int i = 0; i < n; ++i) {
    if (std::abs(u(i)) > thresh) {
      u *= std::conj(u(i)) / std::abs(u(i));
      u(i) = std::abs(u(i));
      break;
    }
  }
  r.vector = std::sqrt(l1) * u;
  return r;
}

double design_objective(const DesignInstance& d, const std::vector<MatrixXc>& W,
                        const std::vector<double>& zeta_tx, const MatrixXc& V, double zeta_rx,
                        const AngularGrid& grid) {
  MatrixXc Z = MatrixXc::Zero(d.stacked_dim(), d.stacked_dim());
  for (const auto& Wk : W) Z += Wk;
  const auto masks = transmit_masks(d, grid);
  double total = 0.0;
  for (int m = 0; m < d.num_blocks; ++m) total += transmit_mismatch(zeta_tx.at(m), Z, m, masks[m], grid);
  total += receive_mismatch(zeta_rx, V, ideal_pattern(d.rx_center, d.beamwidth, grid), grid);
  return total;
}

AoOptions ao_options(const SystemConfig& config) {
  AoOptions o;
  o.tolerance = config.ao_tolerance;
  o.max_rounds = config.ao_max_iters;
  o.feasibility_rel_tol = config.feasibility_rel_tol;
  o.time_limit_s = config.trial_timeout_s;
  o.solver.method = conic::parse_solver_method(config.solver.method);
  o.solver.eps_abs = config.solver.eps_abs;
  o.solver.eps_rel = config.solver.eps_rel;
  o.solver.max_iters = config.solver.max_iters;
  return o;
}

std::string to_string(DesignStatus s) {
  switch (s) {
    case DesignStatus::kSolved: return "solved";
    case DesignStatus::kInfeasible: return "infeasible";
    case DesignStatus::kDegraded: return "degraded";
    case DesignStatus::kTimeout: return "timeout";
  }
  return "?";
}

MatrixXc initial_receive_covariance(const DesignInstance& d) {
  const VectorXc v = steering_vector(d.rx_center, d.antennas, d.spacing) / std::sqrt(double(d.antennas));
  return v * v.adjoint();
}

namespace {

// Best zeta for a fixed receive pattern: the median of the pattern over the mask.
double best_receive_zeta(const MatrixXc& V, const IdealPattern& mask, const AngularGrid& grid) {
  std::vector<double> vals;
  for (int i = 0; i < grid.size(); ++i) {
    if (mask.mask(i) != 0.0) vals.push_back(receive_pattern_value(V, i, grid));
  }
  if (vals.empty()) return 0.0;
  std::sort(vals.begin(), vals.end());
  const std::size_t h = vals.size() / 2;
  return vals.size() % 2 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
}

double transmit_objective(const DesignInstance& d, const TransmitBlock& b,
                          const std::vector<IdealPattern>& masks, const AngularGrid& grid) {
  MatrixXc Z = MatrixXc::Zero(d.stacked_dim(), d.stacked_dim());
  for (const auto& W : b.W) Z += W;
  double c = 0.0;
  for (int m = 0; m < d.num_blocks; ++m) c += transmit_mismatch(b.zeta[m], Z, m, masks[m], grid);
  return c;
}

MatrixXc sum_of(const std::vector<MatrixXc>& W, int n) {
  MatrixXc Z = MatrixXc::Zero(n, n);
  for (const auto& Wk : W) Z += Wk;
  return Z;
}

}  // namespace

BeamformingSolution alternating_optimize(const DesignInstance& d, const AoOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const auto masks = transmit_masks(d, grid);
  const IdealPattern rx_mask = ideal_pattern(d.rx_center, d.beamwidth, grid);

  BeamformingSolution sol;
  bool degraded = false;
  bool timed_out = false;
  const auto settings = [&]() {
    conic::SolverSettings st = options.solver;
    if (options.time_limit_s > 0.0) st.time_limit_s = std::max(1e-3, options.time_limit_s - elapsed());
    return st;
  };
  const auto run = [&](const conic::ConicProblem& p, const char* tag) {
    const auto res = conic::solve(p, settings());
    sol.solve_statuses.push_back(std::string(tag) + ":" + conic::to_string(res.status));
    sol.solver_iterations += res.iterations;
    if (res.timed_out) timed_out = true;
    return res;
  };

  TransmitBlock tx;
  double tx_cost = std::numeric_limits<double>::infinity();
  double tx_solver = 0.0;
  MatrixXc V = initial_receive_covariance(d);
  double zeta_rx = 0.0;
  double rx_cost = std::numeric_limits<double>::infinity();
  double rx_solver = 0.0;
  double previous = std::numeric_limits<double>::infinity();

  for (int round = 1; round <= options.max_rounds; ++round) {
    // Transmit block.
    const auto tsub = build_transmit_subproblem(d, V, grid);
    const auto tres = run(tsub.problem, "transmit");
    if (tres.status == SolveStatus::kPrimalInfeasible && round == 1) {
      sol.status = DesignStatus::kInfeasible;
      sol.runtime_s = elapsed();
      return sol;
    }
    const bool t_usable = conic::has_solution(tres.status) ||
                          (tres.status == SolveStatus::kMaxIters && round == 1);
    if (!t_usable) {
      if (tres.status == SolveStatus::kMaxIters) degraded = true;
      break;
    }
    if (tres.status == SolveStatus::kMaxIters) degraded = true;
    TransmitBlock cand = read_transmit_solution(tsub.map, tres.x);
    const double cand_cost = transmit_objective(d, cand, masks, grid);
    if (round > 1 && cand_cost > tx_cost) break;
    tx = std::move(cand);
    tx_cost = cand_cost;
    tx_solver = tres.objective;
    const MatrixXc Z = sum_of(tx.W, d.stacked_dim());

    // Receive block.
    if (round == 1) {
      zeta_rx = best_receive_zeta(V, rx_mask, grid);
      rx_cost = receive_mismatch(zeta_rx, V, rx_mask, grid);
      rx_solver = rx_cost;
    }
    bool improved = true;
    if (timed_out) {
      improved = false;
    } else {
      const auto rsub = build_receive_subproblem(d, hermitian_part(Z), grid);
      const auto rres = run(rsub.problem, "receive");
      if (conic::has_solution(rres.status)) {
        const ReceiveBlock rb = read_receive_solution(rsub.map, rres.x);
        const double cost = receive_mismatch(rb.zeta, rb.V, rx_mask, grid);
        if (cost <= rx_cost) {
          V = rb.V;
          zeta_rx = rb.zeta;
          rx_cost = cost;
          rx_solver = rres.objective;
        } else {
          improved = false;
        }
      } else {
        if (rres.status == SolveStatus::kMaxIters) degraded = true;
        improved = false;
      }
    }

    const double total = tx_cost + rx_cost;
    sol.objective_trace.push_back(total);
    sol.rounds = round;
    const double decrease = std::isinf(previous) ? std::numeric_limits<double>::infinity()
                                                 : (previous - total) / std::max(std::abs(previous), 1e-300);
    previous = total;
    if (!improved || timed_out || decrease <= options.tolerance) break;
  }

  sol.W = tx.W;
  sol.zeta_tx = tx.zeta;
  sol.V = V;
  sol.zeta_rx = zeta_rx;
  sol.solver_objective = tx_solver + rx_solver;
  sol.objective = design_objective(d, sol.W, sol.zeta_tx, sol.V, sol.zeta_rx, grid);

  bool tight = true;
  for (const auto& W : sol.W) {
    const RankOne r = extract_rank_one(W);
    sol.w.push_back(r.vector);
    sol.rank_ratio_w.push_back(r.ratio);
    tight = tight && r.ratio <= options.rank_tight;
  }
  const RankOne rv = extract_rank_one(sol.V);
  sol.rank_ratio_v = rv.ratio;
  tight = tight && rv.ratio <= options.rank_tight && !rv.zero;
  sol.v = rv.zero ? rv.vector : VectorXc(rv.vector / rv.vector.norm());
  sol.tight = tight;
  sol.qos = check_feasibility(d, sol.w, sol.v, options.feasibility_rel_tol);
  sol.status = timed_out ? DesignStatus::kTimeout : degraded ? DesignStatus::kDegraded : DesignStatus::kSolved;
  sol.runtime_s = elapsed();
  return sol;
}

conic::SolveStatus first_round_feasibility(const DesignInstance& d, const AoOptions& options) {
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const auto sub = build_transmit_subproblem(d, initial_receive_covariance(d), grid, true);
  conic::SolverSettings st = options.solver;
  if (options.time_limit_s > 0.0) st.time_limit_s = options.time_limit_s;
  return conic::solve(sub.problem, st).status;
}

namespace {

MatrixXc psd_part(const MatrixXc& X) {
  const Eigen::SelfAdjointEigenSolver<MatrixXc> es(hermitian_part(X));
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double covariance_violation(const DesignInstance& d, const std::vector<MatrixXc>& W, const MatrixXc& V) {
  if (static_cast<int>(W.size()) != d.num_beams) throw std::invalid_argument("covariance_violation: beam count");
  std::vector<MatrixXc> Wp;
  for (const auto& Wk : W) Wp.push_back(psd_part(Wk));
  const MatrixXc Z = sum_of(Wp, d.stacked_dim());
  double worst = 0.0;
  for (int m = 0; m < d.num_blocks; ++m) {
    const double p = Z.diagonal().segment(m * d.antennas, d.antennas).real().sum();
    worst = std::max(worst, (p - d.power_budget[m]) / d.power_budget[m]);
  }
  const double echo = (V * d.echo * Z * d.echo.adjoint()).trace().real();
  worst = std::max(worst, (d.echo_req - echo) / requirement_scale(d.echo_req));
  const double interference = (interference_in_z(d, V) * Z).trace().real();
  worst = std::max(worst, (interference - d.interference_tol) / requirement_scale(d.interference_tol));
  for (std::size_t k = 0; k < d.users.size(); ++k) {
    const auto& u = d.users[k];
    double signal = 0.0;
    double rest = u.noise;
    for (std::size_t i = 0; i < Wp.size(); ++i) {
      const double g = u.g.dot(Wp[i] * u.g).real();
      if (i == k) signal = g;
      else rest += g;
    }
    worst = std::max(worst, (u.sinr_req - signal / rest) / u.sinr_req);
  }
  return worst;
}

std::optional<DesignInstance> front_end_relaxation(const DesignInstance& d) {
  if (d.front_end.empty()) return std::nullopt;
  for (const auto& t : d.interference) {
    if (t.weight < 0.0) return std::nullopt;
  }
  for (const auto& t : d.front_end) {
    if (t.weight < 0.0) return std::nullopt;
  }
  const int N = d.antennas;
  std::vector<int> active;
  for (int m = 0; m < d.num_blocks; ++m) {
    bool used = d.echo.middleCols(m * N, N).cwiseAbs().maxCoeff() > 0.0;
    for (const auto& t : d.front_end) used = used || t.L.middleCols(m * N, N).cwiseAbs().maxCoeff() > 0.0;
    if (used) active.push_back(m);
  }
  if (active.empty()) return std::nullopt;
  const auto columns = [&](const MatrixXc& A) {
    MatrixXc out(A.rows(), N * static_cast<int>(active.size()));
    for (std::size_t b = 0; b < active.size(); ++b) out.middleCols(b * N, N) = A.middleCols(active[b] * N, N);
    return out;
  };
  DesignInstance r = d;
  r.num_blocks = static_cast<int>(active.size());
  r.num_beams = 1;
  r.users.clear();
  r.interference.clear();
  r.power_budget.clear();
  r.tx_center.clear();
  for (int m : active) {
    r.power_budget.push_back(d.power_budget[m]);
    r.tx_center.push_back(d.tx_center[m]);
  }
  r.echo = columns(d.echo);
  for (auto& t : r.front_end) t.L = columns(t.L);
  r.validate();
  return r;
}

namespace {
constexpr double kFinestEps = 1e-10;
}  // namespace

FirstRound first_round_check(const DesignInstance& d, const AoOptions& options) {
  FirstRound out;
  conic::SolverSettings st = options.solver;
  if (options.time_limit_s > 0.0) st.time_limit_s = options.time_limit_s;
  const MatrixXc V = initial_receive_covariance(d);
  if (const auto relaxed = front_end_relaxation(d)) {
    const AngularGrid grid(relaxed->grid_size, relaxed->antennas, relaxed->spacing);
    const auto sub = build_transmit_subproblem(*relaxed, V, grid, true);
    if (conic::solve(sub.problem, st).status == conic::SolveStatus::kPrimalInfeasible) {
      out.status = conic::SolveStatus::kPrimalInfeasible;
      out.screened = true;
      return out;
    }
  }
  const AngularGrid grid(d.grid_size, d.antennas, d.spacing);
  const auto sub = build_transmit_subproblem(d, V, grid, true);
  // A point that misses the tolerance is re-solved more accurately: thin
  // feasible sets turn tiny cone residuals into large constraint violations.
  for (;;) {
    const auto r = conic::solve(sub.problem, st);
    out.status = r.status;
    if (!conic::has_solution(r.status)) return out;
    out.violation = covariance_violation(d, read_transmit_solution(sub.map, r.x).W, V);
    out.verified = out.violation <= options.feasibility_rel_tol;
    if (out.verified || std::min(st.eps_abs, st.eps_rel) <= kFinestEps) return out;
    st.eps_abs = std::max(st.eps_abs * 1e-2, kFinestEps);
    st.eps_rel = std::max(st.eps_rel * 1e-2, kFinestEps);
  }
}

namespace {

nlohmann::json complex_vector_json(const VectorXc& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

}  // namespace

nlohmann::json to_json(const BeamformingSolution& s) {
  nlohmann::json j{
      {"status", to_string(s.status)},
      {"rounds", s.rounds},
      {"objective_trace", s.objective_trace},
      {"objective", s.objective},
      {"solver_objective", s.solver_objective},
      {"solve_statuses", s.solve_statuses},
      {"solver_iterations", s.solver_iterations},
      {"runtime_s", s.runtime_s},
  };
  if (!s.usable()) return j;
  j["zeta_tx"] = s.zeta_tx;
  j["zeta_rx"] = s.zeta_rx;
  j["rank_ratio_w"] = s.rank_ratio_w;
  j["rank_ratio_v"] = s.rank_ratio_v;
  j["tight"] = s.tight;
  nlohmann::json w = nlohmann::json::array();
  for (const auto& wk : s.w) w.push_back(complex_vector_json(wk));
  j["w"] = w;
  j["v"] = complex_vector_json(s.v);
  j["qos"] = to_json(s.qos);
  return j;
}

}  // namespace misac
