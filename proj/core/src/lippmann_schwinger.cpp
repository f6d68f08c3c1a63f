#include "phaseless/lippmann_schwinger.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "phaseless/error.hpp"
#include "phaseless/green.hpp"

namespace phaseless {

namespace {

double vec_norm(const std::vector<cplx>& a) {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return std::sqrt(s);
}

bool all_zero(const ScalarField& v) {
  for (const auto& z : v.values) {
    if (z != cplx{}) return false;
  }
  return true;
}

}  // namespace

std::string to_string(SolveMethod m) {
  return m == SolveMethod::kBornIteration ? "born-iteration" : "dense-direct";
}

GreenOperator::GreenOperator(const GridSpec& grid, double kmag)
    : grid_(grid), kmag_(kmag), padded_n_(2 * grid.n) {
  grid.validate();
  const int d = grid.dim;
  const int big = padded_n_;
  plan_ = std::make_unique<FftPlan>(d, big);
  const double vol = grid.cell_volume();
  self_weight_ = green_self_integral(vol, kmag, d);
  kernel_hat_.assign(plan_->size(), cplx{});
  for (std::size_t f = 0; f < kernel_hat_.size(); ++f) {
    std::size_t rest = f;
    Vec disp{};
    bool origin = true;
    for (int a = d - 1; a >= 0; --a) {
      int m = static_cast<int>(rest % static_cast<std::size_t>(big));
      rest /= static_cast<std::size_t>(big);
      if (m >= grid.n) m -= big;
      if (m != 0) origin = false;
      disp[a] = m * grid.spacing(a);
    }
    kernel_hat_[f] = origin ? self_weight_ : green_function(disp, kmag, d) * vol;
  }
  plan_->negative(kernel_hat_);
  work_.assign(plan_->size(), cplx{});
}

cplx GreenOperator::weight(const Index& i, const Index& j) const {
  if (i == j) return self_weight_;
  Vec disp{};
  for (int a = 0; a < grid_.dim; ++a) disp[a] = (i[a] - j[a]) * grid_.spacing(a);
  return green_function(disp, kmag_, grid_.dim) * grid_.cell_volume();
}

void GreenOperator::apply(const std::vector<cplx>& u, std::vector<cplx>& out) const {
  const int d = grid_.dim;
  const std::size_t big = static_cast<std::size_t>(padded_n_);
  std::fill(work_.begin(), work_.end(), cplx{});
  auto padded_index = [&](const Index& idx) {
    std::size_t f = 0;
    for (int a = 0; a < d; ++a) f = f * big + static_cast<std::size_t>(idx[a]);
    return f;
  };
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] != cplx{}) work_[padded_index(grid_.unflatten(i))] = u[i];
  }
  plan_->negative(work_);
  for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= kernel_hat_[i];
  plan_->positive(work_);
  const double scale = 1.0 / static_cast<double>(work_.size());
  out.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = work_[padded_index(grid_.unflatten(i))] * scale;
}

void check_resolution(const GridSpec& grid, double energy, double resolution_factor) {
  if (!(energy > 0.0)) throw Error(ErrorCode::kInvalidArgument, "energy must be positive");
  const double limit = 2.0 * std::numbers::pi / (resolution_factor * std::sqrt(energy));
  if (grid.max_spacing() > limit) {
    throw Error(ErrorCode::kUnderResolvedGrid,
                "grid spacing " + std::to_string(grid.max_spacing()) + " exceeds 2 pi/(q sqrt(E)) = " +
                    std::to_string(limit) + " at E = " + std::to_string(energy));
  }
}

ScalarField plane_wave(const GridSpec& grid, const Vec& k) {
  ScalarField e(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ph = dot(k, grid.node(i));
    e.values[i] = {std::cos(ph), std::sin(ph)};
    e.support_mask[i] = true;
  }
  return e;
}

const GreenOperator& LippmannSchwingerSolver::operator_for(const GridSpec& grid, double kmag) {
  if (!(grid == cached_grid_)) {
    cache_.clear();
    cached_grid_ = grid;
  }
  auto& slot = cache_[{kmag, grid.n}];
  if (!slot) slot = std::make_unique<GreenOperator>(grid, kmag);
  return *slot;
}

double LippmannSchwingerSolver::residual(const ScalarField& v, const ScalarField& psi,
                                         const WaveVector& k) {
  const auto& op = operator_for(v.grid, k.magnitude());
  const ScalarField e = plane_wave(v.grid, k.k);
  std::vector<cplx> vpsi(psi.values.size()), kv;
  for (std::size_t i = 0; i < vpsi.size(); ++i) vpsi[i] = v.values[i] * psi.values[i];
  op.apply(vpsi, kv);
  double num = 0.0;
  for (std::size_t i = 0; i < vpsi.size(); ++i) num += std::norm(psi.values[i] - e.values[i] - kv[i]);
  return std::sqrt(num) / vec_norm(e.values);
}

ScatteringSolution LippmannSchwingerSolver::solve_iterative(const ScalarField& v, const WaveVector& k) {
  const GridSpec& g = v.grid;
  ScatteringSolution sol{plane_wave(g, k.k), k, {}};
  sol.report.method = SolveMethod::kBornIteration;
  if (all_zero(v)) {
    sol.report.converged = true;
    return sol;
  }
  const auto& op = operator_for(g, k.magnitude());
  const std::vector<cplx> e = sol.psi.values;
  const double enorm = vec_norm(e);
  std::vector<cplx> psi = e, vpsi(e.size()), kv;
  double last = INFINITY;
  int increases = 0;
  int it = 0;
  for (it = 1; it <= cfg_.max_iterations; ++it) {
    for (std::size_t i = 0; i < psi.size(); ++i) vpsi[i] = v.values[i] * psi[i];
    op.apply(vpsi, kv);
    double diff = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const cplx next = e[i] + kv[i];
      diff += std::norm(next - psi[i]);
      psi[i] = next;
    }
    const double r = std::sqrt(diff) / enorm;
    if (!std::isfinite(r)) break;
    increases = r > last ? increases + 1 : 0;
    last = r;
    if (r <= cfg_.tolerance || increases >= kDivergenceWindow) break;
  }
  sol.psi.values = std::move(psi);
  sol.report.iterations = std::min(it, cfg_.max_iterations);
  sol.report.residual = residual(v, sol.psi, k);
  sol.report.converged = std::isfinite(sol.report.residual) && sol.report.residual <= cfg_.tolerance;
  return sol;
}

ScatteringSolution LippmannSchwingerSolver::solve_dense(const ScalarField& v, const WaveVector& k) {
  const GridSpec& g = v.grid;
  ScatteringSolution sol{plane_wave(g, k.k), k, {}};
  sol.report.method = SolveMethod::kDenseDirect;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (v.values[i] != cplx{}) support.push_back(i);
  }
  if (support.empty()) {
    sol.report.converged = true;
    return sol;
  }
  const auto& op = operator_for(g, k.magnitude());
  const auto m = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXcd a(m, m);
  Eigen::VectorXcd rhs(m);
  std::vector<Index> idx(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) idx[s] = g.unflatten(support[s]);
  for (Eigen::Index r = 0; r < m; ++r) {
    rhs(r) = sol.psi.values[support[r]];
    for (Eigen::Index c = 0; c < m; ++c) {
      a(r, c) = (r == c ? cplx{1.0, 0.0} : cplx{}) - op.weight(idx[r], idx[c]) * v.values[support[c]];
    }
  }
  const Eigen::VectorXcd x = a.partialPivLu().solve(rhs);
  std::vector<cplx> vpsi(g.size(), cplx{}), kv;
  for (Eigen::Index r = 0; r < m; ++r) vpsi[support[r]] = v.values[support[r]] * x(r);
  op.apply(vpsi, kv);
  for (std::size_t i = 0; i < kv.size(); ++i) sol.psi.values[i] += kv[i];
  sol.report.iterations = 0;
  sol.report.residual = residual(v, sol.psi, k);
  sol.report.converged = sol.report.residual <= cfg_.tolerance;
  return sol;
}

ScatteringSolution LippmannSchwingerSolver::solve(const ScalarField& v, const WaveVector& k) {
  check_resolution(v.grid, k.energy(), cfg_.resolution_factor);
  if (cfg_.force_dense) return solve_dense(v, k);
  ScatteringSolution sol = solve_iterative(v, k);
  if (sol.report.converged) return sol;
  if (cfg_.fallback && v.grid.n <= kDenseFallbackMaxN) {
    ScatteringSolution dense = solve_dense(v, k);
    dense.report.iterations = sol.report.iterations;
    if (dense.report.converged) return dense;
  }
  throw Error(ErrorCode::kNonConvergence,
              "Born iteration did not contract at E = " + std::to_string(k.energy()) +
                  " (residual " + std::to_string(sol.report.residual) +
                  "); use the dense fallback on a grid <= 48^d or raise E");
}

ScatteringSolution solve_lippmann_schwinger(const ScalarField& v, const WaveVector& k,
                                            const SolverConfig& cfg) {
  LippmannSchwingerSolver solver(cfg);
  return solver.solve(v, k);
}

}  // namespace phaseless
