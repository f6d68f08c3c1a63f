#include "phaseless/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "parallel.hpp"
#include "phaseless/amplitude.hpp"
#include "phaseless/error.hpp"
#include "phaseless/fourier.hpp"
#include "phaseless/geometry.hpp"

namespace phaseless {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int dim) {
  return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

}  // namespace

double c1(int dim, double sigma) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "c1: dimension must be positive");
  if (!(sigma > dim)) throw Error(ErrorCode::kDivergentIntegral, "c1: the integral diverges for sigma <= d");
  boost::math::quadrature::exp_sinh<double> rule;
  auto f = [&](double r) { return std::pow(r, dim - 1) * std::pow(1.0 + r * r, -0.5 * sigma); };
  const double radial = rule.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
  return std::sqrt(sphere_area(dim) * radial);
}

double c1_closed_form(int dim, double sigma) {
  if (!(sigma > dim)) throw Error(ErrorCode::kDivergentIntegral, "c1: the integral diverges for sigma <= d");
  return std::sqrt(std::pow(kPi, 0.5 * dim) * std::tgamma(0.5 * (sigma - dim)) / std::tgamma(0.5 * sigma));
}

double c2(const std::vector<SupportBall>& domain, double sigma) {
  if (domain.empty()) throw Error(ErrorCode::kUnboundedDomain, "c2: domain description is empty");
  for (const auto& b : domain) {
    if (!std::isfinite(b.radius) || b.radius < 0.0 || !std::isfinite(norm(b.center))) {
      throw Error(ErrorCode::kUnboundedDomain, "c2: domain ball is not finite");
    }
  }
  const double r = farthest_support_point(domain);
  return std::pow(1.0 + r * r, 0.5 * sigma);
}

double rho1(double a0, double r) { return std::max(2.0 * a0 * r, 1.0); }

double decay_constant(int dim, double sigma, double a0, const std::vector<SupportBall>& domain) {
  const double k1 = c1(dim, sigma);
  const double k2 = c2(domain, sigma);
  return 6.0 * std::pow(2.0 * kPi, -2.0 * dim) * a0 * std::pow(k1, 4) * std::pow(k2, 3);
}

DecayFit fit_decay(std::span<const double> energies, std::span<const double> errors) {
  if (energies.size() != errors.size() || energies.size() < 4) {
    throw Error(ErrorCode::kDegenerateFit, "decay fit needs at least 4 (E, err) pairs");
  }
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!(errors[i] > 0.0) || !(energies[i] > 0.0) || (i > 0 && !(energies[i] > energies[i - 1]))) {
      throw Error(ErrorCode::kDegenerateFit, "decay fit needs increasing energies and positive errors");
    }
  }
  const double n = static_cast<double>(energies.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    sx += std::log(energies[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double dx = std::log(energies[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

nlohmann::json BoundsReport::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["sigma"] = sigma;
  j["a0"] = a0;
  j["a0_note"] = "placeholder input, not a derived value";
  j["c1"] = c1;
  j["c2"] = c2;
  j["rho1"] = rho1;
  j["c_domain"] = c_domain;
  j["sup_norms"] = sup_norms;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"energy", r.energy},
                         {"error", r.error},
                         {"error_analytic", r.error_analytic},
                         {"channels", r.channels},
                         {"max_iterations", r.max_iterations},
                         {"max_residual", r.max_residual}});
  }
  if (fit) j["fit"] = {{"slope", fit->slope}, {"intercept", fit->intercept}};
  return j;
}

BoundsReport constants_report(int dim, double sigma, double a0, const std::vector<SupportBall>& domain,
                              std::vector<double> sup_norms) {
  BoundsReport rep;
  rep.dim = dim;
  rep.sigma = sigma;
  rep.a0 = a0;
  rep.c1 = c1(dim, sigma);
  rep.c2 = c2(domain, sigma);
  rep.rho1 = rho1(a0, farthest_support_point(domain));
  rep.c_domain = decay_constant(dim, sigma, a0, domain);
  rep.sup_norms = std::move(sup_norms);
  return rep;
}

BoundsReport run_decay_experiment(const DecayExperiment& exp, double sigma, double a0) {
  const auto& spec = exp.potential;
  BoundsReport rep = constants_report(exp.grid.dim, sigma, a0, spec.supports(), {spec.sup_norm_bound()});
  const ScalarField v = rasterize(spec, exp.grid);
  const SpectralField grid_hat = forward_transform(v);
  const GridSpec pgrid = exp.grid.dual();
  const std::size_t nthreads = detail::thread_count(exp.workers);

  for (double e : exp.energies) {
    check_resolution(exp.grid, e, exp.solver.resolution_factor);
    const auto channels = sample_gamma_manifold(e, pgrid).channels;
    std::vector<double> err(channels.size()), err_a(channels.size()), res(channels.size());
    std::vector<int> its(channels.size());
    std::vector<LippmannSchwingerSolver> solvers;
    for (std::size_t w = 0; w < nthreads; ++w) solvers.emplace_back(exp.solver);
    detail::parallel_for(channels.size(), exp.workers, [&](std::size_t w, std::size_t i) {
      const auto& c = channels[i];
      const ScatteringSolution sol = solvers[w].solve(v, WaveVector{c.k});
      const double f2 = std::norm(scattering_amplitude(v, sol, WaveVector{c.l}));
      const double g2 = std::norm(grid_hat.values[pgrid.flatten(c.node)]);
      const double a2 = std::norm(analytic_hat(spec, c.p));
      err[i] = std::abs(f2 - (exp.reference == DecayReference::kGrid ? g2 : a2));
      err_a[i] = std::abs(f2 - a2);
      res[i] = sol.report.residual;
      its[i] = sol.report.iterations;
    });
    DecayRow row;
    row.energy = e;
    row.channels = channels.size();
    for (std::size_t i = 0; i < channels.size(); ++i) {
      row.error = std::max(row.error, err[i]);
      row.error_analytic = std::max(row.error_analytic, err_a[i]);
      row.max_residual = std::max(row.max_residual, res[i]);
      row.max_iterations = std::max(row.max_iterations, its[i]);
    }
    rep.rows.push_back(row);
  }
  std::vector<double> es, errs;
  for (const auto& r : rep.rows) {
    es.push_back(r.energy);
    errs.push_back(r.error);
  }
  try {
    rep.fit = fit_decay(es, errs);
  } catch (const Error&) {
    rep.fit.reset();
  }
  return rep;
}

}  // namespace phaseless
