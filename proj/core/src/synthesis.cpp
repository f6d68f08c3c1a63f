#include "phaseless/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "phaseless/amplitude.hpp"
#include "phaseless/error.hpp"
#include "parallel.hpp"

namespace phaseless {

namespace {

std::vector<ScatteringChannel> channels_for(const std::vector<double>& energies, const GridSpec& pgrid,
                                            const SynthesisOptions& opts) {
  std::vector<ScatteringChannel> out;
  for (double e : energies) {
    for (auto& c : sample_gamma_manifold(e, pgrid, opts.gamma).channels) {
      if (!opts.p_max || norm(c.p) <= *opts.p_max) out.push_back(c);
    }
  }
  return out;
}

// Fills records[c].values[j] (and flags, reports) for every channel and potential.
void fill_records(const std::vector<PotentialSpec>& specs, const GridSpec& grid,
                  const SynthesisOptions& opts, std::vector<ChannelRecord>& records) {
  const std::size_t np = specs.size();
  for (auto& r : records) {
    r.values.assign(np, 0.0);
    r.flags = 0;
  }
  if (opts.mode == DataMode::kBornOracle) {
    detail::parallel_for(records.size(), opts.workers, [&](std::size_t, std::size_t c) {
      for (std::size_t j = 0; j < np; ++j) {
        records[c].values[j] = std::norm(analytic_hat(specs[j], records[c].channel.p) * opts.phase_hook);
      }
    });
    return;
  }

  double e_max = 0.0;
  for (const auto& r : records) e_max = std::max(e_max, r.channel.energy);
  if (e_max > 0.0) check_resolution(grid, e_max, opts.solver.resolution_factor);
  std::vector<ScalarField> fields;
  for (const auto& s : specs) fields.push_back(rasterize(s, grid));

  const auto nthreads = detail::thread_count(opts.workers);
  std::vector<LippmannSchwingerSolver> solvers;
  for (std::size_t w = 0; w < nthreads; ++w) solvers.emplace_back(opts.solver);
  detail::parallel_for(records.size(), opts.workers, [&](std::size_t w, std::size_t c) {
    ChannelRecord& rec = records[c];
    rec.reports.assign(np, SolverReport{});
    const WaveVector k{rec.channel.k};
    const WaveVector l{rec.channel.l};
    for (std::size_t j = 0; j < np; ++j) {
      try {
        const ScatteringSolution sol = solvers[w].solve(fields[j], k);
        rec.reports[j] = sol.report;
        rec.values[j] = std::norm(scattering_amplitude(fields[j], sol, l) * opts.phase_hook);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonConvergence) throw;
        rec.flags |= 1u << j;
        rec.values[j] = 0.0;
        rec.reports[j].converged = false;
      }
    }
  });
}

// Probe set for comparing transforms of two specs.
std::vector<Vec> probe_points(int dim) {
  std::vector<Vec> out;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      Vec p{0.37 + 1.13 * i, -2.9 + 0.71 * j, dim == 3 ? 0.53 * (i - j) : 0.0};
      out.push_back(p);
    }
  }
  return out;
}

bool same_primitive_shape(const Primitive& a, const Primitive& b, Vec& offset) {
  constexpr double tol = 1e-12;
  if (a.index() != b.index()) return false;
  if (const auto* ba = std::get_if<Ball>(&a)) {
    const auto& bb = std::get<Ball>(b);
    offset = bb.center - ba->center;
    return std::abs(ba->radius - bb.radius) <= tol && std::abs(ba->amplitude - bb.amplitude) <= tol;
  }
  const auto& ga = std::get<GaussianBump>(a);
  const auto& gb = std::get<GaussianBump>(b);
  offset = gb.center - ga.center;
  return std::abs(ga.width - gb.width) <= tol && std::abs(ga.cutoff - gb.cutoff) <= tol &&
         std::abs(ga.amplitude - gb.amplitude) <= tol;
}

}  // namespace

std::vector<cplx> BackgroundSet::hats(const Vec& p) const {
  std::vector<cplx> out;
  out.reserve(backgrounds.size());
  for (const auto& w : backgrounds) out.push_back(analytic_hat(w, p));
  return out;
}

const char* to_string(DataMode m) { return m == DataMode::kBornOracle ? "born-oracle" : "full-solver"; }

void PhaselessDataset::validate() const {
  if (references < 1 || references > 2) throw Error(ErrorCode::kConfig, "dataset needs 1 or 2 references");
  for (const auto& r : records) {
    if (r.values.size() != references + 1) throw Error(ErrorCode::kConfig, "dataset record has the wrong width");
    for (double x : r.values) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorCode::kConfig, "dataset values must be finite and >= 0");
    }
    if (std::find(energies.begin(), energies.end(), r.channel.energy) == energies.end()) {
      throw Error(ErrorCode::kConfig, "dataset record energy is not in the energy set");
    }
  }
}

void check_backgrounds(const PotentialSpec& v, const BackgroundSet& bg) {
  if (bg.size() < 1 || bg.size() > 2) throw Error(ErrorCode::kConfig, "need one or two background scatterers");
  const auto dv = v.supports();
  for (std::size_t j = 0; j < bg.size(); ++j) {
    const auto& w = bg.backgrounds[j];
    if (w.dim != v.dim) throw Error(ErrorCode::kConfig, fmt::format("background {} has the wrong dimension", j + 1));
    if (w.empty() || w.sup_norm_bound() == 0.0) throw Error(ErrorCode::kConfig, fmt::format("background {} is zero", j + 1));
    if (!supports_disjoint(dv, w.supports())) {
      throw Error(ErrorCode::kConfig, fmt::format("background {} overlaps the support of v", j + 1));
    }
  }
  if (bg.size() == 2) {
    double diff = 0.0, scale = 0.0;
    for (const Vec& p : probe_points(v.dim)) {
      const auto h = bg.hats(p);
      diff = std::max(diff, std::abs(h[0] - h[1]));
      scale = std::max({scale, std::abs(h[0]), std::abs(h[1])});
    }
    if (diff <= 1e-12 * scale) throw Error(ErrorCode::kConfig, "the two backgrounds coincide");
  }
}

PhaselessDataset synthesize(const PotentialSpec& v, const BackgroundSet& bg,
                            const std::vector<double>& energies, const GridSpec& grid,
                            const SynthesisOptions& opts) {
  check_backgrounds(v, bg);
  grid.validate();
  EnergySet{energies, EnergyMode::kUnbounded, std::nullopt}.validate();

  PhaselessDataset ds;
  ds.dim = grid.dim;
  ds.grid = grid;
  ds.mode = opts.mode;
  ds.references = bg.size();
  ds.energies = energies;

  std::vector<PotentialSpec> specs{v};
  for (const auto& w : bg.backgrounds) specs.push_back(superpose(v, w));
  for (auto& c : channels_for(energies, grid.dual(), opts)) ds.records.push_back(ChannelRecord{c, {}, 0, {}});
  fill_records(specs, grid, opts, ds.records);
  return ds;
}

TwinReport translation_twin_demo(const PotentialSpec& v, const Vec& shift, double energy,
                                 const GridSpec& grid, const SynthesisOptions& opts) {
  grid.validate();
  const PotentialSpec vy = translate(v, shift);
  for (const auto& s : vy.supports()) {
    if (!grid.contains_ball(s.center, s.radius)) {
      throw Error(ErrorCode::kSupportOutsideBox, "translated support leaves the grid box");
    }
  }
  TwinReport rep;
  for (int a = 0; a < grid.dim; ++a) {
    const double cells = shift[a] / grid.spacing(a);
    if (std::abs(cells - std::round(cells)) > 1e-9) rep.commensurate = false;
  }
  std::vector<ChannelRecord> records;
  for (auto& c : channels_for({energy}, grid.dual(), opts)) records.push_back(ChannelRecord{c, {}, 0, {}});
  fill_records({v, vy}, grid, opts, records);
  rep.channels = records.size();
  double scale = 0.0, diff = 0.0;
  for (const auto& r : records) {
    if (r.flags != 0) throw Error(ErrorCode::kNonConvergence, "forward solve failed in the twin demo");
    scale = std::max(scale, r.values[0]);
    diff = std::max(diff, std::abs(r.values[0] - r.values[1]));
  }
  rep.max_discrepancy = scale > 0.0 ? diff / scale : diff;
  return rep;
}

std::optional<Vec> detect_translate(const PotentialSpec& a, const PotentialSpec& b) {
  if (a.dim != b.dim || a.components.size() != b.components.size() || a.empty()) return std::nullopt;
  std::optional<Vec> shift;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    Vec off{};
    if (!same_primitive_shape(a.components[i], b.components[i], off)) return std::nullopt;
    if (shift && norm(off - *shift) > 1e-12) return std::nullopt;
    shift = off;
  }
  return shift;
}

BackgroundReport validate_backgrounds(const BackgroundSet& bg, const GridSpec& pgrid, double p_max,
                                      double eps_z_rel, double eps_y) {
  BackgroundReport rep;
  const std::size_t n = bg.size();
  std::vector<std::vector<cplx>> hats;
  std::vector<Vec> nodes;
  for (std::size_t i = 0; i < pgrid.size(); ++i) {
    const Vec p = pgrid.node(i);
    if (norm(p) > p_max) continue;
    nodes.push_back(p);
    hats.push_back(bg.hats(p));
  }
  if (nodes.empty()) {
    rep.warnings.push_back("no p-grid nodes inside the scanned ball");
    return rep;
  }
  std::vector<double> top(n, 0.0);
  for (const auto& h : hats) {
    for (std::size_t j = 0; j < n; ++j) top[j] = std::max(top[j], std::abs(h[j]));
  }
  std::vector<std::size_t> zcount(n, 0);
  std::size_t ycount = 0, off_z = 0;
  for (const auto& h : hats) {
    bool in_z = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(h[j]) < eps_z_rel * top[j]) {
        ++zcount[j];
        in_z = true;
      }
    }
    if (n == 2 && !in_z) {
      ++off_z;
      if (std::abs(std::sin(std::arg(h[1]) - std::arg(h[0]))) < eps_y) ++ycount;
    }
  }
  const double total = static_cast<double>(nodes.size());
  for (std::size_t j = 0; j < n; ++j) {
    rep.z_fraction.push_back(static_cast<double>(zcount[j]) / total);
    if (rep.z_fraction.back() > 0.2) {
      rep.warnings.push_back(fmt::format("background {} vanishes on {:.1f}% of the nodes", j + 1,
                                         100.0 * rep.z_fraction.back()));
    }
  }
  if (n == 2) {
    rep.y_fraction = off_z ? static_cast<double>(ycount) / static_cast<double>(off_z) : 0.0;
    if (const auto y = detect_translate(bg.backgrounds[0], bg.backgrounds[1])) {
      rep.translate_detected = true;
      rep.translate_shift = y;
      std::size_t ay = 0;
      for (const Vec& p : nodes) {
        if (std::abs(std::sin(dot(p, *y))) < eps_y) ++ay;
      }
      rep.a_y_fraction = static_cast<double>(ay) / total;
      rep.warnings.push_back(fmt::format(
          "w2 is w1 translated by ({:.6g}, {:.6g}, {:.6g}); the Y set lies in A_y = {{p : sin(p.y) = 0}}",
          (*y)[0], (*y)[1], (*y)[2]));
    }
    if (*rep.y_fraction > 0.2) {
      rep.warnings.push_back(fmt::format("phases of the backgrounds coincide on {:.1f}% of the nodes",
                                         100.0 * *rep.y_fraction));
    }
  }
  return rep;
}

std::vector<double> zero_radii(const PotentialSpec& w, const Vec& direction, double r_max, int samples) {
  if (samples < 3 || !(r_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zero_radii: bad sampling");
  const Vec e = (1.0 / norm(direction)) * direction;
  auto modulus = [&](double r) { return std::abs(analytic_hat(w, r * e)); };
  std::vector<double> m(static_cast<std::size_t>(samples) + 1);
  const double dr = r_max / samples;
  double top = 0.0;
  for (int i = 0; i <= samples; ++i) {
    m[static_cast<std::size_t>(i)] = modulus(i * dr);
    top = std::max(top, m[static_cast<std::size_t>(i)]);
  }
  std::vector<double> out;
  for (int i = 1; i < samples; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!(m[u] < m[u - 1] && m[u] <= m[u + 1])) continue;
    const auto [r, val] = boost::math::tools::brent_find_minima(modulus, (i - 1) * dr, (i + 1) * dr, 52);
    if (val <= 1e-6 * top) out.push_back(r);
  }
  return out;
}

}  // namespace phaseless
