#include "phaseless/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "phaseless/bounds.hpp"
#include "phaseless/error.hpp"
#include "phaseless/fourier.hpp"

namespace phaseless {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInconsistentResidual = 0.1;

// Flag bit of reference j (1-based) in MaskFlag.
std::uint8_t z_flag(std::size_t j) { return j == 1 ? kFlagZ1 : kFlagZ2; }

Vec domain_center(const std::vector<SupportBall>& domain) {
  if (domain.empty()) return {};
  Vec c{};
  for (const auto& b : domain) c = c + b.center;
  return (1.0 / static_cast<double>(domain.size())) * c;
}

cplx unit(double phase) { return {std::cos(phase), std::sin(phase)}; }

// Picks, node by node, which of the two arccos candidates continues the
// labelling already made around it. Nodes are visited in order of decreasing
// |v-hat| starting from the strongest node, which takes the plus candidate.
// The prediction at a node is the constant term of a least-squares
// polynomial (total degree <= 2) through the labelled values of a 5^d window,
// after removing the plane wave e^{ip.c} of the domain centre so the
// spectrum varies slowly.
class BranchTracker {
 public:
  BranchTracker(const GridSpec& pgrid, const std::vector<std::uint8_t>& eligible,
                const std::vector<double>& modulus, const std::vector<cplx>& plus,
                const std::vector<cplx>& minus, const Vec& center)
      : g_(pgrid), eligible_(eligible), modulus_(modulus), plus_(plus), minus_(minus),
        value_(pgrid.size(), cplx{}), label_(pgrid.size(), -1) {
    demod_.resize(g_.size());
    for (std::size_t i = 0; i < g_.size(); ++i) demod_[i] = unit(-dot(g_.node(i), center));
  }

  // label 0 = plus candidate, 1 = minus candidate, -1 = not eligible.
  std::vector<int> run() {
    using Item = std::pair<double, std::size_t>;
    auto cmp = [](const Item& a, const Item& b) {
      return a.first != b.first ? a.first < b.first : a.second > b.second;
    };
    std::vector<Item> order;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      if (eligible_[i]) order.emplace_back(modulus_[i], i);
    }
    std::sort(order.begin(), order.end(), [&](const Item& a, const Item& b) { return cmp(b, a); });
    bool first = true;
    for (const auto& [m, seed] : order) {
      if (label_[seed] >= 0) continue;
      assign(seed, first ? 0 : choose(seed));
      first = false;
      std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
      push_neighbours(seed, heap);
      while (!heap.empty()) {
        const std::size_t node = heap.top().second;
        heap.pop();
        if (label_[node] >= 0) continue;
        assign(node, choose(node));
        push_neighbours(node, heap);
      }
    }
    return label_;
  }

 private:
  void assign(std::size_t node, int label) {
    label_[node] = label;
    value_[node] = modulus_[node] * (label == 0 ? plus_[node] : minus_[node]) * demod_[node];
  }

  template <class Heap>
  void push_neighbours(std::size_t node, Heap& heap) {
    const Index idx = g_.unflatten(node);
    for (int a = 0; a < g_.dim; ++a) {
      for (int s : {-1, 1}) {
        Index q = idx;
        q[a] += s;
        if (!g_.contains_index(q)) continue;
        const std::size_t f = g_.flatten(q);
        if (eligible_[f] && label_[f] < 0) heap.emplace(modulus_[f], f);
      }
    }
  }

  int choose(std::size_t node) const {
    const std::optional<cplx> pred = predict(node);
    if (!pred) return 0;
    const cplx a = modulus_[node] * plus_[node] * demod_[node];
    const cplx b = modulus_[node] * minus_[node] * demod_[node];
    return std::abs(a - *pred) <= std::abs(b - *pred) ? 0 : 1;
  }

  std::optional<cplx> predict(std::size_t node) const {
    const Index idx = g_.unflatten(node);
    std::vector<Index> offsets;
    std::vector<cplx> values;
    for (const Index& q : neighbours(g_, idx, 2)) {
      const std::size_t f = g_.flatten(q);
      if (label_[f] < 0) continue;
      offsets.push_back({q[0] - idx[0], q[1] - idx[1], q[2] - idx[2]});
      values.push_back(value_[f]);
    }
    if (values.empty()) return std::nullopt;

    // Degree per axis is capped by the number of distinct offsets seen on it.
    std::array<int, 3> cap{0, 0, 0};
    for (int a = 0; a < g_.dim; ++a) {
      std::vector<int> seen;
      for (const auto& o : offsets) {
        if (std::find(seen.begin(), seen.end(), o[a]) == seen.end()) seen.push_back(o[a]);
      }
      cap[a] = std::min(2, static_cast<int>(seen.size()) - 1);
    }
    auto monomials = [&](int max_total) {
      std::vector<Index> out;
      const int zc = g_.dim == 3 ? cap[2] : 0;
      for (int total = 0; total <= max_total; ++total) {
        for (int i = 0; i <= cap[0]; ++i) {
          for (int j = 0; j <= cap[1]; ++j) {
            for (int k = 0; k <= zc; ++k) {
              if (i + j + k == total) out.push_back({i, j, k});
            }
          }
        }
      }
      return out;
    };
    std::vector<Index> mons = monomials(2);
    if (values.size() < mons.size() + 1) mons = monomials(1);
    if (values.size() < mons.size()) {
      cplx mean{};
      for (const auto& v : values) mean += v;
      return mean / static_cast<double>(values.size());
    }
    const auto rows = static_cast<Eigen::Index>(values.size());
    const auto cols = static_cast<Eigen::Index>(mons.size());
    Eigen::MatrixXd a(rows, cols);
    Eigen::MatrixXd y(rows, 2);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& o = offsets[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < cols; ++c) {
        const auto& e = mons[static_cast<std::size_t>(c)];
        a(r, c) = std::pow(o[0], e[0]) * std::pow(o[1], e[1]) * std::pow(o[2], e[2]);
      }
      y(r, 0) = values[static_cast<std::size_t>(r)].real();
      y(r, 1) = values[static_cast<std::size_t>(r)].imag();
    }
    const Eigen::MatrixXd coef = a.completeOrthogonalDecomposition().solve(y);
    return cplx{coef(0, 0), coef(0, 1)};
  }

  const GridSpec& g_;
  const std::vector<std::uint8_t>& eligible_;
  const std::vector<double>& modulus_;
  const std::vector<cplx>& plus_;
  const std::vector<cplx>& minus_;
  std::vector<cplx> demod_;
  std::vector<cplx> value_;
  std::vector<int> label_;
};

// Fills masked nodes inside p_cut with the mean of their usable neighbours.
void inpaint(SpectralField& s, const SingularMask& mask, double p_cut, Diagnostics& diag) {
  const GridSpec& g = s.grid;
  std::vector<cplx> filled = s.values;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask.usable(i) || norm(g.node(i)) > p_cut) continue;
    cplx sum{};
    int count = 0;
    for (const Index& q : neighbours(g, g.unflatten(i), 1)) {
      const std::size_t f = g.flatten(q);
      if (mask.usable(f)) {
        sum += s.values[f];
        ++count;
      }
    }
    ++diag.inpainted_nodes;
    if (count == 0) {
      ++diag.isolated_nodes;
      filled[i] = 0.0;
    } else {
      filled[i] = sum / static_cast<double>(count);
    }
  }
  s.values = std::move(filled);
}

ScalarField synthesize_potential(const SpectralField& spectrum, double p_cut, double frac,
                                 const std::vector<SupportBall>& domain) {
  ScalarField v = band_limited(spectrum, p_cut, frac);
  if (!domain.empty()) {
    for (std::size_t i = 0; i < v.grid.size(); ++i) {
      const Vec x = v.grid.node(i);
      bool inside = false;
      for (const auto& b : domain) inside = inside || norm(x - b.center) <= b.radius;
      if (!inside) v.values[i] = 0.0;
      v.support_mask[i] = inside;
    }
  }
  return v;
}

double imaginary_ratio(const ScalarField& v) {
  double re = 0.0, im = 0.0;
  for (const auto& z : v.values) {
    re += z.real() * z.real();
    im += z.imag() * z.imag();
  }
  if (re == 0.0) return im == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(im / re);
}

}  // namespace

double recover_modulus_sq(const std::vector<const ChannelRecord*>& node_records, std::size_t j,
                          ModulusEstimator est) {
  std::vector<const ChannelRecord*> valid;
  for (const auto* r : node_records) {
    if (!((r->flags >> j) & 1u) && j < r->values.size()) valid.push_back(r);
  }
  if (valid.empty()) throw Error(ErrorCode::kNoValidChannel, "no usable channel at this node");
  std::sort(valid.begin(), valid.end(),
            [](const auto* a, const auto* b) { return a->channel.energy < b->channel.energy; });
  const ChannelRecord& top = *valid.back();
  if (est == ModulusEstimator::kTopEnergy || valid.size() < 2) return top.values[j];
  const ChannelRecord& below = *valid[valid.size() - 2];
  const double sb = std::sqrt(top.channel.energy);
  const double sa = std::sqrt(below.channel.energy);
  if (sb == sa) return top.values[j];
  return std::max(0.0, (sb * top.values[j] - sa * below.values[j]) / (sb - sa));
}

TwoRefPhase recover_phase_two_refs(double m0, double m1, double m2, cplx w1hat, cplx w2hat,
                                   const Thresholds& th) {
  const double v = std::sqrt(std::max(m0, 0.0));
  const double a1 = std::abs(w1hat), a2 = std::abs(w2hat);
  const double e1 = th.eps_z.size() > 0 ? th.eps_z[0] : 0.0;
  const double e2 = th.eps_z.size() > 1 ? th.eps_z[1] : 0.0;
  if (v < th.eps_z0 || v == 0.0) throw Error(ErrorCode::kSingularNode, "|v-hat| below eps_Z");
  if (a1 < e1 || a2 < e2 || a1 == 0.0 || a2 == 0.0) {
    throw Error(ErrorCode::kSingularNode, "|w-hat_j| below eps_Z");
  }
  const double b1 = std::arg(w1hat), b2 = std::arg(w2hat);
  const double det = std::sin(b2 - b1);
  if (std::abs(det) < th.eps_y || det == 0.0) {
    throw Error(ErrorCode::kSingularNode, "|sin(beta2 - beta1)| below eps_Y");
  }
  const double r1 = (m1 - m0 - a1 * a1) / (2.0 * v * a1);
  const double r2 = (m2 - m0 - a2 * a2) / (2.0 * v * a2);
  const double c = (r1 * std::sin(b2) - r2 * std::sin(b1)) / det;
  const double s = (r2 * std::cos(b1) - r1 * std::cos(b2)) / det;
  const double len = std::hypot(c, s);
  TwoRefPhase out;
  out.residual = std::abs(len - 1.0);
  out.inconsistent = out.residual > kInconsistentResidual;
  out.phase = len > 0.0 ? cplx{c / len, s / len} : cplx{1.0, 0.0};
  return out;
}

OneRefPhase recover_phase_one_ref(double m0, double m1, cplx w1hat, const Thresholds& th) {
  const double v = std::sqrt(std::max(m0, 0.0));
  const double a1 = std::abs(w1hat);
  const double e1 = th.eps_z.empty() ? 0.0 : th.eps_z[0];
  if (v < th.eps_z0 || v == 0.0) throw Error(ErrorCode::kSingularNode, "|v-hat| below eps_Z");
  if (a1 < e1 || a1 == 0.0) throw Error(ErrorCode::kSingularNode, "|w-hat_1| below eps_Z");
  const double raw = (m1 - m0 - a1 * a1) / (2.0 * v * a1);
  OneRefPhase out;
  out.cos_delta = std::clamp(raw, -1.0, 1.0);
  out.clamped = std::abs(raw - out.cos_delta);
  const double b1 = std::arg(w1hat);
  const double delta = std::acos(out.cos_delta);
  out.plus = unit(b1 + delta);
  out.minus = unit(b1 - delta);
  return out;
}

const char* to_string(Branch b) {
  switch (b) {
    case Branch::kTwoReference:
      return "two-reference";
    case Branch::kOneReferencePlus:
      return "one-reference-plus";
    case Branch::kOneReferenceMinus:
      return "one-reference-minus";
  }
  return "unknown";
}

RecoveredModuli recover_moduli(const PhaselessDataset& ds, ModulusEstimator est) {
  RecoveredModuli out;
  out.pgrid = ds.grid.dual();
  const std::size_t n = out.pgrid.size();
  const std::size_t width = ds.references + 1;
  out.m.assign(width, std::vector<double>(n, kNaN));
  out.has_data.assign(n, 0);
  out.solver_failed.assign(n, 0);
  std::map<std::size_t, std::vector<const ChannelRecord*>> by_node;
  for (const auto& r : ds.records) {
    if (!out.pgrid.contains_index(r.channel.node)) {
      throw Error(ErrorCode::kGridMismatch, "dataset channel is not a node of the p-grid");
    }
    by_node[out.pgrid.flatten(r.channel.node)].push_back(&r);
  }
  for (const auto& [node, recs] : by_node) {
    out.has_data[node] = 1;
    for (std::size_t j = 0; j < width; ++j) {
      try {
        out.m[j][node] = recover_modulus_sq(recs, j, est);
        if (est == ModulusEstimator::kRichardson) {
          const double top = recover_modulus_sq(recs, j, ModulusEstimator::kTopEnergy);
          out.max_shift = std::max(out.max_shift, std::abs(out.m[j][node] - top));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoValidChannel) throw;
        out.solver_failed[node] = 1;
      }
    }
  }
  return out;
}

SingularMask build_mask(const RecoveredModuli& moduli, const BackgroundSet& bg, double p_cut,
                        double eps_z_rel, double eps_y) {
  SingularMask mask;
  mask.pgrid = moduli.pgrid;
  const GridSpec& g = mask.pgrid;
  const std::size_t n = g.size();
  const std::size_t refs = bg.size();
  mask.flags.assign(n, 0);

  std::vector<std::vector<cplx>> hats(n);
  double top_v = 0.0;
  std::vector<double> top_w(refs, 0.0);
  std::vector<std::uint8_t> inside(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (norm(g.node(i)) > p_cut) continue;
    inside[i] = 1;
    hats[i] = bg.hats(g.node(i));
    for (std::size_t j = 0; j < refs; ++j) top_w[j] = std::max(top_w[j], std::abs(hats[i][j]));
    const double m0 = moduli.m[0][i];
    if (std::isfinite(m0)) top_v = std::max(top_v, std::sqrt(std::max(m0, 0.0)));
  }
  mask.thresholds.eps_z0 = eps_z_rel * top_v;
  for (std::size_t j = 0; j < refs; ++j) mask.thresholds.eps_z.push_back(eps_z_rel * top_w[j]);
  mask.thresholds.eps_y = eps_y;

  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t f = 0;
    if (!inside[i] || !moduli.has_data[i]) {
      f |= kFlagOutOfBall;
    } else {
      if (moduli.solver_failed[i]) f |= kFlagSolverFailed;
      const double m0 = moduli.m[0][i];
      if (!(std::isfinite(m0) && std::sqrt(std::max(m0, 0.0)) >= mask.thresholds.eps_z0 && m0 > 0.0)) {
        f |= kFlagZ0;
      }
      bool in_z = false;
      for (std::size_t j = 0; j < refs; ++j) {
        const double a = std::abs(hats[i][j]);
        if (a < mask.thresholds.eps_z[j] || a == 0.0) {
          f |= z_flag(j + 1);
          in_z = true;
        }
      }
      if (refs == 2 && !in_z &&
          std::abs(std::sin(std::arg(hats[i][1]) - std::arg(hats[i][0]))) < eps_y) {
        f |= kFlagY12;
      }
    }
    mask.flags[i] = f;
    if (inside[i]) {
      ++mask.considered;
      if (f != 0) ++mask.masked;
    }
  }
  return mask;
}

double radial_taper(double pmag, double p_cut, double frac) {
  const double start = (1.0 - frac) * p_cut;
  if (pmag <= start) return 1.0;
  if (pmag >= p_cut) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (pmag - start) / (p_cut - start)));
}

ScalarField band_limited(const SpectralField& reference, double p_cut, double frac) {
  SpectralField s = reference;
  for (std::size_t i = 0; i < s.grid.size(); ++i) s.values[i] *= radial_taper(norm(s.grid.node(i)), p_cut, frac);
  return inverse_transform(s);
}

std::vector<ReconstructionResult> reconstruct(const PhaselessDataset& ds, const BackgroundSet& bg,
                                              const ReconstructionOptions& opts) {
  if (ds.records.empty() || ds.energies.empty()) throw Error(ErrorCode::kNoData, "dataset has no channels");
  if (bg.size() != ds.references || bg.size() < 1 || bg.size() > 2) {
    throw Error(ErrorCode::kConfig, "background count does not match the dataset");
  }
  const double e_max = *std::max_element(ds.energies.begin(), ds.energies.end());
  const double p_cut = opts.p_cut.value_or(0.9 * 2.0 * std::sqrt(e_max));
  if (!(p_cut > 0.0)) throw Error(ErrorCode::kConfig, "p_cut must be positive");

  const RecoveredModuli moduli = recover_moduli(ds, opts.estimator);
  SingularMask mask = build_mask(moduli, bg, p_cut, opts.eps_z_rel, opts.eps_y);
  // Nodes flagged Z0 alone carry |v-hat| ~ 0, which is already the answer
  // there; only the remaining flags leave v-hat undetermined.
  std::size_t undetermined = 0;
  for (std::size_t i = 0; i < mask.flags.size(); ++i) {
    if (norm(mask.pgrid.node(i)) <= p_cut && (mask.flags[i] & ~kFlagZ0)) ++undetermined;
  }
  const double undetermined_fraction =
      mask.considered ? static_cast<double>(undetermined) / static_cast<double>(mask.considered) : 1.0;
  if (undetermined_fraction > opts.max_mask_fraction) {
    std::string why = fmt::format("{:.1f}% of the nodes inside p_cut are singular (limit {:.1f}%)",
                                  100.0 * undetermined_fraction, 100.0 * opts.max_mask_fraction);
    if (bg.size() == 2) {
      if (const auto y = detect_translate(bg.backgrounds[0], bg.backgrounds[1])) {
        why += fmt::format("; w2 is w1 translated by ({:.6g}, {:.6g}, {:.6g}), so the phases of the "
                           "references coincide on the set A_y = {{p : e^{{2ipy}} = 1}}",
                           (*y)[0], (*y)[1], (*y)[2]);
      }
    }
    throw Error(ErrorCode::kDegeneracy, why);
  }

  const GridSpec& g = mask.pgrid;
  const std::size_t n = g.size();
  Diagnostics diag;
  diag.estimator = opts.estimator == ModulusEstimator::kTopEnergy ? "top-energy" : "richardson";
  diag.top_energy = e_max;
  diag.p_cut = p_cut;
  diag.max_richardson_shift = moduli.max_shift;
  for (std::size_t i = 0; i < n; ++i) {
    if (norm(g.node(i)) > p_cut) continue;
    for (int b = 0; b < 6; ++b) {
      if (mask.flags[i] & (1u << b)) ++diag.flag_counts[b];
    }
  }

  // Decay of the modulus data towards the top-energy estimate.
  if (ds.energies.size() >= 4) {
    std::vector<double> es, errs;
    for (double e : ds.energies) {
      if (e == e_max) continue;
      double err = 0.0;
      for (const auto& r : ds.records) {
        if (r.channel.energy != e || r.flags) continue;
        const double ref = moduli.m[0][g.flatten(r.channel.node)];
        if (std::isfinite(ref)) err = std::max(err, std::abs(r.values[0] - ref));
      }
      if (err > 0.0) {
        es.push_back(e);
        errs.push_back(err);
      }
    }
    try {
      const DecayFit fit = fit_decay(es, errs);
      diag.decay_slope = fit.slope;
      diag.decay_intercept = fit.intercept;
    } catch (const Error&) {
    }
  }

  std::vector<double> modulus(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double m0 = moduli.m[0][i];
    modulus[i] = std::isfinite(m0) ? std::sqrt(std::max(m0, 0.0)) : 0.0;
  }
  std::vector<double> modulus_sq(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) modulus_sq[i] = std::isfinite(moduli.m[0][i]) ? moduli.m[0][i] : 0.0;

  auto finish = [&](SpectralField spectrum, Branch branch, Diagnostics d) {
    inpaint(spectrum, mask, p_cut, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (norm(g.node(i)) > p_cut) spectrum.values[i] = 0.0;
    }
    ReconstructionResult r;
    r.potential = synthesize_potential(spectrum, p_cut, opts.taper_fraction, opts.domain);
    d.imaginary_ratio = imaginary_ratio(r.potential);
    r.spectrum = std::move(spectrum);
    r.mask = mask;
    r.modulus_sq = modulus_sq;
    r.branch = branch;
    r.diagnostics = std::move(d);
    return r;
  };

  std::vector<ReconstructionResult> out;
  if (bg.size() == 2) {
    SpectralField spectrum(ds.grid);
    double sum_res = 0.0;
    std::size_t solved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask.usable(i)) continue;
      const auto h = bg.hats(g.node(i));
      const TwoRefPhase ph =
          recover_phase_two_refs(moduli.m[0][i], moduli.m[1][i], moduli.m[2][i], h[0], h[1], mask.thresholds);
      spectrum.values[i] = modulus[i] * ph.phase;
      diag.max_system_residual = std::max(diag.max_system_residual, ph.residual);
      sum_res += ph.residual;
      ++solved;
      if (ph.inconsistent) ++diag.inconsistent_nodes;
    }
    diag.mean_system_residual = solved ? sum_res / static_cast<double>(solved) : 0.0;
    out.push_back(finish(std::move(spectrum), Branch::kTwoReference, diag));
    return out;
  }

  std::vector<cplx> plus(n, cplx{}), minus(n, cplx{});
  std::vector<std::uint8_t> eligible(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask.usable(i)) continue;
    const cplx w = bg.hats(g.node(i))[0];
    const OneRefPhase ph = recover_phase_one_ref(moduli.m[0][i], moduli.m[1][i], w, mask.thresholds);
    plus[i] = ph.plus;
    minus[i] = ph.minus;
    eligible[i] = 1;
    diag.max_clamp = std::max(diag.max_clamp, ph.clamped);
  }
  const std::vector<int> label =
      BranchTracker(g, eligible, modulus, plus, minus, domain_center(opts.domain)).run();
  SpectralField sp(ds.grid), sm(ds.grid);
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] < 0) continue;
    sp.values[i] = modulus[i] * (label[i] == 0 ? plus[i] : minus[i]);
    sm.values[i] = modulus[i] * (label[i] == 0 ? minus[i] : plus[i]);
  }
  out.push_back(finish(std::move(sp), Branch::kOneReferencePlus, diag));
  out.push_back(finish(std::move(sm), Branch::kOneReferenceMinus, diag));
  return out;
}

}  // namespace phaseless
