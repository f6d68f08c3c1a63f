#include "phaseless/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "phaseless/amplitude.hpp"
#include "phaseless/dataset_io.hpp"
#include "phaseless/field_io.hpp"
#include "phaseless/fourier.hpp"
#include "phaseless/hash.hpp"

namespace phaseless::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, "config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key, "wrong type");
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

Vec vec_from(const json& a, int dim, const std::string& where) {
  if (!a.is_array() || static_cast<int>(a.size()) != dim) {
    fail(where, fmt::format("expected an array of {} numbers", dim));
  }
  Vec v{};
  for (int i = 0; i < dim; ++i) {
    if (!a[static_cast<std::size_t>(i)].is_number()) fail(where, "expected numbers");
    v[i] = a[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json vec_json(const Vec& v, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

cplx amplitude_from(const json& a, const std::string& where) {
  if (a.is_number()) return {a.get<double>(), 0.0};
  if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
    return {a[0].get<double>(), a[1].get<double>()};
  }
  fail(where, "amplitude must be a number or [re, im]");
}

json amplitude_json(cplx a) {
  if (a.imag() == 0.0) return a.real();
  return json::array({a.real(), a.imag()});
}

PotentialSpec random_balls(const json& j, int dim, std::uint64_t seed, const std::string& where) {
  check_keys(j, {"count", "center", "spread", "radius_range", "amplitude_range"}, where);
  const int count = get<int>(j, "count", where);
  const Vec center = j.contains("center") ? vec_from(j["center"], dim, where + ".center") : Vec{};
  const double spread = get<double>(j, "spread", where);
  const auto rr = get<std::vector<double>>(j, "radius_range", where);
  const auto ar = get_or<std::vector<double>>(j, "amplitude_range", {1.0, 1.0}, where);
  if (count < 1 || rr.size() != 2 || ar.size() != 2 || !(rr[0] > 0.0) || rr[1] < rr[0] || ar[1] < ar[0]) {
    fail(where, "bad random_balls parameters");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  PotentialSpec spec;
  spec.dim = dim;
  for (int i = 0; i < count; ++i) {
    Ball b;
    for (int a = 0; a < dim; ++a) b.center[a] = center[a] + spread * unit(rng);
    b.radius = rr[0] + 0.5 * (unit(rng) + 1.0) * (rr[1] - rr[0]);
    b.amplitude = ar[0] + 0.5 * (unit(rng) + 1.0) * (ar[1] - ar[0]);
    spec.components.push_back(b);
  }
  return spec;
}

EnergySet energies_from(const json& j, const std::string& where) {
  check_keys(j, {"mode", "list", "generator", "accumulation"}, where);
  const auto mode = get_or<std::string>(j, "mode", "unbounded", where);
  EnergySet set;
  if (j.contains("list") == j.contains("generator")) fail(where, "give exactly one of 'list' or 'generator'");
  if (j.contains("list")) {
    set.energies = get<std::vector<double>>(j, "list", where);
  } else {
    const json& g = j["generator"];
    const std::string gw = where + ".generator";
    check_keys(g, {"e_min", "e_max", "count", "spacing"}, gw);
    const auto spacing = get_or<std::string>(g, "spacing", "log", gw);
    if (spacing != "log" && spacing != "linear") fail(gw, "spacing must be 'log' or 'linear'");
    try {
      set = make_energy_set(get<double>(g, "e_min", gw), get<double>(g, "e_max", gw), get<int>(g, "count", gw),
                            spacing == "log");
    } catch (const Error& e) {
      fail(gw, e.what());
    }
  }
  if (mode == "unbounded") {
    set.mode = EnergyMode::kUnbounded;
  } else if (mode == "clustered") {
    set.mode = EnergyMode::kClustered;
    if (j.contains("accumulation")) set.accumulation = get<double>(j, "accumulation", where);
  } else {
    fail(where, "mode must be 'unbounded' or 'clustered'");
  }
  try {
    set.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return set;
}

SolverConfig solver_from(const json& j, const std::string& where) {
  check_keys(j, {"tolerance", "max_iterations", "resolution_factor", "fallback", "method"}, where);
  SolverConfig s;
  s.tolerance = get_or(j, "tolerance", s.tolerance, where);
  s.max_iterations = get_or(j, "max_iterations", s.max_iterations, where);
  s.resolution_factor = get_or(j, "resolution_factor", s.resolution_factor, where);
  s.fallback = get_or(j, "fallback", s.fallback, where);
  const auto method = get_or<std::string>(j, "method", "auto", where);
  if (method != "auto" && method != "dense") fail(where, "method must be 'auto' or 'dense'");
  s.force_dense = method == "dense";
  if (!(s.tolerance > 0.0) || s.max_iterations < 1 || !(s.resolution_factor > 0.0)) {
    fail(where, "tolerance, max_iterations and resolution_factor must be positive");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output bundles

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Bundle {
 public:
  Bundle(const ExperimentConfig& cfg, fs::path dir, std::string command)
      : cfg_(cfg), dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void add(const std::string& name) { files_.insert(name); }

  void add_field(const std::string& name) {
    add(name);
    add(name + ".json");
  }

  void write_json(const std::string& name, const json& j) {
    fs::create_directories(path(name).parent_path());
    std::ofstream os(path(name), std::ios::binary);
    os << j.dump(2) << '\n';
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path(name).string());
    add(name);
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream os(path(name), std::ios::binary);
    os << text;
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path(name).string());
    add(name);
  }

  void input(const std::string& name, const fs::path& file) { inputs_[name] = sha256_hex(read_file(file)); }

  void finish() {
    json m;
    m["schema_version"] = kSchemaVersion;
    m["command"] = command_;
    m["config"] = cfg_.raw;
    m["config_sha256"] = sha256_hex(cfg_.raw.dump());
    m["inputs"] = inputs_;
    json outs = json::object();
    for (const auto& f : files_) outs[f] = sha256_hex(read_file(path(f)));
    m["outputs"] = outs;
    std::ofstream os(path("manifest.json"), std::ios::binary);
    os << m.dump(2) << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  fs::path dir_;
  std::string command_;
  std::set<std::string> files_;
  json inputs_ = json::object();
};

std::vector<Vec> outgoing_directions(int dim, int count) {
  std::vector<Vec> out;
  const double pi = std::numbers::pi;
  if (dim == 2) {
    for (int m = 0; m < count; ++m) {
      const double t = 2.0 * pi * m / count;
      out.push_back({std::cos(t), std::sin(t), 0.0});
    }
    return out;
  }
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int m = 0; m < count; ++m) {
    const double z = 1.0 - (2.0 * m + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back({r * std::cos(golden * m), r * std::sin(golden * m), z});
  }
  return out;
}

json report_json(const SolverReport& r) {
  return {{"method", to_string(r.method)},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"converged", r.converged}};
}

BackgroundSet first_references(const ExperimentConfig& cfg, std::size_t count) {
  if (cfg.backgrounds.size() < count) {
    fail("backgrounds", fmt::format("{} reference scatterer(s) required, {} given", count, cfg.backgrounds.size()));
  }
  BackgroundSet bg;
  bg.backgrounds.assign(cfg.backgrounds.backgrounds.begin(),
                        cfg.backgrounds.backgrounds.begin() + static_cast<std::ptrdiff_t>(count));
  return bg;
}

ScalarField restrict_to(ScalarField f, const std::vector<SupportBall>& domain) {
  if (domain.empty()) return f;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const Vec x = f.grid.node(i);
    bool inside = false;
    for (const auto& b : domain) inside = inside || norm(x - b.center) <= b.radius;
    if (!inside) f.values[i] = 0.0;
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON helpers

json to_json(const PotentialSpec& spec) {
  json comps = json::array();
  for (const auto& c : spec.components) {
    if (const auto* b = std::get_if<Ball>(&c)) {
      comps.push_back({{"type", "ball"},
                       {"center", vec_json(b->center, spec.dim)},
                       {"radius", b->radius},
                       {"amplitude", amplitude_json(b->amplitude)}});
    } else {
      const auto& g = std::get<GaussianBump>(c);
      comps.push_back({{"type", "gaussian"},
                       {"center", vec_json(g.center, spec.dim)},
                       {"width", g.width},
                       {"cutoff", g.cutoff},
                       {"amplitude", amplitude_json(g.amplitude)}});
    }
  }
  return {{"components", comps}};
}

PotentialSpec potential_from_json(const json& j, int dim) {
  const std::string where = "potential";
  check_keys(j, {"components"}, where);
  PotentialSpec spec;
  spec.dim = dim;
  const json& comps = j.contains("components") ? j["components"] : json::array();
  if (!comps.is_array()) fail(where, "components must be an array");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const json& c = comps[i];
    const std::string cw = fmt::format("{}.components[{}]", where, i);
    const auto type = get<std::string>(c, "type", cw);
    if (type == "ball") {
      check_keys(c, {"type", "center", "radius", "amplitude"}, cw);
      Ball b;
      b.center = vec_from(c.at("center"), dim, cw + ".center");
      b.radius = get<double>(c, "radius", cw);
      if (c.contains("amplitude")) b.amplitude = amplitude_from(c["amplitude"], cw + ".amplitude");
      if (!(b.radius > 0.0)) fail(cw, "radius must be positive");
      spec.components.push_back(b);
    } else if (type == "gaussian") {
      check_keys(c, {"type", "center", "width", "cutoff", "amplitude"}, cw);
      GaussianBump g;
      g.center = vec_from(c.at("center"), dim, cw + ".center");
      g.width = get<double>(c, "width", cw);
      g.cutoff = get<double>(c, "cutoff", cw);
      if (c.contains("amplitude")) g.amplitude = amplitude_from(c["amplitude"], cw + ".amplitude");
      if (!(g.width > 0.0) || !(g.cutoff > 0.0)) fail(cw, "width and cutoff must be positive");
      spec.components.push_back(g);
    } else {
      throw Error(ErrorCode::kUnsupportedPrimitive, "config: " + cw + ": unknown primitive '" + type + "'");
    }
  }
  return spec;
}

json to_json(const GridSpec& g) {
  return {{"n", g.n}, {"box_min", vec_json(g.box_min, g.dim)}, {"box_max", vec_json(g.box_max, g.dim)}};
}

GridSpec grid_from_json(const json& j, int dim) {
  check_keys(j, {"n", "box_min", "box_max"}, "grid");
  GridSpec g;
  g.dim = dim;
  g.n = get<int>(j, "n", "grid");
  g.box_min = vec_from(j.at("box_min"), dim, "grid.box_min");
  g.box_max = vec_from(j.at("box_max"), dim, "grid.box_max");
  try {
    g.validate();
    if (g.n % 2) fail("grid", "n must be even");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail("grid", e.what());
  }
  return g;
}

json to_json(const SolverConfig& s) {
  return {{"tolerance", s.tolerance},
          {"max_iterations", s.max_iterations},
          {"resolution_factor", s.resolution_factor},
          {"fallback", s.fallback},
          {"method", s.force_dense ? "dense" : "auto"}};
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kNonConvergence:
      return kExitSolver;
    default:
      return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// Config

ExperimentConfig parse_config(const json& j) {
  check_keys(j, {"schema_version", "scenario", "dim", "grid", "potential", "random_potential", "domain",
                 "backgrounds", "energies", "mode", "solver", "reconstruction", "synthesis", "forward",
                 "convergence", "shift", "bounds", "output_dir", "seed", "workers"},
             "top level");
  ExperimentConfig cfg;
  cfg.raw = j;
  const int version = get<int>(j, "schema_version", "top level");
  if (version != kSchemaVersion) fail("schema_version", fmt::format("expected {}, got {}", kSchemaVersion, version));
  cfg.scenario = get_or<std::string>(j, "scenario", "unnamed", "top level");
  cfg.dim = get_or(j, "dim", 2, "top level");
  if (cfg.dim != 2 && cfg.dim != 3) fail("dim", "must be 2 or 3");
  if (!j.contains("grid")) fail("top level", "missing key 'grid'");
  cfg.grid = grid_from_json(j["grid"], cfg.dim);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "top level");
  cfg.workers = get_or(j, "workers", 1, "top level");
  if (cfg.workers < 1) fail("workers", "must be >= 1");
  cfg.output_dir = get_or<std::string>(j, "output_dir", "out", "top level");

  if (j.contains("potential") && j.contains("random_potential")) {
    fail("top level", "give at most one of 'potential' and 'random_potential'");
  }
  cfg.potential.dim = cfg.dim;
  if (j.contains("potential")) cfg.potential = potential_from_json(j["potential"], cfg.dim);
  if (j.contains("random_potential")) cfg.potential = random_balls(j["random_potential"], cfg.dim, cfg.seed, "random_potential");

  if (j.contains("domain")) {
    const json& d = j["domain"];
    if (!d.is_array()) fail("domain", "expected an array of balls");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string w = fmt::format("domain[{}]", i);
      check_keys(d[i], {"center", "radius"}, w);
      cfg.domain.push_back({vec_from(d[i].at("center"), cfg.dim, w + ".center"), get<double>(d[i], "radius", w)});
    }
  } else {
    cfg.domain = cfg.potential.supports();
  }

  if (j.contains("backgrounds")) {
    const json& b = j["backgrounds"];
    if (!b.is_array()) fail("backgrounds", "expected an array of potentials");
    for (const auto& w : b) cfg.backgrounds.backgrounds.push_back(potential_from_json(w, cfg.dim));
    if (cfg.backgrounds.size() > 2) fail("backgrounds", "at most two reference scatterers");
  }

  if (j.contains("energies")) cfg.energies = energies_from(j["energies"], "energies");

  const auto mode = get_or<std::string>(j, "mode", "born-oracle", "top level");
  if (mode == "born-oracle" || mode == "born") {
    cfg.mode = DataMode::kBornOracle;
  } else if (mode == "full-solver" || mode == "full") {
    cfg.mode = DataMode::kFullSolver;
  } else {
    fail("mode", "must be 'born-oracle' or 'full-solver'");
  }
  if (j.contains("solver")) cfg.solver = solver_from(j["solver"], "solver");

  cfg.references = cfg.backgrounds.size();
  if (j.contains("reconstruction")) {
    const json& r = j["reconstruction"];
    const std::string w = "reconstruction";
    check_keys(r, {"references", "estimator", "p_cut", "eps_z_rel", "eps_y", "max_mask_fraction", "taper_fraction",
                   "declared_real"},
               w);
    auto& o = cfg.reconstruction;
    cfg.references = get_or<std::size_t>(r, "references", cfg.references, w);
    if (cfg.references < 1 || cfg.references > 2) fail(w + ".references", "must be 1 or 2");
    const auto est = get_or<std::string>(r, "estimator", "top-energy", w);
    if (est == "top-energy") {
      o.estimator = ModulusEstimator::kTopEnergy;
    } else if (est == "richardson") {
      o.estimator = ModulusEstimator::kRichardson;
    } else {
      fail(w + ".estimator", "must be 'top-energy' or 'richardson'");
    }
    if (r.contains("p_cut")) o.p_cut = get<double>(r, "p_cut", w);
    o.eps_z_rel = get_or(r, "eps_z_rel", o.eps_z_rel, w);
    o.eps_y = get_or(r, "eps_y", o.eps_y, w);
    o.max_mask_fraction = get_or(r, "max_mask_fraction", o.max_mask_fraction, w);
    o.taper_fraction = get_or(r, "taper_fraction", o.taper_fraction, w);
    o.declared_real = get_or(r, "declared_real", cfg.potential.is_real(), w);
    if (!(o.taper_fraction >= 0.0 && o.taper_fraction < 1.0)) fail(w + ".taper_fraction", "must lie in [0, 1)");
  } else {
    cfg.reconstruction.declared_real = cfg.potential.is_real();
  }
  cfg.reconstruction.domain = cfg.domain;

  if (j.contains("synthesis")) {
    const json& s = j["synthesis"];
    check_keys(s, {"p_max", "gamma_flip", "gamma_twist", "withhold_potential"}, "synthesis");
    if (s.contains("p_max")) cfg.p_max = get<double>(s, "p_max", "synthesis");
    cfg.gamma.flip = get_or(s, "gamma_flip", false, "synthesis");
    cfg.gamma.twist = get_or(s, "gamma_twist", 0.0, "synthesis");
    cfg.withhold_potential = get_or(s, "withhold_potential", false, "synthesis");
  }

  if (j.contains("forward")) {
    const json& f = j["forward"];
    check_keys(f, {"energy", "incident", "outgoing"}, "forward");
    cfg.forward.energy = get<double>(f, "energy", "forward");
    cfg.forward.outgoing = get_or(f, "outgoing", 32, "forward");
    if (f.contains("incident")) {
      for (const auto& d : f["incident"]) {
        const Vec v = vec_from(d, cfg.dim, "forward.incident");
        if (norm(v) == 0.0) fail("forward.incident", "zero direction");
        cfg.forward.incident.push_back((1.0 / norm(v)) * v);
      }
    }
    if (cfg.forward.incident.empty()) cfg.forward.incident.push_back({1.0, 0.0, 0.0});
    if (!(cfg.forward.energy > 0.0) || cfg.forward.outgoing < 1) fail("forward", "energy and outgoing must be positive");
  }

  if (j.contains("convergence")) {
    const json& c = j["convergence"];
    check_keys(c, {"slope_min", "slope_max", "reference"}, "convergence");
    cfg.convergence.slope_min = get_or(c, "slope_min", cfg.convergence.slope_min, "convergence");
    cfg.convergence.slope_max = get_or(c, "slope_max", cfg.convergence.slope_max, "convergence");
    const auto ref = get_or<std::string>(c, "reference", "grid", "convergence");
    if (ref == "grid") {
      cfg.convergence.reference = DecayReference::kGrid;
    } else if (ref == "analytic") {
      cfg.convergence.reference = DecayReference::kAnalytic;
    } else {
      fail("convergence.reference", "must be 'grid' or 'analytic'");
    }
  }

  if (j.contains("shift")) cfg.shift = vec_from(j["shift"], cfg.dim, "shift");

  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    check_keys(b, {"sigma", "a0"}, "bounds");
    if (b.contains("sigma")) cfg.bounds.sigma = get<double>(b, "sigma", "bounds");
    cfg.bounds.a0 = get_or(b, "a0", 1.0, "bounds");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kConfig, "config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config: parse error: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_forward(const ExperimentConfig& cfg, const fs::path& out) {
  if (!(cfg.forward.energy > 0.0)) fail("forward", "section required for the forward command");
  Bundle bundle(cfg, out, "forward");
  const ScalarField v = rasterize(cfg.potential, cfg.grid);
  LippmannSchwingerSolver solver(cfg.solver);
  const double kmag = std::sqrt(cfg.forward.energy);
  const auto dirs = outgoing_directions(cfg.dim, cfg.forward.outgoing);

  std::string csv = "incident,E";
  static constexpr const char* kAxis = "xyz";
  for (const char* name : {"k", "l"}) {
    for (int a = 0; a < cfg.dim; ++a) csv += fmt::format(",{}_{}", name, kAxis[a]);
  }
  csv += ",re_f,im_f,abs_f_sq\n";
  json reports = json::array();
  CommandResult res;
  for (std::size_t i = 0; i < cfg.forward.incident.size(); ++i) {
    const WaveVector k{kmag * cfg.forward.incident[i]};
    const ScatteringSolution sol = solver.solve(v, k);
    reports.push_back(report_json(sol.report));
    const std::string name = fmt::format("psi_{}.bin", i);
    write_field(bundle.path(name), sol.psi);
    bundle.add_field(name);
    for (const Vec& d : dirs) {
      const WaveVector l{kmag * d};
      const cplx f = scattering_amplitude(v, sol, l);
      csv += fmt::format("{},{:.17g}", i, cfg.forward.energy);
      for (const Vec* w : {&k.k, &l.k}) {
        for (int a = 0; a < cfg.dim; ++a) csv += fmt::format(",{:.17g}", (*w)[a]);
      }
      csv += fmt::format(",{:.17g},{:.17g},{:.17g}\n", f.real(), f.imag(), std::norm(f));
    }
  }
  bundle.write_text("amplitudes.csv", csv);
  res.summary = {{"command", "forward"}, {"energy", cfg.forward.energy}, {"reports", reports}};
  bundle.write_json("forward.json", res.summary);
  bundle.finish();
  return res;
}

CommandResult cmd_synthesize(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.energies.energies.empty()) fail("energies", "section required for the synthesize command");
  if (cfg.energies.mode == EnergyMode::kClustered) {
    fail("energies", "clustered energy sets are out of scope for synthesis and reconstruction");
  }
  const BackgroundSet bg = first_references(cfg, cfg.references);
  Bundle bundle(cfg, out, "synthesize");
  SynthesisOptions opts;
  opts.mode = cfg.mode;
  opts.solver = cfg.solver;
  opts.gamma = cfg.gamma;
  opts.workers = cfg.workers;
  opts.p_max = cfg.p_max;
  const PhaselessDataset ds = synthesize(cfg.potential, bg, cfg.energies.energies, cfg.grid, opts);

  json header;
  if (!cfg.withhold_potential) header["potential"] = to_json(cfg.potential);
  header["backgrounds"] = json::array();
  for (const auto& w : bg.backgrounds) header["backgrounds"].push_back(to_json(w));
  header["solver"] = to_json(cfg.solver);
  header["gamma"] = {{"flip", cfg.gamma.flip}, {"twist", cfg.gamma.twist}};
  header["scenario"] = cfg.scenario;
  write_dataset(bundle.path("dataset"), ds, header);
  bundle.add("dataset.csv");
  bundle.add("dataset.json");

  std::size_t failed = 0;
  for (const auto& r : ds.records) failed += r.flags != 0;
  double emax = cfg.energies.max();
  const BackgroundReport br =
      validate_backgrounds(bg, cfg.grid.dual(), cfg.p_max.value_or(2.0 * std::sqrt(emax)),
                           cfg.reconstruction.eps_z_rel, cfg.reconstruction.eps_y);
  json bj;
  bj["z_fraction"] = br.z_fraction;
  if (br.y_fraction) bj["y_fraction"] = *br.y_fraction;
  bj["translate_detected"] = br.translate_detected;
  if (br.translate_shift) bj["translate_shift"] = vec_json(*br.translate_shift, cfg.dim);
  if (br.a_y_fraction) bj["a_y_fraction"] = *br.a_y_fraction;
  bj["warnings"] = br.warnings;
  bundle.write_json("background_report.json", bj);

  CommandResult res;
  res.summary = {{"command", "synthesize"},
                 {"mode", to_string(ds.mode)},
                 {"channels", ds.records.size()},
                 {"failed_channels", failed},
                 {"references", ds.references},
                 {"background_warnings", br.warnings}};
  if (failed) res.exit_code = kExitSolver;
  bundle.finish();
  return res;
}

CommandResult cmd_reconstruct(const ExperimentConfig& cfg, const fs::path& dataset_stem, const fs::path& out) {
  const LoadedDataset loaded = read_dataset(dataset_stem);
  const PhaselessDataset& ds = loaded.dataset;
  if (ds.dim != cfg.dim) fail("dim", "does not match the dataset");
  if (cfg.backgrounds.size() == 0) fail("backgrounds", "reconstruction needs the reference scatterers");
  const BackgroundSet bg = first_references(cfg, ds.references);
  Bundle bundle(cfg, out, "reconstruct");
  bundle.input("dataset.csv", dataset_stem.string() + ".csv");
  bundle.input("dataset.json", dataset_stem.string() + ".json");

  const auto results = reconstruct(ds, bg, cfg.reconstruction);
  const bool truth = !cfg.potential.empty();
  json summary = {{"command", "reconstruct"}, {"results", json::array()}};
  for (const auto& r : results) {
    const std::string dir = to_string(r.branch);
    fs::create_directories(bundle.path(dir));
    write_field(bundle.path(dir + "/spectrum.bin"), r.spectrum);
    bundle.add_field(dir + "/spectrum.bin");
    write_field(bundle.path(dir + "/potential.bin"), r.potential);
    bundle.add_field(dir + "/potential.bin");
    bundle.write_text(dir + "/mask.u8", std::string(r.mask.flags.begin(), r.mask.flags.end()));
    bundle.write_json(dir + "/mask.json",
                      {{"legend", {{"1", "Z0"}, {"2", "Z1"}, {"4", "Z2"}, {"8", "Y12"}, {"16", "out-of-ball"},
                                   {"32", "solver-failed"}}},
                       {"grid", to_json(r.mask.pgrid)},
                       {"thresholds", {{"eps_z0", r.mask.thresholds.eps_z0},
                                       {"eps_z", r.mask.thresholds.eps_z},
                                       {"eps_y", r.mask.thresholds.eps_y}}},
                       {"considered", r.mask.considered},
                       {"masked", r.mask.masked},
                       {"masked_fraction", r.mask.masked_fraction()}});
    const auto& d = r.diagnostics;
    json dj = {{"branch", dir},
               {"estimator", d.estimator},
               {"top_energy", d.top_energy},
               {"p_cut", d.p_cut},
               {"max_system_residual", d.max_system_residual},
               {"mean_system_residual", d.mean_system_residual},
               {"inconsistent_nodes", d.inconsistent_nodes},
               {"max_clamp", d.max_clamp},
               {"inpainted_nodes", d.inpainted_nodes},
               {"isolated_nodes", d.isolated_nodes},
               {"max_richardson_shift", d.max_richardson_shift},
               {"imaginary_ratio", d.imaginary_ratio},
               {"declared_real", cfg.reconstruction.declared_real},
               {"masked_fraction", r.mask.masked_fraction()},
               {"flag_counts", {{"Z0", d.flag_counts[0]}, {"Z1", d.flag_counts[1]}, {"Z2", d.flag_counts[2]},
                                {"Y12", d.flag_counts[3]}, {"out_of_ball", d.flag_counts[4]},
                                {"solver_failed", d.flag_counts[5]}}}};
    if (d.decay_slope) dj["decay_fit"] = {{"slope", *d.decay_slope}, {"intercept", *d.decay_intercept}};
    if (truth) {
      const GridSpec& pg = r.spectrum.grid;
      SpectralField ref(ds.grid);
      if (ds.mode == DataMode::kBornOracle) {
        for (std::size_t i = 0; i < pg.size(); ++i) ref.values[i] = analytic_hat(cfg.potential, pg.node(i));
      } else {
        ref = forward_transform(rasterize(cfg.potential, ds.grid));
      }
      double spec_err = 0.0;
      for (std::size_t i = 0; i < pg.size(); ++i) {
        if (r.mask.usable(i)) spec_err = std::max(spec_err, std::abs(r.spectrum.values[i] - ref.values[i]));
      }
      const ScalarField truth_bl = restrict_to(
          band_limited(ref, d.p_cut, cfg.reconstruction.taper_fraction), cfg.reconstruction.domain);
      dj["spectrum_max_error"] = spec_err;
      dj["realspace_relative_l2"] = relative_l2(r.potential, truth_bl);
    }
    bundle.write_json(dir + "/diagnostics.json", dj);
    summary["results"].push_back(dj);
  }
  bundle.write_json("summary.json", summary);
  bundle.finish();
  return {kExitOk, summary};
}

CommandResult cmd_convergence(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.energies.energies.size() < 4) fail("energies", "the convergence run needs at least 4 energies");
  Bundle bundle(cfg, out, "convergence");
  DecayExperiment exp;
  exp.potential = cfg.potential;
  exp.grid = cfg.grid;
  exp.energies = cfg.energies.energies;
  exp.solver = cfg.solver;
  exp.reference = cfg.convergence.reference;
  exp.workers = cfg.workers;
  const double sigma = cfg.bounds.sigma.value_or(cfg.dim + 1.0);
  const BoundsReport rep = run_decay_experiment(exp, sigma, cfg.bounds.a0);

  std::string csv = "E,error,error_analytic,channels,max_iterations,max_residual\n";
  for (const auto& r : rep.rows) {
    csv += fmt::format("{:.17g},{:.17g},{:.17g},{},{},{:.17g}\n", r.energy, r.error, r.error_analytic, r.channels,
                       r.max_iterations, r.max_residual);
  }
  bundle.write_text("convergence.csv", csv);
  json j = rep.to_json();
  j["reference"] = cfg.convergence.reference == DecayReference::kGrid ? "grid" : "analytic";
  j["slope_window"] = {cfg.convergence.slope_min, cfg.convergence.slope_max};
  std::vector<double> es, ea;
  for (const auto& r : rep.rows) {
    es.push_back(r.energy);
    ea.push_back(r.error_analytic);
  }
  try {
    const DecayFit fa = fit_decay(es, ea);
    j["fit_analytic"] = {{"slope", fa.slope}, {"intercept", fa.intercept}};
  } catch (const Error&) {
  }
  const bool pass = rep.fit && rep.fit->slope >= cfg.convergence.slope_min && rep.fit->slope <= cfg.convergence.slope_max;
  j["pass"] = pass;
  bundle.write_json("convergence.json", j);
  bundle.finish();
  return {pass ? kExitOk : kExitThreshold, j};
}

CommandResult cmd_ambiguity_demo(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.energies.energies.empty()) fail("energies", "the demo needs an energy");
  Bundle bundle(cfg, out, "ambiguity-demo");
  SynthesisOptions opts;
  opts.mode = cfg.mode;
  opts.solver = cfg.solver;
  opts.gamma = cfg.gamma;
  opts.workers = cfg.workers;
  opts.p_max = cfg.p_max;
  const double e = cfg.energies.max();
  const TwinReport rep = translation_twin_demo(cfg.potential, cfg.shift, e, cfg.grid, opts);
  write_field(bundle.path("potential.bin"), rasterize(cfg.potential, cfg.grid));
  bundle.add_field("potential.bin");
  write_field(bundle.path("shifted_potential.bin"), rasterize(translate(cfg.potential, cfg.shift), cfg.grid));
  bundle.add_field("shifted_potential.bin");
  json j = {{"command", "ambiguity-demo"},
            {"mode", to_string(cfg.mode)},
            {"energy", e},
            {"shift", vec_json(cfg.shift, cfg.dim)},
            {"channels", rep.channels},
            {"commensurate", rep.commensurate},
            {"max_discrepancy", rep.max_discrepancy}};
  if (!rep.commensurate) {
    j["warning"] = "the shift is not a whole number of grid cells; the rasterized twin is not an exact translate";
  }
  bundle.write_json("twin.json", j);
  bundle.finish();
  return {kExitOk, j};
}

CommandResult cmd_bounds(const ExperimentConfig& cfg, const fs::path& out) {
  Bundle bundle(cfg, out, "bounds");
  const double sigma = cfg.bounds.sigma.value_or(cfg.dim + 1.0);
  std::vector<SupportBall> domain = cfg.domain;
  if (domain.empty()) fail("domain", "bounds need a declared domain or a potential");
  std::vector<double> sup;
  sup.push_back(cfg.potential.sup_norm_bound());
  for (const auto& w : cfg.backgrounds.backgrounds) sup.push_back(superpose(cfg.potential, w).sup_norm_bound());
  BoundsReport rep = constants_report(cfg.dim, sigma, cfg.bounds.a0, domain, sup);
  json j = rep.to_json();
  j["c1_closed_form"] = c1_closed_form(cfg.dim, sigma);
  // Bound constant for each D_j = D union Omega_j as well.
  json per = json::array();
  for (const auto& w : cfg.backgrounds.backgrounds) {
    auto dj = domain;
    for (const auto& s : w.supports()) dj.push_back(s);
    per.push_back({{"c2", c2(dj, sigma)}, {"c_domain", decay_constant(cfg.dim, sigma, cfg.bounds.a0, dj)}});
  }
  j["references"] = per;
  bundle.write_json("bounds.json", j);
  bundle.finish();
  return {kExitOk, j};
}

}  // namespace phaseless::cli
