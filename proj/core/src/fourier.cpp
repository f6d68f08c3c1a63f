#include "phaseless/fourier.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Index shift between centred frequency order and FFT order, per axis.
std::size_t shifted(const GridSpec& g, std::size_t flat) {
  Index idx = g.unflatten(flat);
  for (int a = 0; a < g.dim; ++a) idx[a] = (idx[a] + g.n / 2) % g.n;
  return g.flatten(idx);
}

}  // namespace

struct FftPlan::Impl {
  fftw_plan positive = nullptr;
  fftw_plan negative = nullptr;
};

FftPlan::FftPlan(int dim, int n) : dim_(dim), n_(n), size_(1), impl_(std::make_unique<Impl>()) {
  int dims[3] = {n, n, n};
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  impl_->positive = fftw_plan_dft(dim, dims, buf, buf, FFTW_BACKWARD, flags);
  impl_->negative = fftw_plan_dft(dim, dims, buf, buf, FFTW_FORWARD, flags);
  fftw_free(buf);
}

FftPlan::~FftPlan() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->positive);
  fftw_destroy_plan(impl_->negative);
}

void FftPlan::positive(std::vector<cplx>& data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->positive, p, p);
}

void FftPlan::negative(std::vector<cplx>& data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->negative, p, p);
}

SpectralField forward_transform(const ScalarField& f) {
  if (!f.is_finite()) throw Error(ErrorCode::kInvalidArgument, "forward_transform: non-finite field");
  const GridSpec& g = f.grid;
  SpectralField s(g);
  FftPlan plan(g.dim, g.n);
  std::vector<cplx> work = f.values;
  plan.positive(work);
  const double pref = std::pow(2.0 * std::numbers::pi, -g.dim) * g.cell_volume();
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    const Vec p = s.grid.node(m);
    const double ph = dot(p, g.box_min);
    s.values[m] = work[shifted(g, m)] * cplx(std::cos(ph), std::sin(ph)) * pref;
  }
  return s;
}

ScalarField inverse_transform(const SpectralField& s) {
  const GridSpec& g = s.spatial;
  if (!(s.grid == g.dual())) {
    throw Error(ErrorCode::kGridMismatch, "inverse_transform: spectrum is not on the dual grid");
  }
  FftPlan plan(g.dim, g.n);
  std::vector<cplx> work(s.values.size());
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    const Vec p = s.grid.node(m);
    const double ph = -dot(p, g.box_min);
    work[shifted(g, m)] = s.values[m] * cplx(std::cos(ph), std::sin(ph));
  }
  plan.negative(work);
  ScalarField f(g);
  const double w = s.grid.cell_volume();
  for (std::size_t i = 0; i < work.size(); ++i) {
    f.values[i] = work[i] * w;
    f.support_mask[i] = true;
  }
  return f;
}

ScalarField inverse_transform(const SpectralField& s, const GridSpec& target) {
  if (!(s.grid == target.dual())) {
    throw Error(ErrorCode::kGridMismatch, "inverse_transform: spectrum is not on the dual of the target grid");
  }
  SpectralField copy = s;
  copy.spatial = target;
  return inverse_transform(copy);
}

}  // namespace phaseless
