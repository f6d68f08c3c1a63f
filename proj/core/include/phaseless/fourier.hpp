#pragma once

#include <memory>
#include <vector>

#include "phaseless/field.hpp"

namespace phaseless {

// Owns an FFTW plan pair for one array shape. Plans are built with
// FFTW_ESTIMATE so that results are reproducible bit for bit; creation is
// serialized because the FFTW planner is not thread-safe.
class FftPlan {
 public:
  FftPlan(int dim, int n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }

  // Unnormalized transforms, in place on `data` (size() elements).
  // positive: sum_j x_j e^{+2 pi i jk/n}; negative: e^{-2 pi i jk/n}.
  void positive(std::vector<cplx>& data) const;
  void negative(std::vector<cplx>& data) const;

 private:
  struct Impl;
  int dim_;
  int n_;
  std::size_t size_;
  std::unique_ptr<Impl> impl_;
};

/// Discrete version of u-hat(p) = (2 pi)^{-d} \int e^{ipx} u(x) dx with
/// rectangle-rule weights h^d, evaluated on the centred dual frequency grid.
SpectralField forward_transform(const ScalarField& f);

/// Inverse of forward_transform: u(x) = \int e^{-ipx} u-hat(p) dp with weights
/// dp^d, onto the spatial grid recorded in the spectrum.
ScalarField inverse_transform(const SpectralField& s);

/// Same, onto an explicit target grid; throws kGridMismatch unless the
/// spectrum's grid is the dual of `target`.
ScalarField inverse_transform(const SpectralField& s, const GridSpec& target);

}  // namespace phaseless
