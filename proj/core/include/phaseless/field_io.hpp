#pragma once

#include <filesystem>

#include "phaseless/field.hpp"

namespace phaseless {

// Raw little-endian float64 (re, im) pairs in row-major order plus a JSON
// sidecar `<path>.json` holding {dim, n, box_min, box_max, kind}. Spectral
// sidecars additionally carry the dual spatial box.
void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const SpectralField& s);

ScalarField read_scalar_field(const std::filesystem::path& path);
SpectralField read_spectral_field(const std::filesystem::path& path);

}  // namespace phaseless
