#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "phaseless/synthesis.hpp"

namespace phaseless {

// Dataset file pair: `<stem>.csv` with columns E, p..., |f|^2, |f_1|^2, ..., flags
// and `<stem>.json` holding the grid and energy set merged with the caller's
// `extra` fields.
void write_dataset(const std::filesystem::path& stem, const PhaselessDataset& ds,
                   const nlohmann::json& extra);

struct LoadedDataset {
  PhaselessDataset dataset;
  nlohmann::json header;
};

LoadedDataset read_dataset(const std::filesystem::path& stem);

}  // namespace phaseless
