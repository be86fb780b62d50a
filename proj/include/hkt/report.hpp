#pragma once

#include <filesystem>

#include "hkt/pipelines.hpp"

namespace hkt::report {

// Writes report.md plus per-method geometry/trajectory/Cp-curve CSVs and the
// SVG figures into dir. CSV content is deterministic; wall times appear only
// in the markdown.
void write_report(const std::filesystem::path& dir,
                  const pipelines::ComparisonReport& report,
                  const rotor::RotorSpec& baseline);

std::string describe_profile(const dyn::FlowProfile& profile);

}  // namespace hkt::report
