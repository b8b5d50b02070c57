#pragma once

#include <ostream>
#include <string>

// vendored single-header nlohmann/json
#include <json.hpp>

#include "fraclab/homogenize.hpp"
#include "fraclab/inequalities.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

/// Fixed float format shared by every CSV artifact: 17 significant digits,
/// shortest-round-trip style, LF endings.
std::string format_number(double v);

void write_sweep_csv(const SweepReport& report, std::ostream& os);
nlohmann::json sweep_to_json(const SweepReport& report);

void write_constant_report_csv(const ConstantReport& report, std::ostream& os);
nlohmann::json constant_report_to_json(const ConstantReport& report);

void write_spectrum_csv(const Spectrum& spectrum, std::ostream& os);

nlohmann::json rate_fit_to_json(const RateFit& fit);

}  // namespace fraclab
