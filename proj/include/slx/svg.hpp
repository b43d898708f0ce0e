#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "slx/core.hpp"

namespace slx {

// One design on the measured-vs-predicted parity plot. x_err is already the
// full half-width to draw (the 2x convention is applied by the caller).
struct ScatterPoint {
    std::string label;
    double x = 0.0;
    double x_err = 0.0;
    double y = 0.0;
    double y_err = 0.0;
};

// Log-log parity scatter with a diagonal agreement line.
void write_parity_scatter_svg(const std::filesystem::path& path,
                              std::span<const ScatterPoint> points,
                              const std::string& x_label, const std::string& y_label);

// One design's bar group: measured total loss next to the stacked predicted
// per-region components.
struct BudgetBar {
    std::string label;
    double measured_total = 0.0;
    RegionArray components{};
};

void write_budget_bars_svg(const std::filesystem::path& path,
                           std::span<const BudgetBar> bars, const std::string& y_label);

}  // namespace slx
