#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "behavior_codec/distribution.hpp"

namespace behavior_codec {

/// Overlaid mass histograms: target in blue, elicited in green. Output is a
/// pure function of the inputs (fixed canvas, no timestamps). Throws
/// Error(EmptyData) if either distribution is empty.
std::string render_histogram(const EmpiricalDistribution& target, const EmpiricalDistribution& elicited,
                             const std::string& title);
void emit_histogram(const std::filesystem::path& path, const EmpiricalDistribution& target,
                    const EmpiricalDistribution& elicited, const std::string& title);

/// Square matrix heatmap with row/column labels and the value printed in
/// each cell; NaN cells are drawn grey. Throws Error(EmptyData) or
/// Error(DimensionError).
std::string render_heatmap(std::span<const std::string> labels, const std::vector<std::vector<double>>& values,
                           const std::string& title);
void emit_heatmap(const std::filesystem::path& path, std::span<const std::string> labels,
                  const std::vector<std::vector<double>>& values, const std::string& title);

/// Horizontal bars, positive to the right in blue, negative to the left in
/// red; used for loadings and regression coefficients.
std::string render_bars(std::span<const std::string> labels, std::span<const double> values, const std::string& title);
void emit_bars(const std::filesystem::path& path, std::span<const std::string> labels, std::span<const double> values,
               const std::string& title);

}  // namespace behavior_codec
