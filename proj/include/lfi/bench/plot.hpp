#pragma once

// Comma-separated tables for external plotting tools.

#include "lfi/bench/experiment.hpp"

#include <filesystem>
#include <span>

namespace lfi {

enum class PlotKind { metric_vs_eps, metric_vs_nsims, marginal };

PlotKind parse_plot_kind(const std::string& name);

struct PlotOptions {
  /// Parameter shown by the marginal table.
  Index parameter = 0;
  Index grid_points = 501;
  /// Grid range for the marginal; by default the prior box, or the prior
  /// mean +- 4 standard deviations for a Gaussian prior.
  std::optional<std::pair<Scalar, Scalar>> range;
};

/// metric_vs_nsims: one row per run with its cost (total simulations for MDN
/// methods, simulations per effective sample for ABC) and every metric.
/// metric_vs_eps: the same rows restricted to ABC runs, by decreasing epsilon.
/// marginal: one density column per run with a posterior, plus the analytic
/// truth where one exists. Throws std::invalid_argument for empty input or
/// runs from different experiments.
void emit_plot_data(std::span<const RunResult> runs, PlotKind kind, std::ostream& out,
                    const PlotOptions& options = {});
void emit_plot_data(std::span<const RunResult> runs, PlotKind kind, const std::filesystem::path& path,
                    const PlotOptions& options = {});

}  // namespace lfi
