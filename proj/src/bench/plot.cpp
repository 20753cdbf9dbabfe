#include "lfi/bench/plot.hpp"

#include "lfi/bench/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>

namespace lfi {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void metric_table(std::span<const RunResult> runs, bool abc_only, std::ostream& out) {
  std::vector<const RunResult*> rows;
  for (const auto& r : runs)
    if (!abc_only || is_abc(r.config.method)) rows.push_back(&r);
  if (rows.empty()) throw std::invalid_argument("emit_plot_data: no runs of the requested kind");
  if (abc_only)
    std::stable_sort(rows.begin(), rows.end(), [](const RunResult* a, const RunResult* b) {
      return a->config.abc.epsilon > b->config.abc.epsilon;
    });
  std::set<std::string> names;
  for (const auto* r : rows)
    for (const auto& [name, value] : r->metrics) names.insert(name);
  names.erase("epsilon");
  out << "run,method,seed,epsilon,n_simulations,cost";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto* r : rows) {
    out << csv_field(r->config.output_dir) << ',' << to_string(r->config.method) << ',' << r->config.seed << ',';
    if (is_abc(r->config.method) && r->metrics.count("epsilon")) out << r->metrics.at("epsilon");
    out << ',' << r->n_simulations << ',' << simulation_cost(*r);
    for (const auto& n : names) {
      out << ',';
      if (const auto it = r->metrics.find(n); it != r->metrics.end()) out << it->second;
    }
    out << '\n';
  }
}

std::pair<Scalar, Scalar> default_range(const Prior& prior, Index i) {
  if (const auto* box = prior.box()) return {box->lower()[i], box->upper()[i]};
  const Scalar sd = std::sqrt(prior_covariance(prior)(i, i));
  const Scalar m = prior_mean(prior)[i];
  return {m - 4.0 * sd, m + 4.0 * sd};
}

void marginal_table(std::span<const RunResult> runs, const PlotOptions& opt, std::ostream& out) {
  const ExperimentConfig& cfg = runs.front().config;
  const Problem pb = load_problem(cfg.experiment, cfg.problem);
  if (opt.parameter < 0 || opt.parameter >= pb.prior.dim())
    throw std::invalid_argument("emit_plot_data: parameter index out of range");
  if (opt.grid_points < 2) throw std::invalid_argument("emit_plot_data: need at least two grid points");
  const auto [lo, hi] = opt.range ? *opt.range : default_range(pb.prior, opt.parameter);

  std::vector<const RunResult*> cols;
  for (const auto& r : runs)
    if (r.posterior) cols.push_back(&r);
  out << "theta";
  const bool truth = pb.true_density || pb.true_posterior;
  if (truth) out << ",true";
  for (const auto* r : cols) out << ',' << csv_field(r->config.output_dir);
  out << '\n';
  const Index i = opt.parameter;
  for (Index g = 0; g < opt.grid_points; ++g) {
    const Scalar t = lo + (hi - lo) * static_cast<Scalar>(g) / static_cast<Scalar>(opt.grid_points - 1);
    out << t;
    if (pb.true_density) out << ',' << pb.true_density(t);
    if (pb.true_posterior) out << ',' << marginal_pdf(GaussianMixture(*pb.true_posterior), i, t);
    for (const auto* r : cols) out << ',' << marginal_pdf(*r->posterior, i, t);
    out << '\n';
  }
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "metric_vs_eps") return PlotKind::metric_vs_eps;
  if (name == "metric_vs_nsims") return PlotKind::metric_vs_nsims;
  if (name == "marginal") return PlotKind::marginal;
  throw std::invalid_argument("unknown plot kind '" + name + "' (metric_vs_eps, metric_vs_nsims, marginal)");
}

void emit_plot_data(std::span<const RunResult> runs, PlotKind kind, std::ostream& out, const PlotOptions& options) {
  if (runs.empty()) throw std::invalid_argument("emit_plot_data: no runs");
  for (const auto& r : runs)
    if (r.config.experiment != runs.front().config.experiment)
      throw std::invalid_argument("emit_plot_data: runs come from different experiments");
  out << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  switch (kind) {
    case PlotKind::metric_vs_nsims:
      metric_table(runs, false, out);
      break;
    case PlotKind::metric_vs_eps:
      metric_table(runs, true, out);
      break;
    case PlotKind::marginal:
      marginal_table(runs, options, out);
      break;
  }
}

void emit_plot_data(std::span<const RunResult> runs, PlotKind kind, const std::filesystem::path& path,
                    const PlotOptions& options) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  emit_plot_data(runs, kind, out, options);
}

}  // namespace lfi
