#include "lfi/bench/problem.hpp"

#include "lfi/artifacts.hpp"
#include "lfi/errors.hpp"
#include "lfi/sim/blr.hpp"
#include "lfi/sim/lotka_volterra.hpp"
#include "lfi/sim/mg1.hpp"
#include "lfi/sim/mog.hpp"

namespace lfi {

namespace {

namespace fs = std::filesystem;

// Substreams of the problem seed.
enum : std::uint64_t { kPilotStream = 1, kObservationStream = 2 };

std::string header(ExperimentKind kind, const ProblemSettings& s, const std::string& what) {
  return to_string(kind) + " seed=" + std::to_string(s.seed) +
         " pilot_simulations=" + std::to_string(s.pilot_simulations) + " " + what;
}

Matrix as_row(const Vector& v) { return v.transpose(); }
Vector row_of(const Artifact& a, Index r = 0) { return a.data.row(r).transpose(); }

// Repeats a simulation at fixed parameters until it does not explode.
Vector observe(const Simulator& sim, const Vector& theta, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    try {
      return sim.simulate(theta, rng);
    } catch (const SimulationExploded&) {
    }
  }
  throw SimulationExploded("observation at the true parameters exploded 1000 times");
}

const char* kXo = "x_o.txt";

}  // namespace

fs::path problem_dir(ExperimentKind kind, const ProblemSettings& settings) {
  return fs::path(settings.data_dir) / (to_string(kind) + "_seed" + std::to_string(settings.seed));
}

fs::path generate_problem_data(ExperimentKind kind, const ProblemSettings& s) {
  const fs::path dir = problem_dir(kind, s);
  Rng pilot_rng(derive_seed(s.seed, kPilotStream));
  Rng obs_rng(derive_seed(s.seed, kObservationStream));
  switch (kind) {
    case ExperimentKind::mog: {
      // fixed observation
      write_artifact(dir / kXo, header(kind, s, "observation"), Matrix::Constant(1, 1, MogProblem{}.x_o));
      break;
    }
    case ExperimentKind::blr: {
      const BlrProblem p = make_blr_problem(s.seed);
      write_artifact(dir / "inputs.txt", header(kind, s, "inputs u_i, one per row"), p.inputs);
      write_artifact(dir / "theta_true.txt", header(kind, s, "true parameters"), as_row(p.theta_true));
      write_artifact(dir / kXo, header(kind, s, "observation"), as_row(p.x_o));
      break;
    }
    case ExperimentKind::lv: {
      const LvProblem p;
      const PilotNormalizer pilot = lv_pilot(p, s.pilot_simulations, pilot_rng);
      Matrix rows(2, kLvStats);
      rows << pilot.mean.transpose(), pilot.std.transpose();
      write_artifact(dir / "pilot.txt",
                     header(kind, s, "rows: mean, std of mean_X mean_Y logvar_X logvar_Y acf1_X acf2_X acf1_Y acf2_Y ccf_XY"),
                     rows);
      const Vector x_o = observe(lv_simulator(p, pilot), p.theta_true.array().log().matrix(), obs_rng);
      write_artifact(dir / kXo, header(kind, s, "normalized observation"), as_row(x_o));
      break;
    }
    case ExperimentKind::mg1: {
      const Mg1Problem p;
      const PilotWhitener pilot = mg1_pilot(p, s.pilot_simulations, pilot_rng);
      Matrix rows(1 + kMg1Stats, kMg1Stats);
      rows << pilot.mean.transpose(), pilot.chol;
      write_artifact(dir / "pilot.txt",
                     header(kind, s, "row 1: percentile means; rows 2-6: lower Cholesky factor of their covariance"),
                     rows);
      const Vector x_o = observe(mg1_simulator(p, pilot), mg1_to_inference(p.theta_true), obs_rng);
      write_artifact(dir / kXo, header(kind, s, "whitened observation"), as_row(x_o));
      break;
    }
  }
  return dir;
}

Problem load_problem(ExperimentKind kind, const ProblemSettings& s) {
  const fs::path dir = problem_dir(kind, s);
  if (!fs::exists(dir / kXo)) generate_problem_data(kind, s);
  Problem out;
  out.kind = kind;
  out.data_dir = dir;
  const Artifact obs = read_artifact(dir / kXo);
  if (obs.header.rfind(header(kind, s, ""), 0) != 0)
    throw std::runtime_error(dir.string() + " holds data made with other settings ('" + obs.header +
                             "'); regenerate it with `lfi pilot`");
  out.x_o = row_of(obs);
  switch (kind) {
    case ExperimentKind::mog: {
      MogProblem p;
      p.x_o = out.x_o[0];
      out.simulator = mog_simulator(p);
      out.prior = mog_prior(p);
      out.true_density = mog_true_posterior(p, p.x_o);
      break;
    }
    case ExperimentKind::blr: {
      BlrProblem p;
      p.inputs = read_artifact(dir / "inputs.txt").data;
      p.prior = Gaussian::standard(p.inputs.cols());
      p.theta_true = row_of(read_artifact(dir / "theta_true.txt"));
      p.x_o = out.x_o;
      out.simulator = blr_simulator(p);
      out.prior = p.prior;
      out.theta_true = p.theta_true;
      out.true_posterior = blr_true_posterior(p, p.x_o);
      break;
    }
    case ExperimentKind::lv: {
      const LvProblem p;
      const Matrix rows = read_artifact(dir / "pilot.txt").data;
      if (rows.rows() != 2 || rows.cols() != kLvStats) throw std::runtime_error("lv pilot file has the wrong shape");
      out.simulator = lv_simulator(p, PilotNormalizer{rows.row(0).transpose(), rows.row(1).transpose()});
      out.prior = lv_prior(p);
      out.theta_true = p.theta_true.array().log().matrix();
      break;
    }
    case ExperimentKind::mg1: {
      const Mg1Problem p;
      const Matrix rows = read_artifact(dir / "pilot.txt").data;
      if (rows.rows() != 1 + kMg1Stats || rows.cols() != kMg1Stats)
        throw std::runtime_error("mg1 pilot file has the wrong shape");
      out.simulator = mg1_simulator(p, PilotWhitener{rows.row(0).transpose(), rows.bottomRows(kMg1Stats)});
      out.prior = mg1_prior(p);
      out.theta_true = mg1_to_inference(p.theta_true);
      break;
    }
  }
  if (out.x_o.size() != out.simulator.x_dim) throw DimensionMismatch("load_problem x_o", out.simulator.x_dim, out.x_o.size());
  return out;
}

}  // namespace lfi
