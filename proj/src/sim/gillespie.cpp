#include "lfi/sim/gillespie.hpp"

#include "lfi/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace lfi {

SsaTrajectory gillespie(const std::vector<Reaction>& reactions, Counts initial, Scalar duration,
                        Scalar interval, Rng& rng, long max_events) {
  if (!(interval > 0.0) || !(duration >= 0.0)) throw std::invalid_argument("gillespie: bad time grid");
  for (const auto& r : reactions)
    if (r.change.size() != initial.size()) throw DimensionMismatch("gillespie", initial.size(), r.change.size());

  const auto n_records = static_cast<Index>(std::llround(duration / interval)) + 1;
  SsaTrajectory out;
  out.records.resize(initial.size(), n_records);
  Counts state = std::move(initial);
  std::vector<Scalar> rates(reactions.size());
  std::exponential_distribution<Scalar> unit_exp(1.0);

  Scalar t = 0.0;
  Index next_record = 0;
  while (next_record < n_records) {
    Scalar total = 0.0;
    for (std::size_t i = 0; i < reactions.size(); ++i) total += rates[i] = reactions[i].rate(state);
    const Scalar t_next = total > 0.0 ? t + unit_exp(rng) / total : std::numeric_limits<Scalar>::infinity();
    while (next_record < n_records && static_cast<Scalar>(next_record) * interval < t_next)
      out.records.col(next_record++) = state;
    if (next_record == n_records) break;

    Scalar u = uniform01(rng) * total;
    std::size_t fired = 0;
    while (fired + 1 < reactions.size() && u >= rates[fired]) u -= rates[fired++];
    state += reactions[fired].change;
    t = t_next;
    if (++out.n_events > max_events)
      throw SimulationExploded("gillespie: more than " + std::to_string(max_events) + " events");
  }
  return out;
}

}  // namespace lfi
