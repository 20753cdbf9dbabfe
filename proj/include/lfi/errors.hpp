#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lfi {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& where, long expected, long got)
      : Error(where + ": dimension mismatch (expected " + std::to_string(expected) +
              ", got " + std::to_string(got) + ")") {}
};

/// A precision difference in mixture division was not positive definite.
class NonPositiveDefinite : public Error {
 public:
  explicit NonPositiveDefinite(std::size_t component)
      : Error("precision difference is not positive definite for component " +
              std::to_string(component)),
        component_(component) {}
  std::size_t component() const { return component_; }

 private:
  std::size_t component_;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class EmFailure : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(long epoch)
      : Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted(long n_simulations, long n_accepted)
      : Error("simulation budget of " + std::to_string(n_simulations) +
              " calls exhausted after " + std::to_string(n_accepted) + " acceptances"),
        n_simulations_(n_simulations),
        n_accepted_(n_accepted) {}
  long n_simulations() const { return n_simulations_; }
  long n_accepted() const { return n_accepted_; }

 private:
  long n_simulations_;
  long n_accepted_;
};

class DegenerateChain : public Error {
 public:
  using Error::Error;
};

/// Raised by a simulator when a draw runs away (e.g. too many Gillespie events).
class SimulationExploded : public Error {
 public:
  using Error::Error;
};

class PilotDegenerate : public Error {
 public:
  using Error::Error;
};

}  // namespace lfi
