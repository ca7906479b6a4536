#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fragsim {

// Exit-code mapping used by the CLI: 2 = configuration, 3 = resource limit.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct iteration_diverged_error : std::runtime_error {
  explicit iteration_diverged_error(const std::string& what,
                                    std::vector<double> residuals = {})
      : std::runtime_error(what), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

struct grid_too_small_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct unsupported_point_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct chain_too_short_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct window_exceeded_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct rejection_budget_error : std::runtime_error {
  rejection_budget_error(const std::string& what, double acceptance)
      : std::runtime_error(what), acceptance_estimate(acceptance) {}
  double acceptance_estimate;
};

struct insufficient_data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fragsim
