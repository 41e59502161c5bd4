#pragma once

#include <vector>

#include "misac/config.hpp"
#include "misac/scenario.hpp"

namespace misac {

/// Outcome of the distance-based receiver selection.
///
/// The BS with the largest score becomes the multistatic *receiver* (it is
/// relabelled as the last BS); the rest transmit. The selection criterion
/// rewards BSs far from the users and close to the desired target, which is
/// what a receiver wants.
struct SelectionResult {
  std::vector<double> scores;       // Q_i
  std::vector<double> log_scores;   // ln Q_i
  int receiver_index = -1;
  std::vector<int> transmitter_indices;  // remaining BSs, original order
};

/// ln Q_i = ln rho - ln(1 - rho) + (beta / K) sum_k ln r_{i,k} - 2 ln d_{i,0},
/// evaluated in the log domain so large products cannot overflow.
std::vector<double> compute_log_scores(const Scenario& scenario, const SystemConfig& config);

/// Q_i = rho (prod_k r_{i,k}^beta)^(1/K) / ((1 - rho) d_{i,0}^2).
std::vector<double> compute_scores(const Scenario& scenario, const SystemConfig& config);

/// Argmax with ties resolved towards the lowest index. Throws on empty input.
SelectionResult select_receiver(const std::vector<double>& scores);

/// compute_scores + select_receiver, also filling log_scores.
SelectionResult select_receiver(const Scenario& scenario, const SystemConfig& config);

}  // namespace misac
