#include "misac/selection.hpp"

#include <cmath>
#include <stdexcept>

namespace misac {

std::vector<double> compute_log_scores(const Scenario& s, const SystemConfig& cfg) {
  const double rho = cfg.selection_weight;
  const double beta = cfg.pathloss_exp_user;
  const int K = s.num_users();
  std::vector<double> out;
  for (int i = 0; i < s.num_bs(); ++i) {
    const double d0 = s.bs_target_distance(i, 0);
    if (!(d0 >= kGuardDistance)) throw std::invalid_argument("compute_scores: target within guard distance");
    double log_geo = 0.0;
    for (int k = 0; k < K; ++k) log_geo += beta * std::log(s.bs_user_distance(i, k));
    log_geo /= K;
    out.push_back(std::log(rho) - std::log1p(-rho) + log_geo - 2.0 * std::log(d0));
  }
  return out;
}

std::vector<double> compute_scores(const Scenario& s, const SystemConfig& cfg) {
  std::vector<double> q;
  for (double l : compute_log_scores(s, cfg)) q.push_back(std::exp(l));
  return q;
}

SelectionResult select_receiver(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("select_receiver: empty score list");
  SelectionResult r;
  r.scores = scores;
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (!std::isfinite(scores[i])) throw std::invalid_argument("select_receiver: non-finite score");
    if (scores[i] > scores[best]) best = i;
  }
  if (!std::isfinite(scores[0])) throw std::invalid_argument("select_receiver: non-finite score");
  r.receiver_index = best;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (i != best) r.transmitter_indices.push_back(i);
  }
  return r;
}

SelectionResult select_receiver(const Scenario& scenario, const SystemConfig& config) {
  const auto logs = compute_log_scores(scenario, config);
  // Argmax in the log domain; exp() is monotone so the choice is identical.
  SelectionResult r = select_receiver(logs);
  r.log_scores = logs;
  r.scores.clear();
  for (double l : logs) r.scores.push_back(std::exp(l));
  return r;
}

}  // namespace misac
