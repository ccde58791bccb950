#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zirec/model.hpp"
#include "zirec/rng.hpp"

namespace zirec {

/// pi_k = v_k * prod_{h<k} (1 - v_h) with the implicit v_K = 1.
/// raw_sticks must hold K - 1 values in (0, 1).
std::vector<double> stick_to_weights(std::span<const double> raw_sticks, std::size_t truncation);

/// Blocked-Gibbs stick update: v_l ~ Beta(1 + n_l, phi + sum_{t>l} n_t) for l < K.
std::vector<double> posterior_stick_update(std::span<const int> counts, double concentration, Rng& rng);

/// Draws a 0-based category with probability softmax(log_scores).
std::size_t sample_assignment(std::span<const double> log_scores, Rng& rng);

/// Conjugate draw of the concentration under Beta(1, phi) sticks and a Gamma(a, b) prior:
/// Gamma(a + K - 1, b - sum log(1 - v_l)).
double update_concentration(std::span<const double> raw_sticks, double a, double b, Rng& rng);

/// A fresh truncated mixture: sticks from Beta(1, phi) and assignments drawn from the weights.
/// Atoms are left to the caller.
TruncatedDP draw_stick_prior(std::size_t truncation, std::size_t num_units, double concentration, Rng& rng);

}  // namespace zirec
