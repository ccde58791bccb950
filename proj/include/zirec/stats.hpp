#pragma once

#include <span>

namespace zirec {

/// log(sum(exp(x))) with max shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

double log_add_exp(double a, double b);

/// Type-7 (linear interpolation) quantile of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double prob);

double logistic(double x);

/// log(1 / (1 + exp(-x))) without overflow.
double log_logistic(double x);

double log_normal_kernel(double x, double variance);

/// Gamma(shape, rate) log density.
double log_gamma_density(double x, double shape, double rate);

}  // namespace zirec
