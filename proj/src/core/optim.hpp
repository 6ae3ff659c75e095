#pragma once

#include <cstdint>
#include <vector>

#include "core/model.hpp"

namespace bvoc {

/// Cosine annealing with warm restarts. Periods are delimited by
/// restart_iterations plus total_iterations; at each restart the rate
/// jumps back to restart_weight * lr_max (weights default to 1).
struct ScheduleConfig {
    double lr_max = 1e-4;
    double lr_min = 1e-7;
    std::vector<uint64_t> restart_iterations;
    uint64_t total_iterations = 0;
    std::vector<double> restart_weights; // empty means all 1.0

    bool operator==(const ScheduleConfig&) const = default;
};

void validate_schedule(const ScheduleConfig& s);

/// Reference restart placement: 1/5, 2/5 and 4/5 of the run, scaled from
/// the 10k/20k/40k-of-50k layout.
std::vector<uint64_t> scaled_restarts(uint64_t total_iterations);

/// Closed-form annealed rate: lr_min + (peak - lr_min)*(1 + cos(pi*t_cur/t_i))/2.
/// Gives peak at t_cur = 0 and lr_min at t_cur = t_i.
double cosine_value(double lr_min, double peak, double t_cur, double t_i);

/// lr at iteration t: cosine_value with T_cur counted from the latest
/// restart and T_i the current period length. t outside [0, total) is a
/// DomainError.
double cosine_lr(const ScheduleConfig& s, uint64_t t);

/// Bias-corrected Adam. Moment buffers are index-aligned with the model's
/// parameter list.
struct OptimState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint64_t t = 0;
    std::vector<std::vector<double>> m, v;
};

OptimState make_optim_state(const std::vector<Param>& params);

/// One update from the gradients currently stored on the params.
/// Non-finite gradients abort with NumericsError.
void adam_step(std::vector<Param>& params, OptimState& state, double lr);

} // namespace bvoc
