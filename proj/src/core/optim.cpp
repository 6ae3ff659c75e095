#include "core/optim.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace bvoc {

void validate_schedule(const ScheduleConfig& s)
{
    // total_iterations 0 is a valid no-op schedule; cosine_lr then rejects
    // every t.
    if (!(s.lr_min < s.lr_max))
        throw ConfigError("lr_min must be below lr_max");
    if (!(s.lr_min >= 0.0) || !std::isfinite(s.lr_max))
        throw ConfigError("learning rates must be finite and non-negative");
    uint64_t prev = 0;
    for (uint64_t r : s.restart_iterations) {
        if (r <= prev || r >= s.total_iterations)
            throw ConfigError("restart_iterations must be strictly increasing and "
                              "inside (0, total_iterations)");
        prev = r;
    }
    if (!s.restart_weights.empty() &&
        s.restart_weights.size() != s.restart_iterations.size())
        throw ConfigError("restart_weights count must match restart_iterations");
    for (double w : s.restart_weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw ConfigError("restart_weights must be positive");
}

std::vector<uint64_t> scaled_restarts(uint64_t total_iterations)
{
    // 10k/20k/40k of 50k. Degenerate short runs get no restarts.
    std::vector<uint64_t> out;
    for (uint64_t num : {1, 2, 4}) {
        const uint64_t r = total_iterations * num / 5;
        if (r > 0 && r < total_iterations && (out.empty() || r > out.back()))
            out.push_back(r);
    }
    return out;
}

double cosine_value(double lr_min, double peak, double t_cur, double t_i)
{
    return lr_min + (peak - lr_min) * 0.5 * (1.0 + std::cos(M_PI * t_cur / t_i));
}

double cosine_lr(const ScheduleConfig& s, uint64_t t)
{
    validate_schedule(s);
    if (t >= s.total_iterations)
        throw DomainError("iteration outside the schedule");

    // Locate the period [start, end) containing t.
    uint64_t start = 0, end = s.total_iterations;
    double weight = 1.0;
    for (size_t i = 0; i < s.restart_iterations.size(); ++i) {
        if (t < s.restart_iterations[i]) {
            end = s.restart_iterations[i];
            break;
        }
        start = s.restart_iterations[i];
        weight = s.restart_weights.empty() ? 1.0 : s.restart_weights[i];
    }

    const double t_cur = static_cast<double>(t - start);
    const double t_i = static_cast<double>(end - start);
    return cosine_value(s.lr_min, weight * s.lr_max, t_cur, t_i);
}

OptimState make_optim_state(const std::vector<Param>& params)
{
    OptimState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const Param& p : params) {
        st.m.emplace_back(p.value.size(), 0.0);
        st.v.emplace_back(p.value.size(), 0.0);
    }
    return st;
}

void adam_step(std::vector<Param>& params, OptimState& state, double lr)
{
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw ShapeError("optimizer state does not match parameter list");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));

    for (size_t p = 0; p < params.size(); ++p) {
        auto& value = params[p].value.v;
        const auto& grad = params[p].grad.v;
        auto& m = state.m[p];
        auto& v = state.v[p];
        if (m.size() != value.size() || grad.size() != value.size())
            throw ShapeError("optimizer buffer shape mismatch: " + params[p].name);
        for (size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            if (!std::isfinite(g))
                throw NumericsError("non-finite gradient in " + params[p].name);
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

} // namespace bvoc
