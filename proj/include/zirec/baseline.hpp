#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace zirec {

/// Piecewise-constant hazard: level g applies on (s_{g-1}, s_g]; the last level extends past s_G.
struct PiecewiseConstant {
    std::vector<double> grid;    // s_0 = 0 < s_1 < ... < s_G
    std::vector<double> levels;  // lambda_01 ... lambda_0G
};

/// Power-law hazard psi * t^(psi - 1), i.e. Weibull with unit scale.
struct PowerLaw {
    double shape = 1.0;
};

class BaselineHazard {
public:
    BaselineHazard() : BaselineHazard(PowerLaw{1.0}) {}

    static BaselineHazard piecewise(std::vector<double> grid, std::vector<double> levels);
    static BaselineHazard power_law(double shape);

    bool is_piecewise() const { return std::holds_alternative<PiecewiseConstant>(spec_); }
    const PiecewiseConstant& piecewise_spec() const { return std::get<PiecewiseConstant>(spec_); }
    const PowerLaw& power_law_spec() const { return std::get<PowerLaw>(spec_); }

    std::size_t num_levels() const;
    /// Level g (0-based) of the piecewise variant.
    double level(std::size_t g) const { return piecewise_spec().levels[g]; }
    void set_level(std::size_t g, double value);
    double shape() const { return power_law_spec().shape; }
    void set_shape(double psi);

    /// Index of the interval containing t (0-based); t <= s_1 maps to 0, t > s_G to G-1.
    std::size_t interval_of(double t) const;

    double hazard(double t) const;
    double log_hazard(double t) const;
    /// Lambda0(t), closed form.
    double cumulative(double t) const;
    /// Smallest t with Lambda0(t) = y.
    double inverse_cumulative(double y) const;

    /// Length of (0, horizon] falling in each piecewise interval (last interval unbounded).
    std::vector<double> exposure(double horizon) const;

private:
    explicit BaselineHazard(std::variant<PiecewiseConstant, PowerLaw> spec) : spec_(std::move(spec)) {}

    std::variant<PiecewiseConstant, PowerLaw> spec_;
};

double cumulative_baseline_hazard(double t, const BaselineHazard& baseline);

/// Equal-probability grid over pooled event times: s_g = type-7 quantile g/G, s_G = max.
/// Duplicated cut points are dropped; an empty sample yields a unit grid.
std::vector<double> quantile_grid(std::vector<double> times, std::size_t num_intervals);

}  // namespace zirec
