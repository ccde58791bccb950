#include "zirec/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zirec/errors.hpp"
#include "zirec/stats.hpp"

namespace zirec {

BaselineHazard BaselineHazard::piecewise(std::vector<double> grid, std::vector<double> levels)
{
    if (grid.size() < 2 || levels.size() != grid.size() - 1)
        throw ConfigError("piecewise baseline needs G >= 1 levels and G + 1 grid points");
    if (grid.front() != 0.0) throw ConfigError("piecewise grid must start at 0");
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (!(grid[g] > grid[g - 1])) throw ConfigError("piecewise grid must be strictly increasing");
    for (double l : levels)
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("baseline levels must be positive");
    return BaselineHazard(PiecewiseConstant{std::move(grid), std::move(levels)});
}

BaselineHazard BaselineHazard::power_law(double shape)
{
    if (!(shape > 0.0) || !std::isfinite(shape)) throw ConfigError("power-law shape must be positive");
    return BaselineHazard(PowerLaw{shape});
}

std::size_t BaselineHazard::num_levels() const
{
    return is_piecewise() ? piecewise_spec().levels.size() : 0;
}

void BaselineHazard::set_level(std::size_t g, double value)
{
    if (!(value > 0.0)) throw DomainError("baseline level must be positive");
    std::get<PiecewiseConstant>(spec_).levels.at(g) = value;
}

void BaselineHazard::set_shape(double psi)
{
    if (!(psi > 0.0)) throw DomainError("power-law shape must be positive");
    std::get<PowerLaw>(spec_).shape = psi;
}

std::size_t BaselineHazard::interval_of(double t) const
{
    const auto& pc = piecewise_spec();
    // first grid point >= t among s_1..s_G
    const auto it = std::lower_bound(pc.grid.begin() + 1, pc.grid.end(), t);
    if (it == pc.grid.end()) return pc.levels.size() - 1;
    return static_cast<std::size_t>(it - pc.grid.begin()) - 1;
}

double BaselineHazard::hazard(double t) const
{
    if (t < 0.0) throw DomainError("baseline hazard at negative time");
    if (is_piecewise()) return piecewise_spec().levels[interval_of(t)];
    const double psi = shape();
    return psi * std::pow(t, psi - 1.0);
}

double BaselineHazard::log_hazard(double t) const
{
    if (t < 0.0) throw DomainError("baseline hazard at negative time");
    if (is_piecewise()) return std::log(piecewise_spec().levels[interval_of(t)]);
    const double psi = shape();
    return std::log(psi) + (psi - 1.0) * std::log(t);
}

double BaselineHazard::cumulative(double t) const
{
    if (t < 0.0) throw DomainError("cumulative baseline hazard at negative time");
    if (t == 0.0) return 0.0;
    if (!is_piecewise()) return std::pow(t, shape());
    const auto& pc = piecewise_spec();
    const std::size_t last = pc.levels.size() - 1;
    double acc = 0.0;
    for (std::size_t g = 0; g <= last; ++g) {
        const double lo = pc.grid[g];
        if (t <= lo) break;
        const double hi = (g == last) ? t : std::min(t, pc.grid[g + 1]);
        acc += pc.levels[g] * (hi - lo);
    }
    return acc;
}

double BaselineHazard::inverse_cumulative(double y) const
{
    if (y < 0.0) throw DomainError("inverse cumulative hazard of a negative value");
    if (y == 0.0) return 0.0;
    if (!is_piecewise()) return std::pow(y, 1.0 / shape());
    const auto& pc = piecewise_spec();
    const std::size_t last = pc.levels.size() - 1;
    double acc = 0.0;
    for (std::size_t g = 0; g < last; ++g) {
        const double width = pc.grid[g + 1] - pc.grid[g];
        const double mass = pc.levels[g] * width;
        if (y <= acc + mass) return pc.grid[g] + (y - acc) / pc.levels[g];
        acc += mass;
    }
    return pc.grid[last] + (y - acc) / pc.levels[last];
}

std::vector<double> BaselineHazard::exposure(double horizon) const
{
    const auto& pc = piecewise_spec();
    const std::size_t n = pc.levels.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t g = 0; g < n; ++g) {
        const double lo = pc.grid[g];
        if (horizon <= lo) break;
        const double hi = (g + 1 == n) ? horizon : std::min(horizon, pc.grid[g + 1]);
        out[g] = hi - lo;
    }
    return out;
}

double cumulative_baseline_hazard(double t, const BaselineHazard& baseline)
{
    return baseline.cumulative(t);
}

std::vector<double> quantile_grid(std::vector<double> times, std::size_t num_intervals)
{
    if (num_intervals == 0) throw ConfigError("grid needs at least one interval");
    std::vector<double> grid{0.0};
    std::erase_if(times, [](double t) { return !(t > 0.0); });
    if (times.empty()) {
        for (std::size_t g = 1; g <= num_intervals; ++g)
            grid.push_back(static_cast<double>(g) / static_cast<double>(num_intervals));
        return grid;
    }
    std::sort(times.begin(), times.end());
    for (std::size_t g = 1; g <= num_intervals; ++g) {
        const double cut = (g == num_intervals)
                               ? times.back()
                               : quantile_sorted(times, static_cast<double>(g) / static_cast<double>(num_intervals));
        if (cut > grid.back()) grid.push_back(cut);
    }
    return grid;
}

}  // namespace zirec
