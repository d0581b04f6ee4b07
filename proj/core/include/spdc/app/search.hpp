#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spdc/app/config.hpp"
#include "spdc/gaussian_model.hpp"

namespace spdc::app {

struct DesignVariable {
    std::string param;  // dotted config path, e.g. "crystal.length_mm"
    double min = 0.0;
    double max = 0.0;
    std::optional<double> start;  // defaults to the value in the base config, else the midpoint
};

struct DesignSpace {
    std::vector<DesignVariable> variables;
    double min_margin = 0.0;  // required binding separation margin, 0 disables the constraint
    double tolerance = 1e-3;  // line searches stop below this fraction of each range
    int max_cycles = 4;

    /// {"variables": [{"param", "min", "max", "start"?}], "min_margin"?, "tolerance"?, "max_cycles"?}
    static DesignSpace parse(const Json& doc);
};

struct Evaluation {
    std::vector<double> x;
    double objective = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::optional<SeparationMargins> margins;
    double peak_signal_nm = 0.0;  // brightest spot used for the objective
    double peak_idler_nm = 0.0;
    std::string note;             // failure or constraint message
};

struct SearchResult {
    Evaluation best;
    std::vector<Evaluation> log;  // in evaluation order
};

using Objective = std::function<Evaluation(const std::vector<double>&)>;

/// Coordinate descent with golden-section line searches over the box of
/// `space`. Each distinct point costs one evaluation of `budget`; repeated
/// points are served from a cache. Returns the best feasible logged point.
/// Throws when no evaluated point is feasible.
SearchResult coordinate_descent(const DesignSpace& space, const Objective& objective, int budget,
                                const std::vector<double>& start);

/// Objective of the app: brightest-spot Schmidt number of `base` with the
/// design variables substituted, subject to the margin constraint.
Evaluation evaluate_design(const Json& base, const DesignSpace& space, const std::vector<double>& x);

/// Start point: explicit starts, else values found in `base`, else midpoints.
std::vector<double> start_point(const Json& base, const DesignSpace& space);

SearchResult design_search(const Json& base, const DesignSpace& space, int budget);

}  // namespace spdc::app
