#include "spdc/app/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "spdc/app/pipeline.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::app {

DesignSpace DesignSpace::parse(const Json& doc) {
    if (!doc.is_object()) throw ValidationError("<space>", "expected an object");
    DesignSpace s;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        if (key == "variables") continue;
        if (key == "min_margin" || key == "tolerance") {
            if (!it->is_number()) throw ValidationError(key, "expected a number");
        } else if (key == "max_cycles") {
            if (!it->is_number_integer()) throw ValidationError(key, "expected an integer");
        } else {
            throw ValidationError(key, "unknown key");
        }
    }
    s.min_margin = doc.value("min_margin", s.min_margin);
    s.tolerance = doc.value("tolerance", s.tolerance);
    s.max_cycles = doc.value("max_cycles", s.max_cycles);
    if (!(s.min_margin >= 0.0)) throw ValidationError("min_margin", "must be non-negative");
    if (!(s.tolerance > 0.0 && s.tolerance < 1.0)) throw ValidationError("tolerance", "must lie in (0, 1)");
    if (s.max_cycles < 1) throw ValidationError("max_cycles", "must be at least 1");

    const auto vars = doc.find("variables");
    if (vars == doc.end() || !vars->is_array() || vars->empty())
        throw ValidationError("variables", "expected a non-empty array");
    for (std::size_t i = 0; i < vars->size(); ++i) {
        const Json& v = (*vars)[i];
        const std::string path = "variables[" + std::to_string(i) + "]";
        if (!v.is_object()) throw ValidationError(path, "expected an object");
        for (auto it = v.begin(); it != v.end(); ++it)
            if (it.key() != "param" && it.key() != "min" && it.key() != "max" && it.key() != "start")
                throw ValidationError(path + "." + it.key(), "unknown key");
        DesignVariable d;
        if (!v.contains("param") || !v["param"].is_string()) throw ValidationError(path + ".param", "expected a string");
        for (const char* k : {"min", "max"})
            if (!v.contains(k) || !v[k].is_number()) throw ValidationError(path + "." + k, "expected a number");
        d.param = v["param"].get<std::string>();
        parameter_pointer(d.param);
        d.min = v["min"].get<double>();
        d.max = v["max"].get<double>();
        if (!(d.max > d.min)) throw ValidationError(path, "range must be non-empty (max > min)");
        if (v.contains("start")) {
            if (!v["start"].is_number()) throw ValidationError(path + ".start", "expected a number");
            d.start = v["start"].get<double>();
            if (*d.start < d.min || *d.start > d.max) throw ValidationError(path + ".start", "outside [min, max]");
        }
        s.variables.push_back(d);
    }
    if (s.variables.size() > 5) throw ValidationError("variables", "at most 5 design variables");
    return s;
}

std::vector<double> start_point(const Json& base, const DesignSpace& space) {
    std::vector<double> x;
    for (const auto& v : space.variables) {
        double value = 0.5 * (v.min + v.max);
        const auto ptr = parameter_pointer(v.param);
        if (v.start) {
            value = *v.start;
        } else if (base.contains(ptr) && base.at(ptr).is_number()) {
            value = std::clamp(base.at(ptr).get<double>(), v.min, v.max);
        }
        x.push_back(value);
    }
    return x;
}

Evaluation evaluate_design(const Json& base, const DesignSpace& space, const std::vector<double>& x) {
    Evaluation e;
    e.x = x;
    try {
        Json doc = base;
        for (std::size_t k = 0; k < x.size(); ++k) doc = with_parameter(doc, space.variables[k].param, x[k]);
        RunConfig cfg = parse_config(doc);
        cfg.analysis.refinement_check = false;
        const SourceModel model = build_model(cfg);
        const TpsaGrid full = build_tpsa(model.crystal, model.pump, full_grid(cfg, model));
        const Peak brightest = brightest_peak(full);
        const PeakAnalysis peak = analyze_peak(cfg, model, brightest);
        e.peak_signal_nm = units::omega_to_nm(peak.window.center.first);
        e.peak_idler_nm = units::omega_to_nm(peak.window.center.second);
        if (model.comb_spacing && model.peak_sigma) {
            try {
                e.margins = separation_margins(gaussian_peak_for(model.crystal, *model.peak_sigma, cfg.analysis.width_factor),
                                               *model.comb_spacing);
            } catch (const NotApplicable& err) {
                e.note = err.what();
            }
        }
        if (space.min_margin > 0.0 && !(e.margins && e.margins->binding() >= space.min_margin)) {
            std::ostringstream os;
            os << "separation margin constraint violated";
            if (e.margins) os << " (binding " << e.margins->binding() << " < " << space.min_margin << ")";
            e.note = os.str();
            return e;
        }
        e.objective = peak.schmidt_number;
        e.feasible = true;
    } catch (const Error& err) {
        e.note = err.what();
    }
    return e;
}

namespace {

class Evaluator {
public:
    Evaluator(const Objective& f, int budget) : f_(f), budget_(budget) {}

    bool exhausted() const { return static_cast<int>(log_.size()) >= budget_; }

    // Cached value, or a fresh evaluation if budget remains, else nullopt.
    std::optional<double> operator()(const std::vector<double>& x) {
        if (auto it = cache_.find(x); it != cache_.end()) return log_[it->second].objective;
        if (exhausted()) return std::nullopt;
        Evaluation e = f_(x);
        e.x = x;
        cache_[x] = log_.size();
        log_.push_back(std::move(e));
        return log_.back().objective;
    }

    const std::vector<Evaluation>& log() const { return log_; }
    std::vector<Evaluation> take_log() { return std::move(log_); }

private:
    const Objective& f_;
    int budget_;
    std::map<std::vector<double>, std::size_t> cache_;
    std::vector<Evaluation> log_;
};

}  // namespace

SearchResult coordinate_descent(const DesignSpace& space, const Objective& objective, int budget,
                                const std::vector<double>& start) {
    if (budget < 1) throw ContractError("design search budget must be at least 1");
    if (start.size() != space.variables.size()) throw ContractError("start point dimension mismatch");
    Evaluator eval(objective, budget);
    std::vector<double> x = start;
    double fx = *eval(x);

    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int cycle = 0; cycle < space.max_cycles && !eval.exhausted(); ++cycle) {
        const double before = fx;
        for (std::size_t k = 0; k < x.size() && !eval.exhausted(); ++k) {
            const auto& var = space.variables[k];
            auto at = [&](double v) {
                std::vector<double> y = x;
                y[k] = v;
                return eval(y);
            };
            double a = var.min;
            double b = var.max;
            double c = b - ratio * (b - a);
            double d = a + ratio * (b - a);
            auto fc = at(c);
            auto fd = at(d);
            const double stop = space.tolerance * (var.max - var.min);
            while (fc && fd && (b - a) > stop) {
                if (*fc <= *fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - ratio * (b - a);
                    fc = at(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + ratio * (b - a);
                    fd = at(d);
                }
            }
            // Move to the best point seen on this line.
            for (const auto& e : eval.log()) {
                bool on_line = true;
                for (std::size_t j = 0; j < x.size(); ++j)
                    if (j != k && e.x[j] != x[j]) on_line = false;
                if (on_line && e.objective < fx) {
                    fx = e.objective;
                    x = e.x;
                }
            }
        }
        if (!(fx < before)) break;
    }

    SearchResult result;
    result.log = eval.take_log();
    const Evaluation* best = nullptr;
    for (const auto& e : result.log)
        if (e.feasible && (!best || e.objective < best->objective)) best = &e;
    if (!best) {
        std::ostringstream os;
        os << "design search found no feasible point";
        for (const auto& e : result.log) {
            if (!e.note.empty()) {
                os << "; first failing point (";
                for (std::size_t j = 0; j < e.x.size(); ++j) os << (j ? ", " : "") << space.variables[j].param << "=" << e.x[j];
                os << "): " << e.note;
                break;
            }
        }
        throw NotApplicable(os.str());
    }
    result.best = *best;
    return result;
}

SearchResult design_search(const Json& base, const DesignSpace& space, int budget) {
    const Objective f = [&](const std::vector<double>& x) { return evaluate_design(base, space, x); };
    return coordinate_descent(space, f, budget, start_point(base, space));
}

}  // namespace spdc::app
