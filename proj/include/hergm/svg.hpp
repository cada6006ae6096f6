#ifndef HERGM_SVG_HPP
#define HERGM_SVG_HPP

#include <ostream>
#include <string>
#include <vector>

#include "hergm/experiments.hpp"
#include "hergm/gof.hpp"

namespace hergm {

struct SvgSeries {
    std::string name;
    std::vector<double> x, y;
    std::vector<double> lower, upper;  ///< optional band, same length as x
    bool dashed = false;
};

struct SvgPanel {
    std::string title, xlabel, ylabel;
    std::vector<SvgSeries> series;
};

/// Panels laid out in a row. Non-finite points are skipped.
void render_svg(const std::vector<SvgPanel>& panels, const std::string& title, std::ostream& out);

/// Observed line over the simulation envelope, one panel per diagnostic.
void plot_gof(const GofReport& r, std::ostream& out);
/// Mean rate against n, one line per transitivity level.
void plot_misrate(const MisrateResult& r, std::ostream& out);
/// Mean bias against rho, one panel per bias quantity.
void plot_sensitivity(const SensitivityResult& r, std::ostream& out);
/// Mean rate per scenario for both methods.
void plot_score(const ScoreExperimentResult& r, std::ostream& out);

}  // namespace hergm

#endif
