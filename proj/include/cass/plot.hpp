#pragma once

#include <string>
#include <vector>

#include "cass/eval.hpp"
#include "cass/trainer.hpp"

namespace cass {

struct CurveRun {
    std::string label; // e.g. the mode name
    std::vector<EpochLog> logs;
};

// One SVG per component showing log10 of the per-epoch test error for every
// run, plus a zoom panel restricted to the final `last_k` epochs. Errors must
// be strictly positive for the log transform. Returns the written paths.
std::vector<std::string> plot_error_curves(const std::vector<CurveRun>& runs,
                                           const std::vector<std::string>& component_names,
                                           const std::string& out_prefix, int last_k = 200);

// One SVG scatter per (source -> judge) pair: discriminator output against
// test sample index, with the 0.5 decision line. Returns the written paths.
std::vector<std::string> plot_discriminator_outputs(
    const std::vector<CrossAnalysisRecord>& records,
    const std::vector<std::string>& component_names, const std::string& out_prefix);

} // namespace cass
