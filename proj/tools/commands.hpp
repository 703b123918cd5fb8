#pragma once

#include "hhmmo/config.hpp"

namespace hhmmo::cli {

void cmd_geometry(const RunConfig& c);
void cmd_thresholds(const RunConfig& c);
// A fixed-duration run too short to classify writes only the trajectory.
void cmd_simulate(const RunConfig& c);
void cmd_classify(const RunConfig& c);
void cmd_sweep(const RunConfig& c);
void cmd_local(const RunConfig& c);

}  // namespace hhmmo::cli
