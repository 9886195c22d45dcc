#pragma once

#include <string>
#include <vector>

#include "gmrfdiff/runner.hpp"
#include "gmrfdiff/scenario.hpp"

namespace gmrfdiff {

enum class PresetMode { simulate, sweep, gain_sweep };

struct PresetPlan {
  std::string name;
  Scenario scenario;
  PresetMode mode = PresetMode::simulate;
  SweepAxis axis = SweepAxis::nu;  // sweep and gain_sweep (nu) only
  std::vector<double> values;
  std::vector<double> kappa_values;  // gain_sweep only
  std::string aware_label;           // gain_sweep only
  std::string agnostic_label;        // gain_sweep only
};

std::vector<std::string> preset_names();

// Full-scale configuration, or the reduced desk variant (N <= 10, runs <= 50;
// M <= 5 except the sparse presets, which need room for a sparse support).
// Throws UnknownPreset.
PresetPlan preset_plan(const std::string& name, bool desk);
inline Scenario preset(const std::string& name, bool desk) { return preset_plan(name, desk).scenario; }

// The scenario document behind a preset, in the config grammar (JSON form).
std::string preset_document(const std::string& name, bool desk);

}  // namespace gmrfdiff
