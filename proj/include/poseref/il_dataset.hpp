#pragma once

#include <string>
#include <vector>

#include "poseref/environment.hpp"

namespace poseref {

// One imitation-learning sample: the observation the expert saw, the expert
// action indices and the rewards that followed.
struct IlRecord {
  int episode = 0;
  int object_index = 0;
  int class_id = 0;
  int iteration = 0;
  Observation observation;
  Action action;
  double alignment_reward = 0.0;
  double plausibility_reward = 0.0;
};

// JSON-lines export: a schema header line followed by one record per line.
// Trajectories must carry observations (run with record_observations).
void export_il_dataset(const std::vector<Trajectory>& trajectories, const std::string& path);

std::vector<IlRecord> import_il_dataset(const std::string& path);

}  // namespace poseref
