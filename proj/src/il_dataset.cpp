#include "poseref/il_dataset.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace poseref {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json observation_to_json(const Observation& obs) {
  json rows = json::object();
  auto pack = [](const std::vector<ObservationPoint>& pts) {
    json arr = json::array();
    for (const ObservationPoint& p : pts) {
      arr.push_back({p.position.x(), p.position.y(), p.position.z(), p.normal.x(), p.normal.y(),
                     p.normal.z(), p.surface_distance});
    }
    return arr;
  };
  rows["source"] = pack(obs.source);
  rows["target"] = pack(obs.target);
  rows["foreground"] = obs.source_foreground;
  rows["class_id"] = obs.class_id;
  rows["num_classes"] = obs.num_classes;
  return rows;
}

Observation observation_from_json(const json& j) {
  Observation obs;
  auto unpack = [](const json& arr) {
    std::vector<ObservationPoint> pts;
    pts.reserve(arr.size());
    for (const auto& row : arr) {
      ObservationPoint p;
      p.position = Vec3(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
      p.normal = Vec3(row[3].get<double>(), row[4].get<double>(), row[5].get<double>());
      p.surface_distance = row[6].get<double>();
      pts.push_back(p);
    }
    return pts;
  };
  obs.source = unpack(j.at("source"));
  obs.target = unpack(j.at("target"));
  obs.source_foreground = j.at("foreground").get<std::vector<std::uint8_t>>();
  obs.class_id = j.at("class_id").get<int>();
  obs.num_classes = j.at("num_classes").get<int>();
  return obs;
}

}  // namespace

void export_il_dataset(const std::vector<Trajectory>& trajectories, const std::string& path) {
  if (trajectories.empty()) throw std::invalid_argument("export_il_dataset: no trajectories");
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");

  json header;
  header["format"] = "poseref-il";
  header["schema_version"] = kSchemaVersion;
  header["episodes"] = trajectories.size();
  out << header.dump() << '\n';

  for (std::size_t e = 0; e < trajectories.size(); ++e) {
    const Trajectory& traj = trajectories[e];
    for (const TrajectoryStep& step : traj.steps) {
      if (step.observation.source.empty()) {
        throw std::invalid_argument(
            "export_il_dataset: trajectory lacks observations (run with record_observations)");
      }
      json rec;
      rec["episode"] = e;
      rec["object_index"] = traj.object_index;
      rec["class_id"] = traj.class_id;
      rec["iteration"] = step.iteration;
      rec["observation"] = observation_to_json(step.observation);
      rec["action"] = {{"rotation", step.action.rotation}, {"translation", step.action.translation}};
      rec["reward"] = {{"alignment", step.alignment_reward},
                       {"plausibility", step.plausibility_reward}};
      out << rec.dump() << '\n';
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<IlRecord> import_il_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const json header = json::parse(line);
  if (header.at("format") != "poseref-il") throw std::runtime_error(path + ": not an IL dataset");
  if (header.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::runtime_error(path + ": unsupported schema version");
  }

  std::vector<IlRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    IlRecord rec;
    rec.episode = j.at("episode").get<int>();
    rec.object_index = j.at("object_index").get<int>();
    rec.class_id = j.at("class_id").get<int>();
    rec.iteration = j.at("iteration").get<int>();
    rec.observation = observation_from_json(j.at("observation"));
    const auto& act = j.at("action");
    for (int i = 0; i < 3; ++i) {
      rec.action.rotation[static_cast<std::size_t>(i)] = act.at("rotation")[static_cast<std::size_t>(i)].get<int>();
      rec.action.translation[static_cast<std::size_t>(i)] = act.at("translation")[static_cast<std::size_t>(i)].get<int>();
    }
    rec.alignment_reward = j.at("reward").at("alignment").get<double>();
    rec.plausibility_reward = j.at("reward").at("plausibility").get<double>();
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace poseref
