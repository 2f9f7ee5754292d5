// Python bindings for the pose refinement core: geometry, symmetry,
// plausibility, environment, scoring, metrics and scene generation.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "poseref/datagen.hpp"
#include "poseref/environment.hpp"
#include "poseref/il_dataset.hpp"
#include "poseref/metrics.hpp"
#include "poseref/scene_io.hpp"

namespace py = pybind11;
using namespace poseref;

namespace {

PointCloud cloud_from_array(const Eigen::MatrixXd& pts) {
  if (pts.cols() != 3) throw std::invalid_argument("points must be (N,3)");
  PointCloud c;
  c.points.reserve(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) c.points.emplace_back(pts.row(i).transpose());
  return c;
}

Eigen::MatrixXd cloud_to_array(const PointCloud& c) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(c.size()), 3);
  for (std::size_t i = 0; i < c.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = c.points[i];
  return m;
}

}  // namespace

PYBIND11_MODULE(_poseref, m) {
  m.doc() = "Scene-level object pose refinement core";
  m.attr("__version__") = "0.1.0";

  py::class_<Rotation>(m, "Rotation")
      .def(py::init<>())
      .def_static("from_matrix", &Rotation::from_matrix)
      .def_static("axis_angle", &Rotation::axis_angle)
      .def_static("rot_x", &Rotation::rot_x)
      .def_static("rot_y", &Rotation::rot_y)
      .def_static("rot_z", &Rotation::rot_z)
      .def("matrix", &Rotation::matrix)
      .def("angle", &Rotation::angle)
      .def("inverse", &Rotation::inverse)
      .def(py::self * py::self);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init<const Rotation&, const Vec3&>())
      .def_readwrite("rotation", &RigidTransform::rotation)
      .def_readwrite("translation", &RigidTransform::translation)
      .def("apply", &RigidTransform::apply)
      .def("inverse", &RigidTransform::inverse)
      .def("matrix", &RigidTransform::matrix);

  m.def("compose", &compose, "Applies b first, then a");
  m.def("rotation_angle", &rotation_angle);
  m.def("rotation_angle_between", &rotation_angle_between);
  m.def("euler_xyz", &euler_xyz);

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init<>())
      .def(py::init(&cloud_from_array), py::arg("points"))
      .def_property_readonly("points", &cloud_to_array)
      .def("__len__", &PointCloud::size)
      .def("transformed", &PointCloud::transformed);

  m.def("chamfer_distance", &chamfer_distance);

  py::enum_<SymmetryVariant>(m, "SymmetryVariant")
      .value("NONE", SymmetryVariant::kNone)
      .value("CYLINDRICAL", SymmetryVariant::kCylindrical)
      .value("CUBOID", SymmetryVariant::kCuboid)
      .value("BOX", SymmetryVariant::kBox)
      .value("FRONT_BACK", SymmetryVariant::kFrontBack)
      .value("ROTATIONAL", SymmetryVariant::kRotational);

  py::class_<SymmetryClass>(m, "SymmetryClass")
      .def(py::init<>())
      .def(py::init([](SymmetryVariant v, double res) {
             return SymmetryClass{v, res};
           }),
           py::arg("variant"), py::arg("resolution_deg") = 5.0)
      .def_readwrite("variant", &SymmetryClass::variant)
      .def_readwrite("resolution_deg", &SymmetryClass::resolution_deg);

  py::class_<SymmetrySet>(m, "SymmetrySet")
      .def_readonly("rotations", &SymmetrySet::rotations)
      .def("__len__", &SymmetrySet::size);

  m.def("enumerate_symmetries", &enumerate_symmetries);
  m.def("closest_symmetric_pose", &closest_symmetric_pose);
  m.def("symmetry_aware_angle", &symmetry_aware_angle);

  py::class_<PlausibilityVerdict>(m, "PlausibilityVerdict")
      .def_readonly("intersecting", &PlausibilityVerdict::intersecting)
      .def_readonly("floating", &PlausibilityVerdict::floating)
      .def_readonly("feasible", &PlausibilityVerdict::feasible)
      .def_readonly("stable", &PlausibilityVerdict::stable);

  m.def("stability_check", &stability_check);

  py::class_<ActionSpace>(m, "ActionSpace")
      .def(py::init<>())
      .def_readwrite("step_sizes", &ActionSpace::step_sizes)
      .def("num_per_axis", &ActionSpace::num_per_axis)
      .def("stop_index", &ActionSpace::stop_index)
      .def("value", &ActionSpace::value)
      .def("floor_index", &ActionSpace::floor_index);

  py::class_<Action>(m, "Action")
      .def(py::init<>())
      .def_static("stop", &Action::stop)
      .def_readwrite("rotation", &Action::rotation)
      .def_readwrite("translation", &Action::translation)
      .def("is_stop", &Action::is_stop);

  m.def("apply_action", &apply_action);
  m.def("expert_action", &expert_action);

  py::class_<AlignmentRewardConfig>(m, "AlignmentRewardConfig")
      .def(py::init<>())
      .def_readwrite("worsen", &AlignmentRewardConfig::worsen)
      .def_readwrite("stagnate", &AlignmentRewardConfig::stagnate)
      .def_readwrite("improve", &AlignmentRewardConfig::improve);

  m.def("alignment_reward", &alignment_reward);
  m.def("plausibility_reward", &plausibility_reward);

  py::class_<ObservationPoint>(m, "ObservationPoint")
      .def_readonly("position", &ObservationPoint::position)
      .def_readonly("normal", &ObservationPoint::normal)
      .def_readonly("surface_distance", &ObservationPoint::surface_distance);

  py::class_<Observation>(m, "Observation")
      .def_readonly("source", &Observation::source)
      .def_readonly("target", &Observation::target)
      .def_readonly("source_foreground", &Observation::source_foreground)
      .def_readonly("class_id", &Observation::class_id)
      .def("class_one_hot", &Observation::class_one_hot);

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("EXPERT", PolicyKind::kExpert)
      .value("GREEDY", PolicyKind::kGreedy)
      .value("EXTERNAL", PolicyKind::kExternal);

  py::class_<TrajectoryStep>(m, "TrajectoryStep")
      .def_readonly("iteration", &TrajectoryStep::iteration)
      .def_readonly("action", &TrajectoryStep::action)
      .def_readonly("alignment_reward", &TrajectoryStep::alignment_reward)
      .def_readonly("plausibility_reward", &TrajectoryStep::plausibility_reward)
      .def_readonly("chamfer_after", &TrajectoryStep::chamfer_after)
      .def_readonly("pose_after", &TrajectoryStep::pose_after)
      .def_readonly("verdict_after", &TrajectoryStep::verdict_after)
      .def_readonly("score", &TrajectoryStep::score)
      .def_readonly("observation", &TrajectoryStep::observation);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("object_index", &Trajectory::object_index)
      .def_readonly("class_id", &Trajectory::class_id)
      .def_readonly("init_pose", &Trajectory::init_pose)
      .def_readonly("gt_pose", &Trajectory::gt_pose)
      .def_readonly("init_chamfer", &Trajectory::init_chamfer)
      .def_readonly("steps", &Trajectory::steps)
      .def("poses", &Trajectory::poses);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("min_objects", &ScenarioConfig::min_objects)
      .def_readwrite("max_objects", &ScenarioConfig::max_objects)
      .def_readwrite("primitives", &ScenarioConfig::primitives)
      .def_readwrite("points_per_object", &ScenarioConfig::points_per_object)
      .def_readwrite("depth_noise_sigma", &ScenarioConfig::depth_noise_sigma);

  py::class_<AugmentationConfig>(m, "AugmentationConfig")
      .def(py::init<>())
      .def_readwrite("foreground_fraction_min", &AugmentationConfig::foreground_fraction_min)
      .def_readwrite("foreground_fraction_max", &AugmentationConfig::foreground_fraction_max)
      .def_readwrite("rotation_error_max_deg", &AugmentationConfig::rotation_error_max_deg)
      .def_readwrite("translation_error_max_units", &AugmentationConfig::translation_error_max_units)
      .def_readwrite("points_per_object", &AugmentationConfig::points_per_object);

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("action_space", &EnvConfig::action_space)
      .def_readwrite("rho", &EnvConfig::rho)
      .def_readwrite("rho_p", &EnvConfig::rho_p)
      .def_readwrite("iterations", &EnvConfig::iterations)
      .def_readwrite("record_observations", &EnvConfig::record_observations);

  // Scene generation returns an opaque handle; the environment consumes it.
  py::class_<SceneSample>(m, "SceneSample")
      .def_property_readonly("num_objects",
                             [](const SceneSample& s) { return s.objects.size(); })
      .def("gt_pose", [](const SceneSample& s, std::size_t i) { return s.objects.at(i).gt_pose; })
      .def("class_id",
           [](const SceneSample& s, std::size_t i) { return s.objects.at(i).model->class_id; })
      .def("diameter",
           [](const SceneSample& s, std::size_t i) { return s.objects.at(i).model->diameter; });

  m.def("generate_scene", &generate_scene, py::arg("config"), py::arg("seed"));
  m.def("perturb_pose", &perturb_pose);

  py::class_<RefinementEnv>(m, "RefinementEnv")
      .def(py::init([](const SceneSample& sample, const AugmentationConfig& aug,
                       double depth_noise_sigma, std::uint64_t seed, const EnvConfig& cfg) {
             const EpisodeBuildResult episode = build_episode(sample, aug, depth_noise_sigma, seed);
             return std::make_unique<RefinementEnv>(episode.scene, cfg);
           }),
           py::arg("sample"), py::arg("augmentation") = AugmentationConfig{},
           py::arg("depth_noise_sigma") = 0.0, py::arg("seed") = 1, py::arg("config") = EnvConfig{})
      .def("num_objects", &RefinementEnv::num_objects)
      .def("camera_pose", &RefinementEnv::camera_pose)
      .def("observation", &RefinementEnv::observation)
      .def("run",
           [](RefinementEnv& env, PolicyKind policy) { return env.run(policy); })
      .def("run_external", [](RefinementEnv& env, const ExternalPolicy& policy) {
        return env.run(PolicyKind::kExternal, &policy);
      });

  m.def("add_distance", &add_distance);
  m.def("adi_distance", &adi_distance);

  py::class_<EvalRecord>(m, "EvalRecord")
      .def(py::init<>())
      .def_readwrite("class_id", &EvalRecord::class_id)
      .def_readwrite("add", &EvalRecord::add)
      .def_readwrite("adi", &EvalRecord::adi)
      .def_readwrite("diameter", &EvalRecord::diameter)
      .def_readwrite("symmetric", &EvalRecord::symmetric)
      .def("ad", &EvalRecord::ad);

  m.def("recall_at", &recall_at);
  m.def("auc", &auc);

  m.def("export_il_dataset", &export_il_dataset);
}
