#include "hybreach/dynamics.hpp"
#include "hybreach/error.hpp"
#include "hybreach/experiment.hpp"
#include "hybreach/geometry.hpp"
#include "hybreach/lp.hpp"
#include "hybreach/network.hpp"
#include "hybreach/oracle.hpp"
#include "hybreach/reach.hpp"
#include "hybreach/relaxation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace hybreach;

namespace {

std::vector<Point2> to_points(const Eigen::Ref<const Eigen::MatrixXd>& pts) {
  if (pts.cols() != 2) throw Error(ErrorKind::DimensionMismatch, "points must have shape (n, 2)");
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) out.emplace_back(pts(i, 0), pts(i, 1));
  return out;
}

}  // namespace

PYBIND11_MODULE(_hybreach, m) {
  m.doc() = "Backprojection set over-approximations for neural feedback loops";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "HybreachError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type.get_stored(), e.what());
    }
  });

  // geometry
  py::class_<HyperRect>(m, "HyperRect")
      .def(py::init<Vector, Vector>(), py::arg("lower"), py::arg("upper"))
      .def_static("around", &HyperRect::around, py::arg("center"), py::arg("half_widths"))
      .def_property_readonly("lower", &HyperRect::lower)
      .def_property_readonly("upper", &HyperRect::upper)
      .def_property_readonly("dim", &HyperRect::dim)
      .def("center", &HyperRect::center)
      .def("widths", &HyperRect::widths)
      .def("volume", [](const HyperRect& r) { return volume(r); })
      .def("contains", py::overload_cast<const HyperRect&, const Vector&, double>(&contains), py::arg("point"),
           py::arg("tol") = 0.0)
      .def("__eq__", [](const HyperRect& a, const HyperRect& b) { return a == b; })
      .def("__repr__", [](const HyperRect& r) {
        std::ostringstream os;
        os << "HyperRect(lower=" << r.lower().transpose() << ", upper=" << r.upper().transpose() << ")";
        return os.str();
      });

  py::class_<RotatedRect>(m, "RotatedRect")
      .def_readonly("center", &RotatedRect::center)
      .def_readonly("half_extents", &RotatedRect::half_extents)
      .def_readonly("angle", &RotatedRect::angle)
      .def("area", &RotatedRect::area)
      .def("corners", [](const RotatedRect& r) {
        Eigen::Matrix<double, 4, 2> c;
        const auto cs = r.corners();
        for (int i = 0; i < 4; ++i) c.row(i) = cs[static_cast<std::size_t>(i)].transpose();
        return c;
      });

  m.def("uniform_partition", [](const HyperRect& r, const std::vector<int>& counts) {
    return uniform_partition(r, counts);
  });
  m.def("bounding_rect", [](const std::vector<HyperRect>& rs) { return bounding_rect(rs); });
  m.def("volume", &volume);
  m.def("min_area_rotated_rect", [](const Eigen::Ref<const Eigen::MatrixXd>& pts) {
    const auto p = to_points(pts);
    return min_area_rotated_rect(std::span<const Point2>(p));
  }, py::arg("points"), "Minimum-area enclosing rectangle of an (n, 2) point array.");

  // network and relaxation
  py::class_<FeedforwardNetwork>(m, "FeedforwardNetwork")
      .def_property_readonly("input_dim", &FeedforwardNetwork::input_dim)
      .def_property_readonly("output_dim", &FeedforwardNetwork::output_dim)
      .def("hidden_widths", &FeedforwardNetwork::hidden_widths)
      .def("eval", &FeedforwardNetwork::eval, py::arg("x"))
      .def("__call__", &FeedforwardNetwork::eval);
  m.def("load_network", [](const std::filesystem::path& p) { return load_network(p); });
  m.def("save_network", [](const FeedforwardNetwork& n, const std::filesystem::path& p) { save_network(n, p); });
  m.def("zero_network", &zero_network, py::arg("input_dim"), py::arg("output_dim"),
        py::arg("hidden") = std::vector<Eigen::Index>{});
  m.def("affine_network", &affine_network, py::arg("gain"), py::arg("offset"));

  py::class_<AffineBounds>(m, "AffineBounds")
      .def_readonly("upper_weights", &AffineBounds::upper_weights)
      .def_readonly("upper_bias", &AffineBounds::upper_bias)
      .def_readonly("lower_weights", &AffineBounds::lower_weights)
      .def_readonly("lower_bias", &AffineBounds::lower_bias)
      .def_readonly("output_lower", &AffineBounds::output_lower)
      .def_readonly("output_upper", &AffineBounds::output_upper)
      .def("upper_at", &AffineBounds::upper_at)
      .def("lower_at", &AffineBounds::lower_at);
  m.def("crown_bounds", py::overload_cast<const FeedforwardNetwork&, const HyperRect&>(&crown_bounds));
  m.def("relu_relaxation", [](double l, double u) {
    const auto r = relu_relaxation(l, u);
    return py::make_tuple(r.upper_slope, r.upper_intercept, r.lower_slope, r.lower_intercept);
  });

  // dynamics
  py::class_<LtiSystem>(m, "LtiSystem")
      .def(py::init<Matrix, Matrix, Vector, HyperRect, HyperRect, double>(), py::arg("A"), py::arg("B"), py::arg("c"),
           py::arg("state_region"), py::arg("control_region"), py::arg("dt") = 1.0)
      .def_readonly("A", &LtiSystem::A)
      .def_readonly("B", &LtiSystem::B)
      .def_readonly("c", &LtiSystem::c)
      .def_readonly("state_region", &LtiSystem::state_region)
      .def_readonly("control_region", &LtiSystem::control_region);
  m.def("double_integrator", &double_integrator, py::arg("state_region"), py::arg("control_region"));
  m.def("step", &step);
  m.def("closed_loop_step", &closed_loop_step);
  m.def("rollout", &rollout, py::arg("system"), py::arg("net"), py::arg("x0"), py::arg("steps"));

  // LP
  py::enum_<Sense>(m, "Sense").value("Minimize", Sense::Minimize).value("Maximize", Sense::Maximize);
  py::enum_<Relation>(m, "Relation")
      .value("LessEqual", Relation::LessEqual)
      .value("Equal", Relation::Equal)
      .value("GreaterEqual", Relation::GreaterEqual);
  py::enum_<LpStatus>(m, "LpStatus")
      .value("Optimal", LpStatus::Optimal)
      .value("Infeasible", LpStatus::Infeasible)
      .value("Unbounded", LpStatus::Unbounded)
      .value("NumericalFailure", LpStatus::NumericalFailure);
  py::class_<LpProblem>(m, "LpProblem")
      .def(py::init<Eigen::Index>())
      .def("set_objective", &LpProblem::set_objective)
      .def("add_constraint", &LpProblem::add_constraint)
      .def("set_bounds", &LpProblem::set_bounds);
  py::class_<LpSolution>(m, "LpSolution")
      .def_readonly("status", &LpSolution::status)
      .def_readonly("value", &LpSolution::value)
      .def_readonly("point", &LpSolution::point);
  m.def("solve", &solve);

  // reach
  py::enum_<BrspStrategy>(m, "BrspStrategy").value("Uniform", BrspStrategy::Uniform).value("Guided", BrspStrategy::Guided);
  py::enum_<SetMode>(m, "SetMode").value("Axis", SetMode::Axis).value("Rotated2d", SetMode::Rotated2d);
  py::class_<PartitionParams>(m, "PartitionParams")
      .def(py::init([](std::vector<int> tsp, int brsp, BrspStrategy strategy, double min_volume, SetMode mode,
                       int threads) {
             return PartitionParams{std::move(tsp), brsp, min_volume, strategy, mode, threads};
           }),
           py::arg("tsp") = std::vector<int>{1, 1}, py::arg("brsp") = 1, py::arg("strategy") = BrspStrategy::Guided,
           py::arg("min_volume") = 0.0, py::arg("mode") = SetMode::Axis, py::arg("threads") = 1)
      .def_readwrite("tsp", &PartitionParams::target_counts)
      .def_readwrite("brsp", &PartitionParams::br_budget)
      .def_readwrite("strategy", &PartitionParams::strategy)
      .def_readwrite("min_volume", &PartitionParams::min_volume)
      .def_readwrite("mode", &PartitionParams::mode)
      .def_readwrite("threads", &PartitionParams::threads);
  py::class_<BpoaRun>(m, "BpoaRun")
      .def_readonly("horizon", &BpoaRun::horizon)
      .def_readonly("wall_time_s", &BpoaRun::wall_time_s)
      .def_property_readonly("lp_count", &BpoaRun::lp_count)
      .def_property_readonly("num_elements", [](const BpoaRun& r) { return r.elements.size(); })
      .def("aggregate", &BpoaRun::aggregate, py::arg("t"), "Per-element BPOA boxes at step t (t < 0).")
      .def("aggregate_bounds", &BpoaRun::aggregate_bounds, py::arg("t"))
      .def("aggregate_rotated", &BpoaRun::aggregate_rotated, py::arg("t"))
      .def("aggregate_area", &BpoaRun::aggregate_area, py::arg("t"));
  m.def("backreach", [](const LtiSystem& s, const HyperRect& next) { return backreach(s, next); });
  m.def("backreach_chain", &backreach_chain);
  m.def("hybreach_lp_plus", &hybreach_lp_plus, py::arg("system"), py::arg("net"), py::arg("target"), py::arg("horizon"),
        py::arg("params") = PartitionParams{}, py::call_guard<py::gil_scoped_release>());
  m.def("lp_count", &lp_count);

  // oracle
  py::class_<BpEstimate>(m, "BpEstimate")
      .def_property_readonly("members", [](const BpEstimate& e) {
        Matrix out(static_cast<Eigen::Index>(e.members.size()), e.members.empty() ? 0 : e.members[0].size());
        for (std::size_t i = 0; i < e.members.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = e.members[i].transpose();
        return out;
      })
      .def_readonly("tight_box", &BpEstimate::tight_box)
      .def_readonly("tight_rotated", &BpEstimate::tight_rotated)
      .def_readonly("area_axis", &BpEstimate::area_axis)
      .def_readonly("area_rotated", &BpEstimate::area_rotated)
      .def_readonly("samples_used", &BpEstimate::samples_used)
      .def_readonly("seed", &BpEstimate::seed);
  m.def("mc_true_bp", &mc_true_bp, py::arg("system"), py::arg("net"), py::arg("target"), py::arg("t"),
        py::arg("sample_region"), py::arg("n_samples"), py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("reaches_target", &reaches_target);
  m.def("error_metric", &error_metric);
  m.def("grid_soundness_count",
        [](const LtiSystem& s, const FeedforwardNetwork& n, const HyperRect& target, int t, const HyperRect& region,
           double pitch, const std::vector<HyperRect>& bpoa, double tol) {
          std::size_t members = 0;
          const auto v = grid_soundness_check(s, n, target, t, region, pitch, std::span<const HyperRect>(bpoa), tol, &members);
          return py::make_tuple(v.size(), members);
        },
        py::arg("system"), py::arg("net"), py::arg("target"), py::arg("t"), py::arg("region"), py::arg("pitch"),
        py::arg("bpoa"), py::arg("tol") = 1e-6, "Returns (violations, members) of a grid soundness check.");
}
