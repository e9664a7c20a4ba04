#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "landsite/belief.hpp"
#include "landsite/distance_transform.hpp"
#include "landsite/selector.hpp"
#include "landsite/servo.hpp"
#include "landsite/simloop.hpp"

namespace py = pybind11;
using namespace landsite;

namespace {

using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

Mask to_mask(const BoolArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("mask must be 2-D");
  const auto rows = static_cast<int>(a.shape(0)), cols = static_cast<int>(a.shape(1));
  Mask m(rows, cols, 0);
  auto view = a.unchecked<2>();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = view(r, c) ? 1 : 0;
  }
  return m;
}

py::array_t<double> to_array(const Grid<double>& g) {
  py::array_t<double> out({g.rows(), g.cols()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

py::dict result_dict(const EpisodeResult& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["outcome"] = to_string(r.outcome);
  d["touchdown_error"] = r.touchdown_error;
  d["frames_to_commit"] = r.frames_to_commit;
  d["commit_belief"] = r.commit_belief;
  d["max_infeasible_belief"] = r.max_infeasible_belief;
  d["frames"] = r.frames;
  d["final_position"] = r.final_position;
  if (r.decision) {
    py::dict dec;
    dec["track_id"] = r.decision->track_id;
    dec["ground_center"] = r.decision->ground_center;
    dec["rho"] = r.decision->rho;
    dec["belief"] = r.decision->belief;
    dec["frame"] = r.decision->frame;
    d["decision"] = dec;
  } else {
    d["decision"] = py::none();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Landing-site selection and visual-servo descent simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Params>(m, "Params")
      .def(py::init<>())
      .def("set", &Params::set, py::arg("symbol"), py::arg("value"))
      .def("get", &Params::get, py::arg("symbol"))
      .def("validate", &Params::validate)
      .def_static("symbols", [] {
        std::vector<std::string> out;
        for (const auto& info : Params::describe()) out.push_back(info.symbol);
        return out;
      });

  m.def("predict", &predict, py::arg("b_prev"), py::arg("alpha"));
  m.def("update", &update, py::arg("b_bar"), py::arg("l1"), py::arg("l0"));
  m.def(
      "likelihoods",
      [](double f, double s, double o) {
        const LikelihoodModel model;
        const CueVector c{f, s, o};
        return std::make_pair(likelihood_safe(c, model), likelihood_unsafe(c, model));
      },
      py::arg("flatness"), py::arg("slope"), py::arg("obstacle"), "(L1, L0) at default model settings");

  m.def("squared_distance_to_background", [](const BoolArray& mask) { return to_array(squared_distance_to_background(to_mask(mask))); },
        py::arg("mask"));
  m.def(
      "inscribed_radius",
      [](const BoolArray& mask, double gsd, double rho_min) {
        const FeasibilityResult r = inscribed_radius(to_mask(mask), gsd, rho_min);
        py::dict d;
        d["rho"] = r.rho;
        d["feasible"] = r.feasible;
        d["max_squared_px"] = r.max_squared_px;
        d["center"] = std::make_pair(r.center.row, r.center.col);
        return d;
      },
      py::arg("mask"), py::arg("gsd"), py::arg("rho_min"));
  m.def(
      "select",
      [](const std::vector<std::tuple<int, double, double, bool>>& cands, double tau) -> std::optional<int> {
        std::vector<SelectionCandidate> c;
        for (const auto& [id, b, rho, ok] : cands) c.push_back({id, b, rho, ok});
        const auto pick = select(c, tau);
        if (!pick) return std::nullopt;
        return c[*pick].track_id;
      },
      py::arg("candidates"), py::arg("tau"), "Candidates are (track_id, belief, rho, feasible); returns the committed id.");

  m.def("interaction_matrix", &interaction_matrix, py::arg("s"), py::arg("depth"));
  m.def("pseudo_inverse", &pseudo_inverse, py::arg("L"));
  m.def(
      "control",
      [](const Vec2& feature, const Vec2& target, double depth, double lambda) {
        ServoGains g;
        g.lambda = lambda;
        const VelocityCommand cmd = control(ServoState{feature, target, depth}, g);
        return py::make_tuple(cmd.v, cmd.hover, cmd.descending);
      },
      py::arg("feature"), py::arg("target"), py::arg("depth"), py::arg("lam") = 0.8);

  m.def(
      "run_episode",
      [](const std::string& scenario_path, std::uint64_t seed, const std::map<std::string, double>& overrides) {
        const Scenario sc = load_scenario(scenario_path);
        Params p = scenario_params(sc);
        apply_overrides(p, overrides);
        p.validate();
        EpisodeOptions opts;
        opts.record_telemetry = false;
        EpisodeResult r;
        {
          py::gil_scoped_release release;
          r = run_episode(sc, p, seed, opts).result;
        }
        return result_dict(r);
      },
      py::arg("scenario"), py::arg("seed") = 1, py::arg("overrides") = std::map<std::string, double>{});
}
