// Copyright 2026 The PatchDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cli/commands.h"
#include "patchdp/divergence.h"
#include "patchdp/geometry.h"
#include "patchdp/mechanisms.h"
#include "patchdp/oracle.h"
#include "patchdp/pld.h"

namespace py = pybind11;

namespace patchdp {
namespace {

using Size = std::pair<int64_t, int64_t>;

// Flat description of one mechanism, mirroring the CLI flags.
struct PyMechanism {
  std::string kind = "patch";
  Size image{1000, 1000};
  Size pad{0, 0};
  Size crop{100, 100};
  Size patch{10, 10};
  std::optional<Size> at;
  double sigma = 1.0;
  double sensitivity = 1.0;
  double sigma_data = 1000.0;
  bool data_noise_composed = false;
  int64_t batch_size = 100;
  int64_t epoch_size = 3000;
  int64_t epochs = 100;
};

void Throw(const absl::Status& status) {
  if (status.code() == absl::StatusCode::kOutOfRange) {
    throw py::index_error(std::string(status.message()));
  }
  throw py::value_error(std::string(status.message()));
}

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  if (!value.ok()) Throw(value.status());
  return *std::move(value);
}

CropConfig ToCrop(const PyMechanism& m) {
  CropConfig c;
  c.image_width = m.image.first;
  c.image_height = m.image.second;
  c.pad_x = m.pad.first;
  c.pad_y = m.pad.second;
  c.crop_width = m.crop.first;
  c.crop_height = m.crop.second;
  return c;
}

PatchSpec ToPatch(const PyMechanism& m) {
  PatchSpec p{RectShape{m.patch.first, m.patch.second}, std::nullopt};
  if (m.at) p.placement = Placement{m.at->first, m.at->second};
  return p;
}

MechanismSpec ToSpec(const PyMechanism& m) {
  MechanismSpec spec;
  if (m.kind == "patch") {
    spec.variant = PatchLevel{ToCrop(m), ToPatch(m)};
  } else if (m.kind == "minibatch") {
    spec.variant = MinibatchOnly{};
  } else if (m.kind == "datanoise") {
    spec.variant =
        DataNoise{m.patch.first * m.patch.second, m.sigma_data,
                  m.data_noise_composed};
  } else {
    throw py::value_error("kind must be 'patch', 'minibatch' or 'datanoise'");
  }
  spec.sigma = m.sigma;
  spec.sensitivity = m.sensitivity;
  spec.sampling.batch_size = m.batch_size;
  spec.sampling.epoch_size = m.epoch_size;
  spec.sampling.epochs = m.epochs;
  return spec;
}

AccountingConfig ToAccounting(double grid_spacing, std::optional<int64_t> steps,
                              bool adaptive_grid) {
  AccountingConfig acct;
  acct.grid_spacing = grid_spacing;
  acct.steps = steps;
  acct.adaptive_grid = adaptive_grid;
  return acct;
}

double DeltaOrDefault(const PyMechanism& m, std::optional<double> delta) {
  return delta ? *delta : 1.0 / static_cast<double>(m.epoch_size);
}

}  // namespace
}  // namespace patchdp

PYBIND11_MODULE(_core, m) {
  using namespace patchdp;
  m.doc() = "Patch-level privacy accounting core";

  py::class_<PyMechanism>(m, "Mechanism")
      .def(py::init([](std::string kind, Size image, Size pad, Size crop,
                       Size patch, std::optional<Size> at, double sigma,
                       double sensitivity, double sigma_data,
                       bool data_noise_composed, int64_t batch_size,
                       int64_t epoch_size, int64_t epochs) {
             return PyMechanism{std::move(kind), image, pad, crop, patch, at,
                                sigma, sensitivity, sigma_data,
                                data_noise_composed, batch_size, epoch_size,
                                epochs};
           }),
           py::arg("kind") = "patch", py::kw_only(),
           py::arg("image") = Size{1000, 1000}, py::arg("pad") = Size{0, 0},
           py::arg("crop") = Size{100, 100}, py::arg("patch") = Size{10, 10},
           py::arg("at") = py::none(), py::arg("sigma") = 1.0,
           py::arg("sensitivity") = 1.0, py::arg("sigma_data") = 1000.0,
           py::arg("data_noise_composed") = false,
           py::arg("batch_size") = 100, py::arg("epoch_size") = 3000,
           py::arg("epochs") = 100)
      .def_readwrite("kind", &PyMechanism::kind)
      .def_readwrite("image", &PyMechanism::image)
      .def_readwrite("pad", &PyMechanism::pad)
      .def_readwrite("crop", &PyMechanism::crop)
      .def_readwrite("patch", &PyMechanism::patch)
      .def_readwrite("at", &PyMechanism::at)
      .def_readwrite("sigma", &PyMechanism::sigma)
      .def_readwrite("sensitivity", &PyMechanism::sensitivity)
      .def_readwrite("sigma_data", &PyMechanism::sigma_data)
      .def_readwrite("data_noise_composed", &PyMechanism::data_noise_composed)
      .def_readwrite("batch_size", &PyMechanism::batch_size)
      .def_readwrite("epoch_size", &PyMechanism::epoch_size)
      .def_readwrite("epochs", &PyMechanism::epochs);

  m.def(
      "inclusion",
      [](Size image, Size crop, Size patch, Size pad, std::optional<Size> at) {
        PyMechanism spec;
        spec.image = image;
        spec.crop = crop;
        spec.patch = patch;
        spec.pad = pad;
        spec.at = at;
        const WorstCaseInclusion w =
            Unwrap(ResolveInclusion(ToCrop(spec), ToPatch(spec)));
        return std::make_tuple(w.probability.favorable, w.probability.total,
                               Size{w.placement.x, w.placement.y});
      },
      py::arg("image"), py::arg("crop"), py::arg("patch"),
      py::arg("pad") = Size{0, 0}, py::arg("at") = py::none(),
      "(favorable, total, placement) of a rectangular patch; worst case "
      "placement unless `at` is given.");

  m.def(
      "enumerate_inclusion",
      [](Size image, Size crop, Size patch, Size pad, std::optional<Size> at) {
        PyMechanism spec;
        spec.image = image;
        spec.crop = crop;
        spec.patch = patch;
        spec.pad = pad;
        spec.at = at;
        const InclusionProbability p =
            Unwrap(EnumerateInclusion(ToCrop(spec), ToPatch(spec)));
        return std::make_pair(p.favorable, p.total);
      },
      py::arg("image"), py::arg("crop"), py::arg("patch"),
      py::arg("pad") = Size{0, 0}, py::arg("at") = py::none());

  m.def(
      "hockey_stick_subsampled",
      [](double epsilon, double gamma_eff, double sensitivity, double sigma) {
        const SubsampledPair pair{GaussianPair{sensitivity, sigma}, gamma_eff};
        if (absl::Status s = pair.Validate(); !s.ok()) Throw(s);
        return HockeyStickSubsampled(pair, Alpha::FromEpsilon(epsilon));
      },
      py::arg("epsilon"), py::arg("gamma_eff"), py::arg("sensitivity") = 1.0,
      py::arg("sigma") = 1.0);
  m.def(
      "hockey_stick_gaussian",
      [](double epsilon, double sensitivity, double sigma) {
        return HockeyStickGaussian(GaussianPair{sensitivity, sigma},
                                   Alpha::FromEpsilon(epsilon));
      },
      py::arg("epsilon"), py::arg("sensitivity") = 1.0, py::arg("sigma") = 1.0);
  m.def("naive_amplified_epsilon", &NaiveAmplifiedEpsilon, py::arg("gamma"),
        py::arg("eps_base"));

  m.def(
      "account",
      [](const PyMechanism& mech, std::optional<double> delta,
         double grid_spacing, std::optional<int64_t> steps, bool adaptive_grid) {
        py::gil_scoped_release release;
        return Unwrap(Account(ToSpec(mech),
                              ToAccounting(grid_spacing, steps, adaptive_grid),
                              DeltaOrDefault(mech, delta)));
      },
      py::arg("mechanism"), py::arg("delta") = py::none(),
      py::arg("grid_spacing") = 1e-3, py::arg("steps") = py::none(),
      py::arg("adaptive_grid") = true,
      "Composed epsilon at delta (default 1 / epoch_size).");

  m.def(
      "delta_profile",
      [](const PyMechanism& mech, const std::vector<double>& epsilons,
         double grid_spacing, std::optional<int64_t> steps) {
        py::gil_scoped_release release;
        const ComposedProfile profile = Unwrap(ComposedProfileFor(
            ToSpec(mech), ToAccounting(grid_spacing, steps, true)));
        std::vector<double> deltas;
        deltas.reserve(epsilons.size());
        for (double e : epsilons) deltas.push_back(profile.DeltaAt(e));
        return deltas;
      },
      py::arg("mechanism"), py::arg("epsilons"), py::arg("grid_spacing") = 1e-3,
      py::arg("steps") = py::none());

  m.def(
      "calibrate_sigma",
      [](const PyMechanism& mech, double target_epsilon,
         std::optional<double> delta, double grid_spacing, double tolerance,
         double sigma_max) {
        py::gil_scoped_release release;
        CalibrationOptions options;
        options.tolerance = tolerance;
        options.sigma_max = sigma_max;
        const CalibrationResult r = Unwrap(CalibrateSigma(
            ToSpec(mech), ToAccounting(grid_spacing, std::nullopt, true),
            target_epsilon, DeltaOrDefault(mech, delta), options));
        return std::make_pair(r.sigma, r.epsilon);
      },
      py::arg("mechanism"), py::arg("target_epsilon"),
      py::arg("delta") = py::none(), py::arg("grid_spacing") = 1e-3,
      py::arg("tolerance") = 1e-3, py::arg("sigma_max") = 1e3,
      "(sigma, epsilon) of the smallest sigma meeting the target.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::RunCli(args, out, err);
        }
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool; returns (code, out, err).");

  m.attr("__version__") = PATCHDP_VERSION_STRING;
}
