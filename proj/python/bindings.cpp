#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pmfspoof/classifier.hpp"
#include "pmfspoof/diffusion.hpp"
#include "pmfspoof/distances.hpp"
#include "pmfspoof/error.hpp"
#include "pmfspoof/filterbank.hpp"
#include "pmfspoof/metrics.hpp"
#include "pmfspoof/pipeline.hpp"
#include "pmfspoof/pmf.hpp"
#include "pmfspoof/synth.hpp"

namespace py = pybind11;
using namespace pmfspoof;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw ConfigError("expected a one-dimensional array");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(py::ssize_t(v.size()), v.data()); }

std::vector<Label> to_labels(const py::array_t<int, py::array::c_style | py::array::forcecast>& spoofed) {
  std::vector<Label> out;
  out.reserve(static_cast<std::size_t>(spoofed.size()));
  for (py::ssize_t i = 0; i < spoofed.size(); ++i) out.push_back(spoofed.data()[i] ? Label::spoofed : Label::genuine);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PMF-based spoofing countermeasure: core operations";

  auto base = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  (void)base;

  // audio
  m.def(
      "read_wav",
      [](const std::filesystem::path& path) {
        const auto w = read_wav(path);
        return py::make_tuple(to_array(w.samples), w.sample_rate_hz);
      },
      py::arg("path"), "PCM16 mono WAV -> (samples in [-1, 1], sample rate)");

  // filter-banks
  m.def(
      "filter",
      [](const Array& samples, const std::string& kind, int n_channels, double f_low_hz, std::optional<double> f_high_hz,
         int sample_rate_hz) {
        const auto bank =
            design({parse_bank_kind(kind), n_channels, f_low_hz, f_high_hz.value_or(sample_rate_hz / 2.0), sample_rate_hz});
        const auto x = view(samples);
        py::array_t<double> out({static_cast<py::ssize_t>(bank.size()), static_cast<py::ssize_t>(x.size())});
        std::vector<double> y;
        for (std::size_t c = 0; c < bank.size(); ++c) {
          apply_channel(bank, c, x, y);
          std::copy(y.begin(), y.end(), out.mutable_data(static_cast<py::ssize_t>(c), 0));
        }
        return out;
      },
      py::arg("samples"), py::arg("kind") = "gammatone", py::arg("n_channels") = 10, py::arg("f_low_hz") = 0.0,
      py::arg("f_high_hz") = py::none(), py::arg("sample_rate_hz") = 16000,
      "Channel outputs, shape (n_channels, n_samples).");
  m.def(
      "center_frequencies",
      [](const std::string& kind, int n_channels, double f_low_hz, std::optional<double> f_high_hz, int sample_rate_hz) {
        const auto bank =
            design({parse_bank_kind(kind), n_channels, f_low_hz, f_high_hz.value_or(sample_rate_hz / 2.0), sample_rate_hz});
        std::vector<double> out;
        for (const auto& c : bank.channels) out.push_back(c.center_freq_hz);
        return out;
      },
      py::arg("kind") = "gammatone", py::arg("n_channels") = 10, py::arg("f_low_hz") = 0.0,
      py::arg("f_high_hz") = py::none(), py::arg("sample_rate_hz") = 16000);

  // PMFs and measures
  m.def(
      "estimate_pmf", [](const Array& samples, std::size_t bins) { return to_array(estimate_pmf(view(samples), bins).probabilities); },
      py::arg("samples"), py::arg("bins") = kDistanceBins);
  m.def(
      "similarity",
      [](const std::string& measure, const Array& p, const Array& q, double smoothing) {
        return similarity(parse_measure(measure), view(p), view(q), {smoothing});
      },
      py::arg("measure"), py::arg("p"), py::arg("q"), py::arg("smoothing") = kDefaultSmoothing);
  m.def("measures", [] {
    std::vector<std::string> out;
    for (auto x : kAllMeasures) out.emplace_back(to_string(x));
    return out;
  });

  // diffusion maps
  py::class_<DiffusionModel>(m, "DiffusionModel")
      .def_readonly("epsilon", &DiffusionModel::epsilon)
      .def_readonly("eigenvalues", &DiffusionModel::eigenvalues)
      .def_readonly("eigenvectors", &DiffusionModel::eigenvectors)
      .def_readonly("t", &DiffusionModel::t)
      .def_readonly("k", &DiffusionModel::k)
      .def("embedding", [](const DiffusionModel& dm) { return embed(dm).coordinates; })
      .def("extend", [](const DiffusionModel& dm, const Eigen::MatrixXd& x) { return extend(dm, x); }, py::arg("x"));
  m.def("select_epsilon", &select_epsilon, py::arg("x"), py::arg("max_points") = 2000, py::arg("seed") = 0x5eed);
  m.def(
      "fit_diffusion",
      [](const Eigen::MatrixXd& x, int k, std::optional<double> epsilon, int t) {
        return fit(x, k, epsilon ? *epsilon : select_epsilon(x), t);
      },
      py::arg("x"), py::arg("k"), py::arg("epsilon") = py::none(), py::arg("t") = 1);

  // classifier
  py::class_<LogisticModel>(m, "LogisticModel")
      .def_readonly("weights", &LogisticModel::weights)
      .def_readonly("bias", &LogisticModel::bias)
      .def_property_readonly("iterations", [](const LogisticModel& lm) { return lm.meta.iterations; })
      .def_property_readonly("final_loss", [](const LogisticModel& lm) { return lm.meta.final_loss; })
      .def("score", [](const LogisticModel& lm, const Eigen::MatrixXd& x) { return Eigen::VectorXd(score(lm, x)); });
  m.def(
      "train_logistic",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2, int max_iterations, bool balance_classes) {
        TrainOptions opt;
        opt.l2 = l2;
        opt.max_iterations = max_iterations;
        opt.balance_classes = balance_classes;
        return train(x, y, opt);
      },
      py::arg("x"), py::arg("y"), py::arg("l2") = 1e-4, py::arg("max_iterations") = 5000,
      py::arg("balance_classes") = true, "Labels: 0 genuine, 1 spoofed.");

  // metrics
  m.def(
      "compute_eer",
      [](const Array& scores, const py::array_t<int, py::array::c_style | py::array::forcecast>& spoofed) {
        const auto r = compute_eer(view(scores), to_labels(spoofed));
        return py::make_tuple(r.eer, r.threshold);
      },
      py::arg("scores"), py::arg("spoofed"), "-> (EER as a fraction, threshold)");

  // synthetic corpora
  m.def(
      "synthesize",
      [](const std::string& law, double tilt_db_per_oct, double scale, std::size_t n_samples, std::uint64_t seed) {
        return to_array(synthesize({"c", parse_amplitude_law(law), tilt_db_per_oct, scale}, n_samples, seed));
      },
      py::arg("law"), py::arg("tilt_db_per_oct") = 0.0, py::arg("scale") = 0.1, py::arg("n_samples") = 16000,
      py::arg("seed") = 1);

  // pipeline
  m.def(
      "run_stage",
      [](const std::filesystem::path& config, const std::string& stage, std::optional<std::uint64_t> seed,
         bool no_gender_split, bool lenient) {
        auto cfg = load_config(config);
        apply_overrides(cfg, {seed, no_gender_split, lenient});
        py::gil_scoped_release release;
        run_stage(cfg, parse_stage(stage));
      },
      py::arg("config"), py::arg("stage") = "run-all", py::arg("seed") = py::none(), py::arg("no_gender_split") = false,
      py::arg("lenient") = false);
}
