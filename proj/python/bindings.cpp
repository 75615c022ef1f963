#include "bregpr/divergence.hpp"
#include "bregpr/error.hpp"
#include "bregpr/experiment.hpp"
#include "bregpr/metrics.hpp"
#include "bregpr/solvers.hpp"
#include "bregpr/stft.hpp"
#include "bregpr/wav.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace bregpr;

namespace {

Signal as_signal(const Eigen::VectorXd& samples, int sample_rate = 16000)
{
  Signal s{samples, sample_rate};
  s.validate();
  return s;
}

std::vector<Signal> as_signals(const std::vector<Eigen::VectorXd>& arrays)
{
  std::vector<Signal> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(as_signal(a));
  return out;
}

std::vector<Eigen::VectorXd> as_arrays(const std::vector<Signal>& signals)
{
  std::vector<Eigen::VectorXd> out;
  out.reserve(signals.size());
  for (const auto& s : signals) out.push_back(s.samples);
  return out;
}

std::vector<Measurements> as_measurements(const std::vector<Eigen::MatrixXd>& rs,
                                          int d)
{
  std::vector<Measurements> out;
  out.reserve(rs.size());
  for (const auto& r : rs) {
    Measurements m{r, d};
    m.validate();
    out.push_back(std::move(m));
  }
  return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Phase recovery with beta-divergences for audio source separation";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  static py::exception<DivergedError> diverged(m, "DivergedError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    }
    catch (const DivergedError& e) {
      py::set_error(diverged, e.what());
    }
    catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<StftConfig>(m, "StftConfig")
      .def(py::init([](int win_length, int hop) {
             auto c = StftConfig::hann(win_length, hop);
             c.validate();
             return c;
           }),
           py::arg("win_length") = 1024, py::arg("hop") = 256)
      .def_readonly("win_length", &StftConfig::win_length)
      .def_readonly("hop", &StftConfig::hop)
      .def_readonly("fft_size", &StftConfig::fft_size)
      .def("num_frames", &StftConfig::num_frames)
      .def("__repr__", [](const StftConfig& c) {
        return "StftConfig(win_length=" + std::to_string(c.win_length) +
               ", hop=" + std::to_string(c.hop) + ")";
      });

  py::enum_<Direction>(m, "Direction")
      .value("right", Direction::right)
      .value("left", Direction::left);

  py::class_<DivergenceSpec>(m, "DivergenceSpec")
      .def(py::init([](double beta, Direction direction, int d) {
             DivergenceSpec s{beta, direction, d};
             s.validate();
             return s;
           }),
           py::arg("beta") = 2.0, py::arg("direction") = Direction::right,
           py::arg("d") = 1)
      .def_readonly("beta", &DivergenceSpec::beta)
      .def_readonly("direction", &DivergenceSpec::direction)
      .def_readonly("d", &DivergenceSpec::d);

  // Transform -------------------------------------------------------------
  m.def("make_window",
        [](int length) { return make_window(WindowKind::hann_periodic, length); },
        py::arg("length"), "Periodic Hann window");
  m.def("stft",
        [](const Eigen::VectorXd& x, const StftConfig& config) {
          return stft(as_signal(x), config).data;
        },
        py::arg("x"), py::arg("config") = StftConfig::hann(1024, 256));
  m.def("istft",
        [](const Eigen::MatrixXcd& spec, Eigen::Index length,
           const StftConfig& config) {
          return istft({spec, config}, length).samples;
        },
        py::arg("spec"), py::arg("length"),
        py::arg("config") = StftConfig::hann(1024, 256));
  m.def("normalization_constant", &normalization_constant, py::arg("config"));
  m.def("magnitude_power",
        [](const Eigen::MatrixXcd& spec, int d) {
          return magnitude_power({spec, StftConfig{}}, d).data;
        },
        py::arg("spec"), py::arg("d"));

  // Divergence ------------------------------------------------------------
  m.def("psi", py::overload_cast<double, double>(&psi), py::arg("beta"), py::arg("x"));
  m.def("psi_prime", py::overload_cast<double, double>(&psi_prime), py::arg("beta"),
        py::arg("x"));
  m.def("psi_second", py::overload_cast<double, double>(&psi_second),
        py::arg("beta"), py::arg("x"));
  m.def("bregman",
        py::overload_cast<double, const Eigen::MatrixXd&, const Eigen::MatrixXd&>(
            &bregman),
        py::arg("beta"), py::arg("r"), py::arg("z"));
  m.def("objective",
        [](const DivergenceSpec& spec, const Eigen::MatrixXd& r,
           const Eigen::VectorXd& s, const StftConfig& config, double eps) {
          return objective(spec, {r, spec.d}, as_signal(s), config, eps);
        },
        py::arg("spec"), py::arg("r"), py::arg("s"),
        py::arg("config") = StftConfig::hann(1024, 256),
        py::arg("eps") = default_eps_floor);
  m.def("z_term", &z_term, py::arg("spec"), py::arg("r"), py::arg("mag_d"));

  // Solvers ---------------------------------------------------------------
  m.def("grad_j",
        [](const Eigen::VectorXd& s, const Eigen::MatrixXd& r,
           const DivergenceSpec& spec, const StftConfig& config, double eps) {
          return grad_J(as_signal(s), {r, spec.d}, spec, config, eps).samples;
        },
        py::arg("s"), py::arg("r"), py::arg("spec"),
        py::arg("config") = StftConfig::hann(1024, 256),
        py::arg("eps") = default_eps_floor);
  m.def("amplitude_mask_init",
        [](const std::vector<Eigen::MatrixXd>& rs, int d, const Eigen::VectorXd& x,
           const StftConfig& config) {
          return as_arrays(
              amplitude_mask_init(as_measurements(rs, d), as_signal(x), config));
        },
        py::arg("measurements"), py::arg("d"), py::arg("mixture"),
        py::arg("config") = StftConfig::hann(1024, 256));
  m.def("griffin_lim",
        [](const Eigen::MatrixXd& r, const Eigen::VectorXd& init, int iterations,
           const StftConfig& config) {
          return griffin_lim({r, 1}, as_signal(init), iterations, config).samples;
        },
        py::arg("r"), py::arg("init"), py::arg("iterations"),
        py::arg("config") = StftConfig::hann(1024, 256));
  m.def("project_to_mixture",
        [](const std::vector<Eigen::VectorXd>& ys, const Eigen::VectorXd& x) {
          return as_arrays(project_to_mixture(as_signals(ys), as_signal(x)));
        },
        py::arg("estimates"), py::arg("mixture"));
  m.def("misi",
        [](const std::vector<Eigen::MatrixXd>& rs, const Eigen::VectorXd& x,
           int iterations, const StftConfig& config) {
          return as_arrays(
              misi(as_measurements(rs, 1), as_signal(x), iterations, config).sources);
        },
        py::arg("measurements"), py::arg("mixture"), py::arg("iterations") = 5,
        py::arg("config") = StftConfig::hann(1024, 256));
  m.def("projected_gradient",
        [](const std::vector<Eigen::MatrixXd>& rs, const Eigen::VectorXd& x,
           const DivergenceSpec& spec, double step_size, int iterations,
           const StftConfig& config, bool record_trace) {
          SolverConfig cfg;
          cfg.iterations = iterations;
          cfg.step_size = step_size;
          cfg.spec = spec;
          cfg.record_trace = record_trace;
          auto result = projected_gradient(as_measurements(rs, spec.d),
                                           as_signal(x), cfg, config);
          return py::make_tuple(as_arrays(result.sources), result.objective_trace);
        },
        py::arg("measurements"), py::arg("mixture"), py::arg("spec"),
        py::arg("step_size") = 1.0, py::arg("iterations") = 5,
        py::arg("config") = StftConfig::hann(1024, 256),
        py::arg("record_trace") = false,
        "Returns (sources, objective_trace)");

  // Metrics and I/O -------------------------------------------------------
  m.def("sdr",
        [](const Eigen::VectorXd& ref, const Eigen::VectorXd& est) {
          return sdr(as_signal(ref), as_signal(est));
        },
        py::arg("reference"), py::arg("estimate"));
  m.def("sdri",
        [](const Eigen::VectorXd& ref, const Eigen::VectorXd& est,
           const Eigen::VectorXd& base) {
          return sdri(as_signal(ref), as_signal(est), as_signal(base));
        },
        py::arg("reference"), py::arg("estimate"), py::arg("baseline"));
  m.def("mix_at_snr",
        [](const Eigen::VectorXd& speech, const Eigen::VectorXd& noise,
           double snr_db) {
          auto [mix, scaled] = mix_at_snr(as_signal(speech), as_signal(noise), snr_db);
          return py::make_tuple(mix.samples, scaled.samples);
        },
        py::arg("speech"), py::arg("noise"), py::arg("snr_db"),
        "Returns (mixture, scaled_noise)");
  m.def("load_wav",
        [](const std::filesystem::path& path) {
          auto s = load_wav(path);
          return py::make_tuple(s.samples, s.sample_rate);
        },
        py::arg("path"), "Returns (samples, sample_rate)");
  m.def("write_wav",
        [](const std::filesystem::path& path, const Eigen::VectorXd& samples,
           int sample_rate) {
          return write_wav(path, as_signal(samples, sample_rate));
        },
        py::arg("path"), py::arg("samples"), py::arg("sample_rate") = 16000,
        "Writes 16-bit PCM; returns the number of clipped samples");
}
