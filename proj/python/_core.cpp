#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracvort/errors.hpp"
#include "fracvort/experiment.hpp"
#include "fracvort/fbm.hpp"
#include "fracvort/hurst.hpp"
#include "fracvort/solver.hpp"
#include "fracvort/spectral.hpp"

namespace py = pybind11;
using namespace fracvort;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict report_dict(const EstimatorReport& r) {
  py::dict d;
  d["levels"] = r.levels;
  d["qv"] = r.qv;
  d["ratio"] = r.ratio_sequence;
  d["h"] = r.h_sequence;
  d["out_of_range"] = r.out_of_range;
  d["undefined"] = r.undefined;
  d["final_h"] = r.final_h;
  d["slope_h"] = r.slope_h;
  d["channel"] = r.channel;
  d["inconclusive"] = r.inconclusive;
  return d;
}

py::dict state_dict(const SolverState& s, const ModelConfig& cfg) {
  py::dict d;
  d["completed"] = s.completed;
  d["failure"] = s.failure;
  d["steps_completed"] = s.steps_completed;
  d["max_mean_mode"] = s.max_mean_mode;
  d["norm_history"] = to_array(s.norm_history);
  std::vector<double> t;
  for (std::size_t j = 0; j < s.omegas.size(); ++j) t.push_back(s.stored_grid().time(j));
  d["stored_times"] = to_array(t);
  py::list obs;
  for (const auto& ch : s.channels) {
    const auto series = extract_observable(s, cfg, ch.mode);
    py::dict o;
    o["mode"] = py::make_tuple(ch.mode.k1, ch.mode.k2);
    o["values"] = py::array(py::cast(series.values));
    o["drift"] = py::array(py::cast(series.drift_channel));
    o["noise"] = py::array(py::cast(series.noise_channel));
    obs.append(o);
  }
  d["observables"] = obs;
  if (!s.omegas.empty()) {
    const auto phys = s.omegas.back().to_physical();
    Array a({cfg.grid_n, cfg.grid_n});
    std::copy(phys.begin(), phys.end(), a.mutable_data());
    d["final_field"] = a;
  }
  return d;
}

Manifest manifest_from(const std::string& kind, const py::dict& overrides) {
  auto m = Manifest::defaults(kind);
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : overrides) kv[py::str(k)] = py::str(v);
  m.merge(kv);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of fracvort";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

  m.def(
      "generate_path",
      [](double hurst, int level, double horizon, std::uint64_t seed) {
        return to_array(generate_path(HurstParam(hurst), DyadicGrid(level, horizon), seed).values);
      },
      py::arg("hurst"), py::arg("level"), py::arg("horizon") = 1.0, py::arg("seed") = 0);
  m.def(
      "fbm_covariance", [](double s, double t, double h) { return fbm_covariance(s, t, HurstParam(h)); }, py::arg("s"),
      py::arg("t"), py::arg("hurst"));
  m.def(
      "quadratic_variation",
      [](const Array& x, double horizon, int k, std::optional<double> t) {
        const auto v = to_vector(x);
        const int level = static_cast<int>(std::lround(std::log2(static_cast<double>(v.size() - 1))));
        const DyadicGrid g(level, horizon);
        return quadratic_variation(v, g, k, t.value_or(horizon));
      },
      py::arg("x"), py::arg("horizon"), py::arg("k"), py::arg("t") = py::none());
  m.def(
      "hurst_estimate",
      [](const Array& x, double horizon, int k_min, int k_max) {
        const auto v = to_vector(x);
        const int level = static_cast<int>(std::lround(std::log2(static_cast<double>(v.size() - 1))));
        return report_dict(hurst_estimate(v, DyadicGrid(level, horizon), k_min, k_max));
      },
      py::arg("x"), py::arg("horizon"), py::arg("k_min"), py::arg("k_max"));
  m.def(
      "prop15_monte_carlo",
      [](double hurst, std::vector<long> ns, double t, std::size_t ensemble, std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto table = prop15_monte_carlo(hurst, ns, t, ensemble, seed);
        py::gil_scoped_acquire acquire;
        py::dict d;
        std::vector<double> mse;
        for (const auto& r : table.rows) mse.push_back(r.mse);
        d["n"] = ns;
        d["mse"] = mse;
        d["slope"] = table.slope;
        d["threshold"] = table.threshold;
        d["pass"] = table.pass;
        return d;
      },
      py::arg("hurst"), py::arg("n_list"), py::arg("t") = 1.0, py::arg("ensemble") = 2000, py::arg("seed") = 1);

  m.def(
      "sobolev_norm",
      [](const Array& field, double alpha) {
        const auto n = static_cast<int>(field.shape(0));
        return sobolev_norm(FourierField::from_physical(to_vector(field), n), SobolevIndex(alpha));
      },
      py::arg("field"), py::arg("alpha"));
  m.def(
      "heat_semigroup",
      [](const Array& field, double t) {
        const auto n = static_cast<int>(field.shape(0));
        const auto out = heat_semigroup(FourierField::from_physical(to_vector(field), n), t).to_physical();
        Array a({n, n});
        std::copy(out.begin(), out.end(), a.mutable_data());
        return a;
      },
      py::arg("field"), py::arg("t"));

  m.def(
      "simulate",
      [](const py::dict& overrides) {
        const auto manifest = manifest_from("simulate", overrides);
        const auto cfg = manifest.model_config();
        SolverState state;
        {
          py::gil_scoped_release release;
          const auto w = generate_path(cfg.hurst, DyadicGrid(cfg.level, cfg.horizon), manifest.get_u64("seed"));
          state = solve(cfg, w);
        }
        auto d = state_dict(state, cfg);
        d["manifest_hash"] = manifest.hash_hex();
        return d;
      },
      py::arg("overrides") = py::dict(),
      "Runs the solver with manifest-style overrides (e.g. {'grid_n': 32, 'level': 8}).");

  m.def(
      "manifest",
      [](const std::string& kind, const py::dict& overrides) {
        const auto man = manifest_from(kind, overrides);
        return py::make_tuple(man.serialize(), man.hash_hex());
      },
      py::arg("kind"), py::arg("overrides") = py::dict(), "Canonical manifest text and its hash.");
  m.def(
      "run_experiment",
      [](const std::string& text) {
        const auto man = Manifest::parse(text);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(man);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["pass"] = r.pass;
        d["summary"] = r.summary_file.string();
        std::vector<std::string> files;
        for (const auto& p : r.artifacts) files.push_back(p.string());
        d["artifacts"] = files;
        return d;
      },
      py::arg("manifest_text"));
}
