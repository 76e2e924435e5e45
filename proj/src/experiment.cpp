#include "fracvort/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fracvort/errors.hpp"
#include "fracvort/fbm.hpp"
#include "fracvort/hurst.hpp"
#include "fracvort/parallel.hpp"
#include "fracvort/stats.hpp"
#include "fracvort/young.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace fracvort {

namespace {

enum class KeyType { real, integer, unsigned_int, text, list, range, boolean, choice };

struct KeySpec {
  KeyType type;
  std::string fallback;
  std::vector<std::string> choices = {};
};

using Schema = std::map<std::string, KeySpec>;

void add_model_keys(Schema& s) {
  s["grid_n"] = {KeyType::integer, "64"};
  s["alpha"] = {KeyType::real, "1.5"};
  s["hurst"] = {KeyType::real, "0.75"};
  s["gamma"] = {KeyType::text, "auto"};
  s["xi"] = {KeyType::choice, "shear", {"shear", "zero"}};
  s["xi_amplitude"] = {KeyType::real, "1"};
  s["omega0"] = {KeyType::choice, "default", {"default", "sin_x2", "sin_x1", "zero", "rough"}};
  s["horizon"] = {KeyType::real, "0.5"};
  s["level"] = {KeyType::integer, "10"};
  s["mode"] = {KeyType::choice, "stepper", {"stepper", "picard"}};
  s["store_level"] = {KeyType::integer, "-1"};
  s["norm_ceiling"] = {KeyType::real, "1e6"};
  s["window.initial"] = {KeyType::real, "0.125"};
  s["window.floor"] = {KeyType::real, "0.0009765625"};
  s["window.tol"] = {KeyType::real, "1e-10"};
  s["window.max_iter"] = {KeyType::integer, "60"};
  s["observe"] = {KeyType::text, "1:0"};
}

Schema schema_for(const std::string& kind) {
  Schema s;
  s["kind"] = {KeyType::text, kind};
  s["out"] = {KeyType::text, "out"};
  s["seed"] = {KeyType::unsigned_int, "1"};
  if (kind == "fbm-gen") {
    s["hurst"] = {KeyType::real, "0.75"};
    s["level"] = {KeyType::integer, "12"};
    s["horizon"] = {KeyType::real, "1"};
    s["format"] = {KeyType::choice, "both", {"csv", "binary", "both"}};
  } else if (kind == "prop15") {
    s["hurst"] = {KeyType::real, "0.6"};
    s["n_levels"] = {KeyType::range, "6:12"};
    s["t"] = {KeyType::real, "1"};
    s["ensemble"] = {KeyType::integer, "2000"};
  } else if (kind == "young-check") {
    s["hurst"] = {KeyType::real, "0.75"};
    s["gamma"] = {KeyType::real, "0.7"};
    s["alpha"] = {KeyType::real, "1.5"};
    s["grid_n"] = {KeyType::integer, "32"};
    s["levels"] = {KeyType::range, "6:12"};
    s["horizon"] = {KeyType::real, "1"};
    s["xi"] = {KeyType::choice, "shear", {"shear", "zero"}};
    s["omega0"] = {KeyType::choice, "default", {"default", "sin_x2", "sin_x1", "zero", "rough"}};
  } else if (kind == "simulate") {
    add_model_keys(s);
    s["snapshots"] = {KeyType::boolean, "true"};
  } else if (kind == "estimate") {
    add_model_keys(s);
    s["levels"] = {KeyType::range, "10:14"};
    s["source"] = {KeyType::choice, "spde", {"spde", "fbm"}};
    s["seeds"] = {KeyType::integer, "1"};
    s["channel"] = {KeyType::choice, "real", {"real", "imag"}};
    s["tolerance"] = {KeyType::real, "0.07"};
  } else if (kind == "sweep") {
    add_model_keys(s);
    s["hursts"] = {KeyType::list, "0.6,0.75,0.9"};
    s["seeds"] = {KeyType::integer, "10"};
    s["k"] = {KeyType::integer, "14"};
    s["source"] = {KeyType::choice, "spde", {"spde", "fbm"}};
    s["channel"] = {KeyType::choice, "real", {"real", "imag"}};
    s["tolerance"] = {KeyType::real, "0.07"};
    s["budget"] = {KeyType::integer, "100"};
  } else {
    throw ConfigError("unknown experiment kind '" + kind + "'");
  }
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is incomplete in some libstdc++ releases.
    char* end = nullptr;
    out = std::strtod(first, &end);
    return !text.empty() && end == last && std::isfinite(out);
  } else {
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc() && r.ptr == last;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

void check_value(const std::string& key, const KeySpec& rule, const std::string& value) {
  auto fail = [&](const std::string& what) { throw ConfigError("manifest key '" + key + "': " + what + ", got '" + value + "'"); };
  double d;
  long l;
  std::uint64_t u;
  switch (rule.type) {
    case KeyType::real:
      if (!parse_number(value, d)) fail("expected a real number");
      break;
    case KeyType::integer:
      if (!parse_number(value, l)) fail("expected an integer");
      break;
    case KeyType::unsigned_int:
      if (!parse_number(value, u)) fail("expected a non-negative integer");
      break;
    case KeyType::list:
      for (const auto& p : split(value, ','))
        if (!parse_number(p, d)) fail("expected a comma-separated list of numbers");
      break;
    case KeyType::range: {
      const auto p = split(value, ':');
      long a, b;
      if (p.size() != 2 || !parse_number(p[0], a) || !parse_number(p[1], b) || a > b) fail("expected a range a:b with a <= b");
      break;
    }
    case KeyType::boolean:
      if (value != "true" && value != "false") fail("expected true or false");
      break;
    case KeyType::choice:
      if (std::find(rule.choices.begin(), rule.choices.end(), value) == rule.choices.end()) {
        std::string all;
        for (const auto& c : rule.choices) all += (all.empty() ? "" : ", ") + c;
        fail("expected one of " + all);
      }
      break;
    case KeyType::text:
      if (value.find_first_of("\n=#") != std::string::npos) fail("value must not contain '=', '#' or newlines");
      break;
  }
}

std::vector<Wavevector> parse_modes(const std::string& text) {
  std::vector<Wavevector> modes;
  for (const auto& item : split(text, ';')) {
    const auto p = split(item, ':');
    long a, b;
    if (p.size() != 2 || !parse_number(p[0], a) || !parse_number(p[1], b))
      throw ConfigError("manifest key 'observe': expected modes like 1:0;2:-1, got '" + text + "'");
    modes.push_back({static_cast<int>(a), static_cast<int>(b)});
  }
  if (modes.empty()) throw ConfigError("manifest key 'observe': at least one mode is required");
  return modes;
}

// Artifact writers: every CSV leads with the manifest hash, binary dumps get a sidecar.
class Artifacts {
 public:
  Artifacts(const Manifest& m, RunResult& result) : m_(m), result_(result), dir_(m.get("out")) {
    fs::create_directories(dir_);
    std::ofstream(dir_ / "manifest.cfg") << m.serialize();
  }

  const fs::path& dir() const { return dir_; }

  void csv(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << "# manifest_hash=" << m_.hash_hex() << '\n' << body;
    if (!out) throw ConfigError("cannot write " + p.string());
    result_.artifacts.push_back(p);
  }

  void binary(const std::string& name, const std::string& bytes) {
    const auto p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << bytes;
    std::ofstream side(dir_ / (name + ".manifest"), std::ios::binary);
    side << "# manifest_hash=" << m_.hash_hex() << '\n' << m_.serialize();
    if (!out || !side) throw ConfigError("cannot write " + p.string());
    result_.artifacts.push_back(p);
  }

  void summary(json j, bool pass, int exit_code) {
    j["kind"] = m_.kind();
    j["manifest_hash"] = m_.hash_hex();
    j["manifest"] = m_.values();
    j["pass"] = pass;
    j["exit_code"] = exit_code;
    const auto p = dir_ / "summary.json";
    std::ofstream(p, std::ios::binary) << j.dump(2) << '\n';
    result_.summary_file = p;
    result_.pass = pass;
    result_.exit_code = exit_code;
  }

 private:
  const Manifest& m_;
  RunResult& result_;
  fs::path dir_;
};

// Shortest text that reads back to the same double.
std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

RunResult run_fbm_gen(const Manifest& m) {
  RunResult r;
  Artifacts a(m, r);
  const DyadicGrid grid(static_cast<int>(m.get_int("level")), m.get_double("horizon"));
  const auto path = generate_path(HurstParam(m.get_double("hurst")), grid, m.get_u64("seed"));
  const auto fmt = m.get("format");
  if (fmt != "binary") {
    std::ostringstream s;
    write_fbm_csv(s, path);
    a.csv("path.csv", s.str());
  }
  if (fmt != "csv") {
    std::ostringstream s;
    write_fbm_binary(s, path);
    a.binary("path.fbm1", s.str());
  }
  json j;
  j["points"] = grid.points();
  j["final_value"] = path.values.back();
  a.summary(j, true, 0);
  return r;
}

RunResult run_prop15(const Manifest& m) {
  RunResult r;
  Artifacts a(m, r);
  const auto [lo, hi] = m.get_range("n_levels");
  std::vector<long> ns;
  for (int k = lo; k <= hi; ++k) ns.push_back(1L << k);
  const auto table = prop15_monte_carlo(m.get_double("hurst"), ns, m.get_double("t"),
                                        static_cast<std::size_t>(m.get_int("ensemble")), m.get_u64("seed"));
  std::ostringstream s;
  s.precision(17);
  s << "n,mse,standard_error\n";
  for (const auto& row : table.rows) s << row.n << ',' << row.mse << ',' << row.standard_error << '\n';
  a.csv("prop15.csv", s.str());
  json j;
  j["slope"] = finite_or_null(table.slope);
  j["threshold"] = table.threshold;
  a.summary(j, table.pass, table.pass ? 0 : 1);
  return r;
}

RunResult run_young_check(const Manifest& m) {
  RunResult r;
  Artifacts a(m, r);
  const int n = static_cast<int>(m.get_int("grid_n"));
  const double gamma = m.get_double("gamma");
  const SobolevIndex alpha(m.get_double("alpha"));
  const auto [lo, hi] = m.get_range("levels");
  const DyadicGrid grid(hi + 1, m.get_double("horizon"));
  const auto w = generate_path(HurstParam(m.get_double("hurst")), grid, m.get_u64("seed"));
  // Frozen-trajectory transport integrand Y_r = xi . grad(S_r omega0).
  const TransportOperator xi(xi_preset(m.get("xi"), n));
  const auto omega0 = omega0_preset(m.get("omega0"), n, alpha.alpha());
  const auto y = IntegrandTrace::from_function(
      grid, [&](double t) { return xi.apply(heat_semigroup(omega0, t)); }, IntegrandRegularity{alpha, gamma});
  std::vector<CauchyGap> gaps;
  std::vector<FourierField> sums;
  for (int k = lo; k <= hi + 1; ++k) sums.push_back(dyadic_sum(y, w, grid.horizon(), k));
  std::vector<double> lk, lg;
  for (int k = lo; k <= hi; ++k) {
    const auto& s0 = sums[static_cast<std::size_t>(k - lo)];
    const auto& s1 = sums[static_cast<std::size_t>(k - lo + 1)];
    CauchyGap g{k, sobolev_norm(s1 - s0, alpha), sobolev_norm(s1 - s0, alpha.shifted(-gamma))};
    gaps.push_back(g);
    if (g.gap_alpha > 0.0) {
      lk.push_back(k);
      lg.push_back(std::log2(g.gap_alpha));
    }
  }
  std::ostringstream s;
  write_gap_csv(s, gaps);
  a.csv("gaps.csv", s.str());
  const double slope = lk.size() >= 2 ? -stats::linear_fit(lk, lg).slope : std::nan("");
  const double threshold = gamma - 0.5 - 0.1;
  const bool pass = std::isfinite(slope) && slope >= threshold;
  json j;
  j["slope"] = finite_or_null(slope);
  j["threshold"] = threshold;
  a.summary(j, pass, pass ? 0 : 1);
  return r;
}

json state_summary(const SolverState& s) {
  json j;
  j["completed"] = s.completed;
  j["partial"] = !s.completed;
  j["failure"] = s.failure;
  j["steps_completed"] = s.steps_completed;
  j["max_mean_mode"] = s.max_mean_mode;
  j["v_norm"] = finite_or_null(s.v_norm());
  double worst = 0.0;
  std::size_t rejected = 0;
  for (const auto& w : s.windows) {
    if (w.accepted) worst = std::max(worst, w.contraction);
    else ++rejected;
  }
  j["windows"] = s.windows.size();
  j["windows_rejected"] = rejected;
  j["max_accepted_contraction"] = worst;
  return j;
}

RunResult run_simulate(const Manifest& m) {
  RunResult r;
  Artifacts a(m, r);
  const auto cfg = m.model_config();
  const auto w = generate_path(cfg.hurst, DyadicGrid(cfg.level, cfg.horizon), m.get_u64("seed"));
  const auto state = solve(cfg, w);
  std::ostringstream traj;
  if (!state.omegas.empty()) write_trajectory_csv(traj, state, cfg, cfg.observe.front());
  a.csv(state.completed ? "trajectory.csv" : "trajectory.partial.csv", traj.str());
  if (m.get_bool("snapshots") && !state.omegas.empty()) {
    std::ostringstream s0, s1;
    write_field_binary(s0, state.omegas.front());
    write_field_binary(s1, state.omegas.back());
    a.binary("omega_initial.fld1", s0.str());
    a.binary(state.completed ? "omega_final.fld1" : "omega_last.partial.fld1", s1.str());
  }
  json j = state_summary(state);
  if (state.completed) {
    json res = json::object();
    for (const auto& k : cfg.observe)
      res[std::to_string(k.k1) + ":" + std::to_string(k.k2)] = weak_residual(state, cfg, k);
    j["weak_residual"] = res;
  }
  const bool pass = state.completed && state.max_mean_mode <= 1e-10;
  a.summary(j, pass, state.completed ? (pass ? 0 : 1) : 3);
  return r;
}

struct SeedEstimate {
  EstimatorReport report;
  EstimatorReport other;
  bool has_other = false;
  bool completed = true;
  std::string failure;
};

SeedEstimate estimate_one(const Manifest& m, std::uint64_t seed, int k_lo, int k_hi) {
  SeedEstimate e;
  const double hurst = m.get_double("hurst");
  if (m.get("source") == "fbm") {
    const DyadicGrid grid(k_hi + 1, 1.0);
    const auto p = generate_path(HurstParam(hurst), grid, seed);
    e.report = hurst_estimate(p.values, grid, k_lo, k_hi);
    return e;
  }
  auto cfg = m.model_config();
  cfg.level = std::max(cfg.level, k_hi + 1);
  const auto w = generate_path(cfg.hurst, DyadicGrid(cfg.level, cfg.horizon), seed);
  const auto state = solve(cfg, w);
  if (!state.completed) {
    e.completed = false;
    e.failure = state.failure;
    return e;
  }
  const auto est = estimate_from_solver(state, cfg, cfg.observe.front(), k_lo, k_hi);
  const bool real = m.get("channel") == "real";
  e.report = real ? est.real : est.imag;
  e.other = real ? est.imag : est.real;
  e.has_other = true;
  return e;
}

void write_report_rows(std::ostream& out, std::uint64_t seed, const EstimatorReport& r, double hurst, double horizon) {
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const double mesh = std::ldexp(horizon, -r.levels[i]);
    out << seed << ',' << r.levels[i] << ',' << r.qv[i] << ',' << std::pow(mesh, 1.0 - 2.0 * hurst) * r.qv[i] << ','
        << r.ratio_sequence[i] << ',' << r.h_sequence[i] << ',' << r.channel << '\n';
  }
}

RunResult run_estimate(const Manifest& m) {
  RunResult r;
  Artifacts a(m, r);
  const auto [k_lo, k_hi] = m.get_range("levels");
  const auto count = static_cast<std::size_t>(m.get_int("seeds"));
  if (count < 1) throw ConfigError("manifest key 'seeds': at least one seed is required");
  const std::uint64_t seed = m.get_u64("seed");
  const double hurst = m.get_double("hurst");
  const double horizon = m.get("source") == "fbm" ? 1.0 : m.get_double("horizon");

  std::vector<SeedEstimate> per(count);
  parallel_for(count, [&](std::size_t i) { per[i] = estimate_one(m, seed + i, k_lo, k_hi); });

  std::ostringstream s;
  s.precision(17);
  s << "seed,k,qv,scaled_qv,ratio,h_k,channel\n";
  std::vector<double> finals;
  std::vector<std::vector<double>> abs_err(static_cast<std::size_t>(k_hi - k_lo + 1));
  bool aborted = false, inconclusive = false;
  std::string failure;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = per[i];
    if (!e.completed) {
      aborted = true;
      failure = e.failure;
      continue;
    }
    write_report_rows(s, seed + i, e.report, hurst, horizon);
    if (e.has_other) write_report_rows(s, seed + i, e.other, hurst, horizon);
    inconclusive = inconclusive || e.report.inconclusive;
    finals.push_back(e.report.final_h);
    for (std::size_t j = 0; j < abs_err.size(); ++j) abs_err[j].push_back(std::fabs(e.report.h_sequence[j] - hurst));
  }
  a.csv(aborted ? "report.partial.csv" : "report.csv", s.str());

  json j;
  j["config_hash"] = m.hash_hex();
  j["n_seeds"] = finals.size();
  j["inconclusive"] = inconclusive;
  if (aborted) j["failure"] = failure;
  bool pass = false;
  if (!finals.empty()) {
    const auto sum = summarize(finals);
    j["final_h"] = finite_or_null(sum.median);
    j["ci_band"] = {finite_or_null(sum.q25), finite_or_null(sum.q75)};
    j["per_seed_final_h"] = finals;
    std::vector<double> trend;
    for (auto& v : abs_err) trend.push_back(stats::median(v));
    j["median_abs_error_by_level"] = trend;
    bool mono = true;
    for (std::size_t i = 3; i < trend.size(); ++i) {
      const double before = (trend[i - 3] + trend[i - 2] + trend[i - 1]) / 3.0;
      const double after = (trend[i - 2] + trend[i - 1] + trend[i]) / 3.0;
      if (after > before) mono = false;
    }
    j["trend_monotone"] = mono;
    j["tolerance"] = m.get_double("tolerance");
    j["median_abs_error"] = finite_or_null(trend.back());
    pass = !aborted && !inconclusive && trend.back() <= m.get_double("tolerance");
  }
  a.summary(j, pass, aborted ? 3 : (pass ? 0 : 1));
  return r;
}

std::string cell_row(const Manifest& cell, const SeedEstimate& e) {
  std::ostringstream s;
  s.precision(17);
  s << cell.get("hurst") << ',' << cell.get("seed") << ',' << cell.get_range("levels").first << ',';
  if (e.completed) {
    s << e.report.final_h << ',';
    if (e.has_other) s << e.other.final_h;
  } else {
    s << "nan,";
  }
  s << '\n';
  return s.str();
}

RunResult run_sweep(const Manifest& m) {
  const auto cells = sweep_cells(m);
  if (cells.size() > static_cast<std::size_t>(m.get_int("budget")))
    throw ConfigError("sweep needs " + std::to_string(cells.size()) + " cells, above the budget of " + m.get("budget"));
  RunResult r;
  Artifacts a(m, r);
  const fs::path cell_dir = a.dir() / "cells";
  fs::create_directories(cell_dir);

  std::vector<std::string> rows(cells.size());
  std::vector<char> reused(cells.size(), 0);
  parallel_for(cells.size(), [&](std::size_t i) {
    const auto& cell = cells[i];
    const fs::path file = cell_dir / (cell.hash_hex() + ".csv");
    const std::string tag = "# manifest_hash=" + cell.hash_hex();
    if (std::ifstream in(file); in) {
      std::string first, row;
      if (std::getline(in, first) && first == tag && std::getline(in, row) && !row.empty()) {
        rows[i] = row + '\n';
        reused[i] = 1;
        return;
      }
    }
    const auto [k, k2] = cell.get_range("levels");
    (void)k2;
    rows[i] = cell_row(cell, estimate_one(cell, cell.get_u64("seed"), k, k));
    // Write then rename so an interrupted cell never looks complete.
    const fs::path tmp = file.string() + ".tmp";
    std::ofstream(tmp, std::ios::binary) << tag << '\n' << rows[i];
    fs::rename(tmp, file);
  });

  std::ostringstream s;
  s.precision(17);
  s << "row,hurst,seed,k,h_real,h_imag,median,q25,q75,count\n";
  std::map<std::string, std::vector<double>> by_h;
  const bool real = m.get("channel") == "real";
  std::size_t nan_cells = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto fields = split(rows[i].substr(0, rows[i].size() - 1), ',');
    s << "cell," << fields[0] << ',' << fields[1] << ',' << fields[2] << ',' << fields[3] << ','
      << (fields.size() > 4 ? fields[4] : "") << ",,,,\n";
    const std::string& pick = real ? fields[3] : (fields.size() > 4 ? fields[4] : "");
    double v;
    if (pick.empty() || !parse_number(pick, v)) {
      ++nan_cells;
      continue;
    }
    by_h[fields[0]].push_back(v);
  }
  json groups = json::array();
  bool pass = nan_cells == 0;
  for (const auto& hs : m.get_list("hursts")) {
    const auto it = by_h.find(format_real(hs));
    if (it == by_h.end()) {
      pass = false;
      continue;
    }
    const auto sum = summarize(it->second);
    s << "aggregate," << it->first << ",,,,," << sum.median << ',' << sum.q25 << ',' << sum.q75 << ',' << sum.count
      << '\n';
    std::vector<double> err;
    for (double v : it->second) err.push_back(std::fabs(v - hs));
    const double mae = stats::median(err);
    const bool ok = mae <= m.get_double("tolerance");
    pass = pass && ok;
    groups.push_back({{"hurst", hs}, {"median", sum.median}, {"q25", sum.q25}, {"q75", sum.q75},
                      {"count", sum.count}, {"median_abs_error", mae}, {"pass", ok}});
  }
  a.csv("sweep.csv", s.str());
  json j;
  j["groups"] = groups;
  j["cells"] = cells.size();
  j["cells_reused"] = std::count(reused.begin(), reused.end(), 1);
  j["cells_computed"] = cells.size() - static_cast<std::size_t>(std::count(reused.begin(), reused.end(), 1));
  j["cells_failed"] = nan_cells;
  a.summary(j, pass, nan_cells ? 3 : (pass ? 0 : 1));
  return r;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Manifest Manifest::defaults(const std::string& kind) {
  Manifest m;
  m.kind_ = kind;
  for (const auto& [key, rule] : schema_for(kind)) m.values_[key] = rule.fallback;
  return m;
}

Manifest Manifest::parse(std::string_view text, const std::string& kind) {
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("manifest line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (entries.count(key)) throw ConfigError("manifest key '" + key + "' appears twice");
    entries[key] = trim(t.substr(eq + 1));
  }
  std::string k = kind;
  if (auto it = entries.find("kind"); it != entries.end()) {
    if (!kind.empty() && it->second != kind)
      throw ConfigError("manifest kind '" + it->second + "' does not match '" + kind + "'");
    k = it->second;
  }
  if (k.empty()) throw ConfigError("manifest has no kind");
  Manifest m = defaults(k);
  m.merge(entries);
  return m;
}

Manifest Manifest::load(const fs::path& file, const std::string& kind) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read manifest " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse(s.str(), kind);
}

void Manifest::set(const std::string& key, const std::string& value) {
  const auto schema = schema_for(kind_);
  const auto it = schema.find(key);
  if (it == schema.end()) throw ConfigError("manifest key '" + key + "' is not used by '" + kind_ + "' experiments");
  if (key == "kind" && value != kind_) throw ConfigError("manifest key 'kind' cannot change the experiment kind");
  check_value(key, it->second, value);
  if (key == "gamma" && value != "auto") {
    double d;
    if (!parse_number(value, d)) throw ConfigError("manifest key 'gamma': expected a real number or auto, got '" + value + "'");
  }
  if (key == "observe") parse_modes(value);
  values_[key] = value;
}

void Manifest::merge(const std::map<std::string, std::string>& overrides) {
  for (const auto& [k, v] : overrides) set(k, v);
}

const std::string& Manifest::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("manifest key '" + key + "' is not defined for '" + kind_ + "'");
  return it->second;
}

double Manifest::get_double(const std::string& key) const {
  double d;
  if (!parse_number(get(key), d)) throw ConfigError("manifest key '" + key + "' is not a real number");
  return d;
}

long Manifest::get_int(const std::string& key) const {
  long l;
  if (!parse_number(get(key), l)) throw ConfigError("manifest key '" + key + "' is not an integer");
  return l;
}

std::uint64_t Manifest::get_u64(const std::string& key) const {
  std::uint64_t u;
  if (!parse_number(get(key), u)) throw ConfigError("manifest key '" + key + "' is not a non-negative integer");
  return u;
}

bool Manifest::get_bool(const std::string& key) const { return get(key) == "true"; }

std::vector<double> Manifest::get_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split(get(key), ',')) {
    double d;
    if (!parse_number(p, d)) throw ConfigError("manifest key '" + key + "' is not a number list");
    out.push_back(d);
  }
  return out;
}

std::pair<int, int> Manifest::get_range(const std::string& key) const {
  const auto p = split(get(key), ':');
  long a, b;
  if (p.size() != 2 || !parse_number(p[0], a) || !parse_number(p[1], b))
    throw ConfigError("manifest key '" + key + "' is not a range");
  return {static_cast<int>(a), static_cast<int>(b)};
}

std::string Manifest::serialize() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t Manifest::hash() const {
  std::string s;
  for (const auto& [k, v] : values_)
    if (k != "out") s += k + "=" + v + "\n";
  return fnv1a64(s);
}

std::string Manifest::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

ModelConfig Manifest::model_config() const {
  const int n = static_cast<int>(get_int("grid_n"));
  const double h = get_double("hurst");
  ModelConfig c;
  c.grid_n = n;
  c.alpha = SobolevIndex(get_double("alpha"));
  c.hurst = HurstParam(h);
  c.gamma = get("gamma") == "auto" ? h - 0.05 : get_double("gamma");
  c.xi = xi_preset(get("xi"), n, get_double("xi_amplitude"));
  c.omega0 = omega0_preset(get("omega0"), n, c.alpha.alpha());
  c.horizon = get_double("horizon");
  c.level = static_cast<int>(get_int("level"));
  c.mode = parse_solve_mode(get("mode"));
  c.store_level = static_cast<int>(get_int("store_level"));
  c.norm_ceiling = get_double("norm_ceiling");
  c.window.initial_fraction = get_double("window.initial");
  c.window.floor_fraction = get_double("window.floor");
  c.window.tol = get_double("window.tol");
  c.window.max_iter = static_cast<int>(get_int("window.max_iter"));
  c.observe = parse_modes(get("observe"));
  c.validate();
  return c;
}

std::vector<Manifest> sweep_cells(const Manifest& sweep) {
  if (sweep.kind() != "sweep") throw ConfigError("sweep_cells needs a sweep manifest");
  const long seeds = sweep.get_int("seeds");
  if (seeds < 1) throw ConfigError("manifest key 'seeds': at least one seed is required");
  const long k = sweep.get_int("k");
  const auto base = sweep.get_u64("seed");
  std::vector<Manifest> cells;
  for (double h : sweep.get_list("hursts"))
    for (long i = 0; i < seeds; ++i) {
      Manifest c = Manifest::defaults("estimate");
      for (const auto& [key, v] : sweep.values())
        if (key != "kind" && key != "hursts" && key != "seeds" && key != "k" && key != "budget") c.set(key, v);
      c.set("hurst", format_real(h));
      c.set("seed", std::to_string(base + static_cast<std::uint64_t>(i)));
      c.set("seeds", "1");
      c.set("levels", std::to_string(k) + ":" + std::to_string(k));
      cells.push_back(std::move(c));
    }
  return cells;
}

RunResult run(const Manifest& manifest) {
  const auto& kind = manifest.kind();
  if (kind == "fbm-gen") return run_fbm_gen(manifest);
  if (kind == "prop15") return run_prop15(manifest);
  if (kind == "young-check") return run_young_check(manifest);
  if (kind == "simulate") return run_simulate(manifest);
  if (kind == "estimate") return run_estimate(manifest);
  if (kind == "sweep") return run_sweep(manifest);
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

}  // namespace fracvort
