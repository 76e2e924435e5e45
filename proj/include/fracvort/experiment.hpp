#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fracvort/solver.hpp"

namespace fracvort {

inline constexpr std::string_view kExperimentKinds[] = {"fbm-gen", "prop15", "young-check", "simulate", "estimate",
                                                        "sweep"};

/// Flat key=value experiment description. Each kind has a fixed key set with
/// defaults; unknown keys and malformed values are rejected with the key name.
///
/// Text form: one `key = value` per line, `#` starts a comment. The canonical
/// form lists keys in sorted order as `key=value`. The manifest hash is the
/// 64-bit FNV-1a of that text without the `out` line, so the output location
/// does not change artifact contents.
class Manifest {
 public:
  static Manifest defaults(const std::string& kind);
  /// Parses text on top of the kind's defaults. The kind comes from the text's
  /// `kind` line, or from `kind` when the text has none.
  static Manifest parse(std::string_view text, const std::string& kind = {});
  static Manifest load(const std::filesystem::path& file, const std::string& kind = {});

  const std::string& kind() const noexcept { return kind_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  /// Sets every entry of `overrides` in turn.
  void merge(const std::map<std::string, std::string>& overrides);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;
  /// "a:b" inclusive integer range.
  std::pair<int, int> get_range(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  std::string serialize() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  /// Model configuration from the model keys (grid_n, alpha, hurst, gamma, xi,
  /// xi_amplitude, omega0, horizon, level, mode, store_level, norm_ceiling,
  /// window.*, observe).
  ModelConfig model_config() const;

 private:
  std::string kind_;
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(std::string_view text);

struct RunResult {
  int exit_code = 0;
  bool pass = false;
  std::filesystem::path summary_file;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs the manifest's experiment into its `out` directory. Every CSV starts
/// with a `# manifest_hash=` line; binary dumps get a `.manifest` sidecar; the
/// summary JSON carries the hash and the experiment's pass/fail assertions.
/// Exit codes: 0 pass, 1 assertion failed, 3 numerical abort (partial
/// artifacts kept and marked).
RunResult run(const Manifest& manifest);

/// Sweep cells (kind "estimate" manifests, one seed each) in the order they
/// are run and aggregated.
std::vector<Manifest> sweep_cells(const Manifest& sweep);

}  // namespace fracvort
