#pragma once
// Command-line front end: identities | freewave | spectrum | blowup | norms.
// Each command prints a JSON summary on stdout and, with --out PREFIX, writes
// PREFIX.json (and PREFIX.csv for series) atomically.
//
// Exit codes: 0 ok, 1 tolerance breach or runtime failure, 2 config error.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsc {

enum ExitCode : int { exit_ok = 0, exit_breach = 1, exit_config = 2 };

// Unset fields take per-command defaults (see resolve_defaults).
struct RunConfig {
  std::string command;
  std::optional<int> d, N, k;
  std::optional<double> R, eps, amp, s_end, dt;
  std::vector<int> dims;
  std::string out;
  bool scan_ssc = false;
  unsigned seed = 0;
};

// Thrown for invalid configurations; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads a flat key-value JSON object (keys as the long flag names, with
// underscores). Unknown keys and wrong types throw ConfigError.
RunConfig config_from_json(const std::string& text);
// Fills unset fields with the defaults of cfg.command and checks them against
// the module preconditions. Throws ConfigError.
RunConfig resolve_defaults(RunConfig cfg);

int cmd_identities(const RunConfig& cfg, std::ostream& out);
int cmd_freewave(const RunConfig& cfg, std::ostream& out);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out);
int cmd_blowup(const RunConfig& cfg, std::ostream& out);
int cmd_norms(const RunConfig& cfg, std::ostream& out);

// Full front end; argv[0] is the program name.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace hsc
