#pragma once

#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace lama {

std::string fmt_g17(double v);  // round-trip exact
std::string fmt_g6(double v);

/// Tabular output with a resolved-config echo; CSV and JSON render the same
/// content (meta as `# key=value` comments vs a "config" object).
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_meta(const std::string& k, const std::string& v) { meta.emplace_back(k, v); }
};

void write_csv(const Table& t, std::ostream& os);
void write_json(const Table& t, std::ostream& os);

/// Detector trace dump: t, tau, sigma2_hat, and per-iteration SER when a
/// reference signal was supplied.
struct LamaTraceRow;
void write_trace_csv(const std::vector<LamaTraceRow>& trace, std::ostream& os);

/// `key=value` lines grouped under `[section]` headers; '#' comments.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line;
};

using ConfigSections = std::map<std::string, std::vector<ConfigEntry>>;

ConfigSections parse_config_file(const std::string& path);

/// split "a,b,c" / parse "lo:hi:step" or comma list into doubles
std::vector<std::string> split_csv_list(const std::string& s);
std::vector<double> parse_grid(const std::string& s);

}  // namespace lama
