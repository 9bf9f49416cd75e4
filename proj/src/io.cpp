#include "lama/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lama/detector.hpp"
#include "lama/errors.hpp"

namespace lama {

void write_trace_csv(const std::vector<LamaTraceRow>& trace, std::ostream& os) {
  os << "t,tau,sigma2_hat,ser\n";
  for (const auto& row : trace) {
    os << row.t << "," << fmt_g17(row.tau) << "," << fmt_g17(row.sigma2_hat) << ",";
    if (std::isnan(row.ser)) {
      os << "";
    } else {
      os << fmt_g17(row.ser);
    }
    os << "\n";
  }
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_csv(const Table& t, std::ostream& os) {
  for (const auto& [k, v] : t.meta) os << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << t.columns[i] << (i + 1 < t.columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
}

void write_json(const Table& t, std::ostream& os) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : t.meta) j["config"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) j["rows"].push_back(row);
  os << j.dump(2) << "\n";
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigSections parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config file: " + path);
  ConfigSections out;
  std::string section = "";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw validation_error(path + ":" + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      out[section];  // register even if empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    ConfigEntry e;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw validation_error(path + ":" + std::to_string(lineno) + ": empty key");
    out[section].push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  // "lo:hi:step" or "v1,v2,..."
  if (s.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream ss(s);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0))
      throw validation_error("bad grid spec: " + s + " (want lo:hi:step)");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) out.push_back(lo + i * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_csv_list(s)) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw validation_error("bad numeric list entry: " + item);
    }
  }
  if (out.empty()) throw validation_error("empty grid: " + s);
  return out;
}

}  // namespace lama
