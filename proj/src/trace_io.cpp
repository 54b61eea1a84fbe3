#include "softwrist/trace_io.hpp"

#include "softwrist/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace softwrist {

std::string format_double(double v) {
  char buf[64];
  // Shortest representation that parses back to the same double.
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::string trace_header(int actuators) {
  std::string h = "t,theta_des,theta_o,theta_dot_o,e,sigma,tau";
  for (int i = 1; i <= actuators; ++i) h += ",F_t_" + std::to_string(i);
  h += ",dist_fx,dist_fy";
  return h;
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  out << trace_header(trace.actuators) << '\n';
  std::string line;
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    line.clear();
    for (double v : {trace.t[r], trace.theta_des[r], trace.theta_o[r], trace.theta_dot_o[r], trace.e[r],
                     trace.sigma[r], trace.tau[r]}) {
      line += format_double(v);
      line += ',';
    }
    for (int i = 0; i < trace.actuators; ++i) {
      line += format_double(trace.tendon_forces[r][i]);
      line += ',';
    }
    line += format_double(trace.disturbance[r].x());
    line += ',';
    line += format_double(trace.disturbance[r].y());
    line += '\n';
    out << line;
  }
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace " + path);
  write_trace_csv(trace, out);
  if (!out) throw Error("failed writing trace " + path);
}

SimulationTrace read_trace_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("trace CSV is empty");
  int columns = 1;
  for (char c : header) columns += c == ',';
  const int actuators = columns - 9;
  if (actuators < 0 || header != trace_header(actuators)) throw ConfigError("unexpected trace CSV header");

  SimulationTrace tr;
  tr.actuators = actuators;
  std::string line, cell;
  std::vector<double> row(static_cast<std::size_t>(columns));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= columns) throw ConfigError("trace CSV row has too many fields");
      row[static_cast<std::size_t>(c++)] = parse_double(cell);
    }
    if (c != columns) throw ConfigError("trace CSV row has too few fields");
    tr.t.push_back(row[0]);
    tr.theta_des.push_back(row[1]);
    tr.theta_o.push_back(row[2]);
    tr.theta_dot_o.push_back(row[3]);
    tr.e.push_back(row[4]);
    tr.sigma.push_back(row[5]);
    tr.tau.push_back(row[6]);
    Eigen::VectorXd f(actuators);
    for (int i = 0; i < actuators; ++i) f[i] = row[static_cast<std::size_t>(7 + i)];
    tr.tendon_forces.push_back(f);
    tr.disturbance.emplace_back(row[static_cast<std::size_t>(7 + actuators)],
                                row[static_cast<std::size_t>(8 + actuators)]);
  }
  return tr;
}

SimulationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("trace file not found: " + path, path);
  return read_trace_csv(in);
}

std::string metrics_text(const Metrics& m, const SimulationTrace& trace, double target) {
  std::ostringstream os;
  os << "controller = " << trace.controller << '\n';
  os << "gains = " << trace.gains << '\n';
  os << "seed = " << trace.seed << '\n';
  os << "scenario_hash = " << trace.scenario_hash << '\n';
  os << "target_rad = " << format_double(target) << '\n';
  os << "rows = " << trace.rows() << '\n';
  os << "failed = " << (m.failed ? "true" : "false") << '\n';
  if (trace.failed) os << "failure = " << trace.failure << '\n';
  os << "rmse_rad = " << format_double(m.rmse) << '\n';
  os << "settling_time_s = " << (m.settling_time ? format_double(*m.settling_time) : std::string("unsettled"))
     << '\n';
  os << "steady_state_error_rad = " << format_double(m.steady_state_error) << '\n';
  os << "negative_tension_rows = " << trace.negative_tension_rows << '\n';
  for (const auto& w : trace.warnings) os << "warning = " << w << '\n';
  return os.str();
}

}  // namespace softwrist
