#include "epiguard/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epiguard/errors.hpp"
#include "epiguard/scenario_io.hpp"

namespace epiguard {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t";
  for (const auto& label : traj.labels) out << ',' << label;
  out << ",u_raw,u";
  for (const auto& name : traj.constraint_names) out << ",h_" << name;
  out << ",d\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_number(traj.times[k]);
    for (double v : traj.states[k].values()) out << ',' << format_number(v);
    out << ',' << format_number(traj.inputs[k].u_raw) << ',' << format_number(traj.inputs[k].u);
    for (double h : traj.barriers[k]) out << ',' << format_number(h);
    out << ',' << format_number(traj.disturbances[k]) << '\n';
  }
  return out.str();
}

void export_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  write_file(path, trajectory_csv(trajectory));
}

Trajectory import_trajectory_text(std::string_view text, const ModelSpec& spec, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 0, "empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  const std::size_t dim = spec.labels().size();
  if (header.size() < dim + 4 || header.front() != "t" || header.back() != "d") {
    throw ParseError(source, 1, "unexpected trajectory header");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[1 + k] != spec.labels()[k]) {
      throw ParseError(source, 1, "column '" + header[1 + k] + "' does not match compartment '" +
                                      spec.labels()[k] + "'");
    }
  }
  if (header[1 + dim] != "u_raw" || header[2 + dim] != "u") throw ParseError(source, 1, "missing u_raw,u columns");

  Trajectory traj;
  traj.labels = spec.labels();
  traj.n = spec.n();
  for (std::size_t c = 3 + dim; c + 1 < header.size(); ++c) {
    if (header[c].rfind("h_", 0) != 0) throw ParseError(source, 1, "unexpected column '" + header[c] + "'");
    traj.constraint_names.push_back(header[c].substr(2));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto row = split_csv(line);
    if (row.size() != header.size()) throw ParseError(source, line_no, "wrong column count");
    std::vector<double> v(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto [ptr, ec] = std::from_chars(row[c].data(), row[c].data() + row[c].size(), v[c]);
      if (ec != std::errc() || ptr != row[c].data() + row[c].size()) {
        throw ParseError(source, line_no, "bad number '" + row[c] + "' in column " + header[c]);
      }
    }
    traj.times.push_back(v[0]);
    traj.states.push_back(ModelState::from_flat(Vector(v.begin() + 1, v.begin() + 1 + dim), spec.n()));
    ControlDecision d;
    d.u_raw = v[1 + dim];
    d.u = v[2 + dim];
    d.feasible = d.u_raw >= 0.0 && d.u_raw <= 1.0;
    traj.inputs.push_back(d);
    traj.barriers.emplace_back(v.begin() + 3 + dim, v.end() - 1);
    traj.disturbances.push_back(v.back());
    traj.applied.push_back(clamp_input(d.u + v.back()));
  }
  if (traj.times.size() >= 2) traj.dt = traj.times[1] - traj.times[0];
  return traj;
}

Trajectory import_trajectory(const std::filesystem::path& path, const ModelSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return import_trajectory_text(buf.str(), spec, path.string());
}

std::string trajectory_long_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,series,value\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const std::string t = format_number(traj.times[k]);
    const auto row = [&](const std::string& series, double value) {
      out << t << ',' << series << ',' << format_number(value) << '\n';
    };
    for (std::size_t c = 0; c < traj.labels.size(); ++c) row(traj.labels[c], traj.states[k][c]);
    row("u_raw", traj.inputs[k].u_raw);
    row("u", traj.inputs[k].u);
    for (std::size_t c = 0; c < traj.constraint_names.size(); ++c) row("h_" + traj.constraint_names[c], traj.barriers[k][c]);
    row("d", traj.disturbances[k]);
  }
  return out.str();
}

}  // namespace epiguard
