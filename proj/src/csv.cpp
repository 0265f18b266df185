#include "haptex/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace haptex::io {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw FormatError("csv: missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open csv: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty csv: " + path);
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != table.header.size())
      throw FormatError(path + ": row has " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

double parse_double(const std::string& s, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || (end && *end != '\0'))
    throw FormatError(context + ": not a number: '" + s + "'");
  return v;
}

TimedChannels read_timed_csv(const std::string& path, int value_columns) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open recording channel: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty channel file: " + path);

  std::vector<double> ts;
  std::vector<double> vals;
  ts.reserve(1 << 16);
  vals.reserve((1 << 16) * value_columns);

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    const double t = std::strtod(p, &end);
    if (end == p) throw IngestError(path + ": bad timestamp at line " + std::to_string(line_no));
    ts.push_back(t);
    p = end;
    for (int c = 0; c < value_columns; ++c) {
      if (*p != ',')
        throw IngestError(path + ": expected " + std::to_string(value_columns) +
                          " values at line " + std::to_string(line_no));
      ++p;
      const double v = std::strtod(p, &end);
      if (end == p) throw IngestError(path + ": bad value at line " + std::to_string(line_no));
      vals.push_back(v);
      p = end;
    }
  }
  if (ts.empty()) throw IngestError("no samples in " + path);

  TimedChannels out;
  out.t = Eigen::Map<Eigen::VectorXd>(ts.data(), ts.size());
  out.values.resize(ts.size(), value_columns);
  for (size_t r = 0; r < ts.size(); ++r)
    for (int c = 0; c < value_columns; ++c)
      out.values(r, c) = vals[r * value_columns + c];

  for (Eigen::Index i = 1; i < out.t.size(); ++i)
    if (out.t[i] <= out.t[i - 1])
      throw IngestError(path + ": timestamps not strictly increasing near row " +
                        std::to_string(i + 1));
  return out;
}

void write_timed_csv(const std::string& path, const std::string& header,
                     const Eigen::VectorXd& t, const Eigen::MatrixXd& values,
                     int significant_digits) {
  if (t.size() != values.rows())
    throw ShapeError("write_timed_csv: timestamp/value length mismatch");
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write csv: " + path);
  out << header << "\n";
  char buf[64];
  std::string line;
  for (Eigen::Index r = 0; r < t.size(); ++r) {
    line.clear();
    // timestamps keep full precision so grid uniformity survives the trip
    std::snprintf(buf, sizeof(buf), "%.12g", t[r]);
    line += buf;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.*g", significant_digits, values(r, c));
      line += buf;
    }
    line += '\n';
    out << line;
  }
  if (!out) throw FormatError("short write on csv: " + path);
}

}  // namespace haptex::io
