#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "haptex/errors.hpp"

namespace haptex::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws FormatError if absent
};

CsvTable read_csv(const std::string& path);

// Numeric table with a strictly increasing time column first, e.g.
// `t_s,ax,ay,az`. Returns timestamps and the value columns.
struct TimedChannels {
  Eigen::VectorXd t;
  Eigen::MatrixXd values;
};

TimedChannels read_timed_csv(const std::string& path, int value_columns);

void write_timed_csv(const std::string& path, const std::string& header,
                     const Eigen::VectorXd& t, const Eigen::MatrixXd& values,
                     int significant_digits = 9);

double parse_double(const std::string& s, const std::string& context);

}  // namespace haptex::io
