#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace rescrb {

/// CSV with one observation per row and N columns. A first line that does not
/// parse as numbers is treated as a header.
Eigen::MatrixXd parse_dataset(const std::string& text);
Eigen::MatrixXd read_dataset(const std::filesystem::path& path);

/// Header x1..xN, values with 17 significant digits so a read-back is exact.
std::string format_dataset(const Eigen::MatrixXd& x);
void write_dataset(const Eigen::MatrixXd& x, const std::filesystem::path& path);

}  // namespace rescrb
