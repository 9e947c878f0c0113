#include "rescrb/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "rescrb/errors.hpp"

namespace rescrb {

namespace {

std::optional<std::vector<double>> parse_row(const std::string& line) {
    std::vector<double> values;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        if (first == std::string::npos) return std::nullopt;
        field = field.substr(first, last - first + 1);
        std::size_t used = 0;
        try {
            values.push_back(std::stod(field, &used));
        } catch (const std::exception&) {
            return std::nullopt;
        }
        if (used != field.size()) return std::nullopt;
    }
    if (values.empty()) return std::nullopt;
    return values;
}

}  // namespace

Eigen::MatrixXd parse_dataset(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto row = parse_row(line);
        if (!row) {
            if (rows.empty() && line_no == 1) continue;  // header
            throw InvalidInput("dataset line " + std::to_string(line_no) + ": not numeric");
        }
        if (!rows.empty() && row->size() != rows.front().size()) {
            throw InvalidInput("dataset line " + std::to_string(line_no) +
                               ": inconsistent column count");
        }
        rows.push_back(std::move(*row));
    }
    if (rows.empty()) throw InvalidInput("dataset is empty");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return x;
}

Eigen::MatrixXd read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open dataset '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

std::string format_dataset(const Eigen::MatrixXd& x) {
    std::ostringstream os;
    for (Eigen::Index j = 0; j < x.cols(); ++j) os << (j ? "," : "") << 'x' << (j + 1);
    os << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
            os << (j ? "," : "") << buf;
        }
        os << '\n';
    }
    return os.str();
}

void write_dataset(const Eigen::MatrixXd& x, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << format_dataset(x);
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace rescrb
