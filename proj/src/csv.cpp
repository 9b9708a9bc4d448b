#include "robustgan/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "robustgan/errors.hpp"

namespace robustgan {

namespace {

bool parse_row(const std::string& line, Vector& out) {
    out.clear();
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t end = line.find(',', start);
        if (end == std::string::npos) end = line.size();
        const std::string cell = line.substr(start, end - start);
        char* rest = nullptr;
        const double v = std::strtod(cell.c_str(), &rest);
        if (rest == cell.c_str()) return false;
        while (*rest == ' ' || *rest == '\r' || *rest == '\t') ++rest;
        if (*rest != '\0') return false;
        out.push_back(v);
        if (end == line.size()) break;
        start = end + 1;
    }
    return !out.empty();
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidData("cannot open data file: " + path);

    std::vector<Vector> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Vector row;
        if (!parse_row(line, row)) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw InvalidData("unparsable CSV row: " + line);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidData("ragged CSV rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidData("no data rows in " + path);

    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (!std::isfinite(rows[i][j])) throw InvalidData("non-finite value in " + path);
            m(i, j) = rows[i][j];
        }
    return m;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw InvalidData("cannot open output file: " + path);
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 < m.cols() ? "," : "");
        }
        out << "\n";
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidData("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidData("cannot open output file: " + path);
    out << contents;
}

}  // namespace robustgan
