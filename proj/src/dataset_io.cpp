#include "gbcalib/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace gbcalib {

std::string g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, long line_no) {
  if (s.empty()) throw ParseError("empty numeric field", line_no);
  size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse number '" + s + "'", line_no);
  }
  if (pos != s.size())
    throw ParseError("trailing characters in number '" + s + "'", line_no);
  return v;
}

long parse_long(const std::string& s, long line_no) {
  if (s.empty()) throw ParseError("empty integer field", line_no);
  size_t pos = 0;
  long v;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse integer '" + s + "'", line_no);
  }
  if (pos != s.size())
    throw ParseError("trailing characters in integer '" + s + "'", line_no);
  return v;
}

}  // namespace

GroupedDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  ++line_no;
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "group_id" || header[1] != "y")
    throw ParseError("expected header group_id,y,x_1..x_p", line_no);
  const int p = static_cast<int>(header.size()) - 2;

  // collect rows per group id, keeping first-appearance order
  std::map<long, int> slot;
  std::vector<long> order_ids;
  std::vector<std::vector<double>> ys;
  std::vector<std::vector<double>> xs;  // row-major per group
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != p + 2)
      throw ParseError("expected " + std::to_string(p + 2) + " fields, got " +
                           std::to_string(f.size()),
                       line_no);
    const long id = parse_long(f[0], line_no);
    auto it = slot.find(id);
    if (it == slot.end()) {
      it = slot.emplace(id, static_cast<int>(order_ids.size())).first;
      order_ids.push_back(id);
      ys.emplace_back();
      xs.emplace_back();
    }
    const int k = it->second;
    ys[k].push_back(parse_double(f[1], line_no));
    for (int j = 0; j < p; ++j)
      xs[k].push_back(parse_double(f[2 + j], line_no));
  }
  if (order_ids.empty()) throw ParseError("no data rows", line_no);

  std::vector<Group> groups;
  groups.reserve(order_ids.size());
  for (size_t k = 0; k < order_ids.size(); ++k) {
    const int ni = static_cast<int>(ys[k].size());
    Group g;
    g.x.resize(ni, p);
    g.y.resize(ni);
    for (int i = 0; i < ni; ++i) {
      g.y[i] = ys[k][i];
      for (int j = 0; j < p; ++j) g.x(i, j) = xs[k][i * p + j];
    }
    groups.push_back(std::move(g));
  }
  return make_dataset(std::move(groups));
}

void write_dataset_csv(const std::string& path, const GroupedDataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "group_id,y";
  for (int j = 1; j <= ds.p; ++j) out << ",x_" << j;
  out << "\n";
  long id = 0;
  for (const Group& g : ds.groups) {
    for (Eigen::Index i = 0; i < g.y.size(); ++i) {
      out << id << ',' << g17(g.y[i]);
      for (int j = 0; j < ds.p; ++j) out << ',' << g17(g.x(i, j));
      out << "\n";
    }
    ++id;
  }
}

void write_draws_csv(const std::string& path, const Matrix& draws,
                     const std::string& column_prefix) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "draw_index";
  for (Eigen::Index j = 1; j <= draws.cols(); ++j)
    out << ',' << column_prefix << j;
  out << "\n";
  for (Eigen::Index d = 0; d < draws.rows(); ++d) {
    out << d;
    for (Eigen::Index j = 0; j < draws.cols(); ++j)
      out << ',' << g17(draws(d, j));
    out << "\n";
  }
}

Matrix load_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  ++line_no;
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "draw_index")
    throw ParseError("expected header draw_index,<name>1..", line_no);
  const int p = static_cast<int>(header.size()) - 1;

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != p + 1)
      throw ParseError("expected " + std::to_string(p + 1) + " fields, got " +
                           std::to_string(f.size()),
                       line_no);
    std::vector<double> row(p);
    for (int j = 0; j < p; ++j) row[j] = parse_double(f[1 + j], line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no draws", line_no);
  Matrix m(static_cast<Eigen::Index>(rows.size()), p);
  for (size_t d = 0; d < rows.size(); ++d)
    for (int j = 0; j < p; ++j) m(static_cast<Eigen::Index>(d), j) = rows[d][j];
  return m;
}

}  // namespace gbcalib
