#include "quasar/problem_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace quasar {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw Error("read_problem: bad number '" + s + "' in " + where);
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_problem(const GlmProblem& problem, const fs::path& stem) {
  problem.validate();
  const auto n = problem.n();
  const auto d = problem.d();

  std::ofstream csv(with_ext(stem, ".csv"));
  if (!csv) throw Error("write_problem: cannot open " + with_ext(stem, ".csv").string());
  csv << 'j';
  for (Eigen::Index j = 1; j <= d; ++j) csv << ",x_" << j;
  csv << ",y\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    csv << i;
    for (Eigen::Index j = 0; j < d; ++j) csv << ',' << format_double(problem.X(i, j));
    csv << ',' << format_double(problem.y[i]) << '\n';
  }

  json meta;
  meta["n"] = n;
  meta["d"] = d;
  meta["link"] = problem.link.name();
  meta["alpha"] = problem.link.alpha();
  meta["seed"] = problem.seed;
  meta["w_star"] = std::vector<double>(problem.w_star.data(), problem.w_star.data() + d);
  std::ofstream js(with_ext(stem, ".json"));
  if (!js) throw Error("write_problem: cannot open " + with_ext(stem, ".json").string());
  js << meta.dump(2) << '\n';
}

GlmProblem read_problem(const fs::path& stem) {
  std::ifstream js(with_ext(stem, ".json"));
  if (!js) throw Error("read_problem: cannot open " + with_ext(stem, ".json").string());
  const json meta = json::parse(js);
  const auto n = meta.at("n").get<Eigen::Index>();
  const auto d = meta.at("d").get<Eigen::Index>();
  const auto w_star = meta.at("w_star").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w_star.size()) != d) throw Error("read_problem: w_star length != d");

  GlmProblem p;
  p.link = LinkFunction::make(parse_link_kind(meta.at("link").get<std::string>()),
                              meta.at("alpha").get<double>());
  p.seed = meta.at("seed").get<std::uint64_t>();
  p.w_star = Eigen::Map<const Vec>(w_star.data(), d);
  p.X.resize(n, d);
  p.y.resize(n);

  const fs::path csv_path = with_ext(stem, ".csv");
  std::ifstream csv(csv_path);
  if (!csv) throw Error("read_problem: cannot open " + csv_path.string());
  std::string line;
  std::getline(csv, line);
  const auto header = split_csv(line);
  if (static_cast<Eigen::Index>(header.size()) != d + 2 || header.front() != "j" || header.back() != "y")
    throw Error("read_problem: header does not match j,x_1..x_d,y");
  for (Eigen::Index j = 1; j <= d; ++j)
    if (header[static_cast<std::size_t>(j)] != "x_" + std::to_string(j))
      throw Error("read_problem: unexpected column '" + header[static_cast<std::size_t>(j)] + "'");

  Eigen::Index i = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    if (i >= n) throw Error("read_problem: more rows than n");
    const auto cells = split_csv(line);
    if (static_cast<Eigen::Index>(cells.size()) != d + 2) throw Error("read_problem: ragged row " + std::to_string(i));
    for (Eigen::Index j = 0; j < d; ++j)
      p.X(i, j) = parse_double(cells[static_cast<std::size_t>(j + 1)], csv_path.string());
    p.y[i] = parse_double(cells.back(), csv_path.string());
    ++i;
  }
  if (i != n) throw Error("read_problem: expected " + std::to_string(n) + " rows, found " + std::to_string(i));
  return p;
}

}  // namespace quasar
