#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "fuelml/dataset.hpp"

namespace fuelml::testing {

namespace fs = std::filesystem;

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<double>& target) {
  Dataset d;
  const std::size_t p = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < p; ++j) d.feature_names.push_back("x" + std::to_string(j));
  d.target_name = "y";
  d.features = Matrix(0, p);
  for (const auto& r : rows) d.features.append_row(r);
  d.target = target;
  return d;
}

// Continuous features in [-2, 2) or, when `grid` > 0, integers in [0, grid).
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p, int grid = 0) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> g(0, grid > 0 ? grid - 1 : 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(p));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) rows[i][j] = grid > 0 ? g(rng) : u(rng);
    y[i] = noise(rng);
    if (p > 0) y[i] += 2.0 * rows[i][0];
  }
  return make_dataset(rows, y);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("fuelml_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct CliRun {
  int status = 0;
  std::string out;
  std::string err;
};

// Runs the fuelml executable with `args` (already shell-quoted where needed).
inline CliRun run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + FUELML_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

}  // namespace fuelml::testing
