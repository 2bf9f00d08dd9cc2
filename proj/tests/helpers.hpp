#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsel/core.hpp"
#include "fsel/rng.hpp"

namespace testutil {

// Deterministic dense matrix with entries roughly uniform on [-scale, scale).
inline fsel::Matrix random_matrix(fsel::Index n, fsel::Index d,
                                  std::uint64_t seed, double scale = 1.0) {
  fsel::Rng rng(seed);
  fsel::Matrix m(n, d);
  for (fsel::Index i = 0; i < n; ++i)
    for (fsel::Index j = 0; j < d; ++j)
      m(i, j) = (2.0 * rng.next_double() - 1.0) * scale;
  return m;
}

// Matrix whose every entry is exactly representable as a float32, so binary
// round-trips must reproduce it bit for bit.
inline fsel::Matrix random_float32_matrix(fsel::Index n, fsel::Index d,
                                          std::uint64_t seed,
                                          double scale = 8.0) {
  fsel::Rng rng(seed);
  fsel::Matrix m(n, d);
  for (fsel::Index i = 0; i < n; ++i)
    for (fsel::Index j = 0; j < d; ++j)
      m(i, j) = static_cast<double>(
          static_cast<float>((2.0 * rng.next_double() - 1.0) * scale));
  return m;
}

// Self-cleaning unique directory under the system temp root.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("fsel_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI binary named by the FSEL_BIN environment variable with the
// given (already quoted-safe) arguments.
inline CliResult run_cli(const std::string& args, const TempDir& dir) {
  const char* bin = std::getenv("FSEL_BIN");
  if (!bin) throw std::runtime_error("FSEL_BIN is not set");
  const auto out_path = dir.file("cli_stdout.txt");
  const auto err_path = dir.file("cli_stderr.txt");
  const std::string command = std::string(bin) + " " + args + " > " +
                              out_path.string() + " 2> " + err_path.string();
  const int raw = std::system(command.c_str());
  CliResult result;
  result.exit_code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

}  // namespace testutil
