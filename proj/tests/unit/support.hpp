#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "aaerec/matrix.hpp"
#include "aaerec/random.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("aaerec-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Random binary matrix with every entry set with probability `p`.
inline aaerec::SparseBinaryMatrix random_binary(std::size_t rows, std::size_t cols, double p,
                                                aaerec::Rng& rng) {
  std::vector<std::vector<std::uint32_t>> r(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j)
      if (aaerec::uniform01(rng) < p) r[i].push_back(j);
  return aaerec::SparseBinaryMatrix::from_rows(cols, r);
}

inline aaerec::DenseMatrix random_dense(std::size_t rows, std::size_t cols, aaerec::Rng& rng) {
  aaerec::DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = 2.0 * aaerec::uniform01(rng) - 1.0;
  return m;
}

inline double max_abs_diff(const aaerec::DenseMatrix& a, const aaerec::DenseMatrix& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
  return d;
}

}  // namespace testing
