#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foodgap {

// Process exit codes shared by the CLI and the pipeline driver.
enum class ErrorKind { usage = 1, data = 2, internal = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error data_error(const std::string& what) {
  return Error(ErrorKind::data, what);
}

// Five-digit US county identifier.
class Fips {
 public:
  // Accepts 5 digits, or 4 digits with the leading zero dropped.
  static std::optional<Fips> parse(std::string_view text);

  const std::string& str() const { return code_; }

  auto operator<=>(const Fips&) const = default;

 private:
  explicit Fips(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }
  // True when the unrounded total is above `bound`.
  bool exceeds(double bound) const { return compensation_ > bound - sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// visited exactly once; callers write into per-index slots so results do
// not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

// Splits one CSV record, honouring double quotes.
std::vector<std::string> split_csv(const std::string& line);

std::string trim(std::string_view s);

// Shortest text that round-trips the double exactly.
std::string format_double(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Hex SHA-256 of a byte string / file contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace foodgap

template <>
struct std::hash<foodgap::Fips> {
  std::size_t operator()(const foodgap::Fips& f) const noexcept {
    return std::hash<std::string>{}(f.str());
  }
};
