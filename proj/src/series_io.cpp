#include "neuroskin/series_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "neuroskin/errors.hpp"

namespace neuroskin {

namespace {

double parse_double(std::string_view token, const std::filesystem::path& path) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw IoError(path.string() + ": cannot parse '" + std::string(token) + "' as a number");
  return value;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

void write_series(const std::filesystem::path& path, std::span<const double> values) {
  auto out = open_for_write(path);
  for (double v : values) out << format_double(v) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string token;
  while (in >> token) values.push_back(parse_double(token, path));
  return values;
}

void write_params_csv(const std::filesystem::path& path, std::span<const double> w_o) {
  auto out = open_for_write(path);
  out << "element_index,w_o\n";
  for (std::size_t e = 0; e < w_o.size(); ++e) out << e << ',' << format_double(w_o[e]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_params_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty params file");
  std::vector<double> w;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path.string() + ": malformed row '" + line + "'");
    const double index = parse_double(std::string_view(line).substr(0, comma), path);
    if (index != static_cast<double>(w.size()))
      throw IoError(path.string() + ": element indices must be consecutive from 0");
    w.push_back(parse_double(std::string_view(line).substr(comma + 1), path));
  }
  return w;
}

}  // namespace neuroskin
