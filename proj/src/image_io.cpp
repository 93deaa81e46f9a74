#include "nbtv/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "nbtv/error.hpp"

namespace nbtv {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed for " + path.string());
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

// Line-oriented tokenizer that remembers where each field started.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  bool next_line() {
    while (pos_ < text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
      line_start_ = pos_;
      line_ = text_.substr(pos_, end - pos_);
      if (!line_.empty() && line_.back() == '\r') line_.remove_suffix(1);
      pos_ = end + 1;
      ++line_no_;
      if (!line_.empty()) return true;
    }
    return false;
  }

  std::vector<std::pair<std::string_view, std::size_t>> fields() const {
    std::vector<std::pair<std::string_view, std::size_t>> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line_.find(',', start);
      const std::size_t end = comma == std::string_view::npos ? line_.size() : comma;
      out.emplace_back(trim(line_.substr(start, end - start)), line_start_ + start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::size_t line_no() const { return line_no_; }

  [[noreturn]] void fail(const std::string& what, std::size_t byte) const {
    throw ParseError(what, line_no_, byte);
  }

  template <typename T>
  T parse_number(std::pair<std::string_view, std::size_t> field) const {
    auto [tok, byte] = field;
    T value{};
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
      fail("invalid number '" + std::string(field.first) + "'", byte);
    }
    return value;
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  std::string_view text_;
  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string format_csv(const Image& img) {
  std::string out = std::to_string(img.rows()) + "," + std::to_string(img.cols()) + "\n";
  for (std::size_t l = 0; l < img.rows(); ++l) {
    for (std::size_t k = 0; k < img.cols(); ++k) {
      if (k) out += ',';
      append_double(out, img(l, k));
    }
    out += '\n';
  }
  return out;
}

Image parse_csv(std::string_view text) {
  CsvReader reader(text);
  if (!reader.next_line()) throw ParseError("empty CSV image", 1, 0);
  auto header = reader.fields();
  if (header.size() != 2) reader.fail("header must be 'rows,cols'", header.front().second);
  const auto m = reader.parse_number<std::size_t>(header[0]);
  const auto n = reader.parse_number<std::size_t>(header[1]);
  if (m == 0 || n == 0) reader.fail("image dimensions must be positive", header[0].second);

  std::vector<double> values;
  values.reserve(m * n);
  std::size_t row = 0;
  while (reader.next_line()) {
    auto fields = reader.fields();
    if (row == m) throw ShapeError("CSV image: more than the declared " + std::to_string(m) + " rows");
    if (fields.size() != n) {
      reader.fail("expected " + std::to_string(n) + " columns, found " +
                      std::to_string(fields.size()),
                  fields.front().second);
    }
    for (const auto& f : fields) {
      const double v = reader.parse_number<double>(f);
      if (!std::isfinite(v)) reader.fail("non-finite value", f.second);
      values.push_back(v);
    }
    ++row;
  }
  if (row != m) {
    throw ShapeError("CSV image: header declares " + std::to_string(m) + " rows, found " +
                     std::to_string(row));
  }
  return Image(m, n, std::move(values));
}

Image read_csv(const fs::path& path) { return parse_csv(slurp(path)); }

void write_csv(const fs::path& path, const Image& img) { dump(path, format_csv(img)); }

ObservedCounts read_counts_csv(const fs::path& path) {
  return ObservedCounts::from_image(read_csv(path));
}

void write_counts_csv(const fs::path& path, const ObservedCounts& counts) {
  std::string out =
      std::to_string(counts.rows()) + "," + std::to_string(counts.cols()) + "\n";
  for (std::size_t l = 0; l < counts.rows(); ++l) {
    for (std::size_t k = 0; k < counts.cols(); ++k) {
      if (k) out += ',';
      out += std::to_string(counts[l * counts.cols() + k]);
    }
    out += '\n';
  }
  dump(path, out);
}

void write_pgm(const fs::path& path, const Image& img, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("write_pgm: scale must be positive");
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) +
                    "\n" + std::to_string(kPgmMaxval) + "\n";
  out.reserve(out.size() + 2 * img.size());
  for (double v : img.values()) {
    const double level = std::clamp(v / scale, 0.0, 1.0) * kPgmMaxval;
    const auto q = static_cast<std::uint16_t>(std::lround(level));
    out += static_cast<char>(q >> 8);
    out += static_cast<char>(q & 0xff);
  }
  dump(path, out);

  std::string meta = "scale = ";
  append_double(meta, scale);
  meta += '\n';
  dump(fs::path(path.string() + ".meta"), meta);
}

void write_pgm(const fs::path& path, const Image& img) {
  const double mx = img.max();
  write_pgm(path, img, mx > 0.0 ? mx : 1.0);
}

Image read_pgm(const fs::path& path) {
  const std::string data = slurp(path);
  std::size_t pos = 0;
  std::size_t line = 1;
  auto skip_space = [&] {
    while (pos < data.size()) {
      const char c = data[pos];
      if (c == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        if (c == '\n') ++line;
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_token = [&]() -> std::string_view {
    skip_space();
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return std::string_view(data).substr(start, pos - start);
  };
  auto read_uint = [&](const char* what) -> std::size_t {
    const std::size_t start = pos;
    auto tok = read_token();
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size()) {
      throw ParseError(std::string("PGM: invalid ") + what, line, start);
    }
    return v;
  };

  if (read_token() != "P5") throw ParseError("PGM: expected magic 'P5'", 1, 0);
  const std::size_t width = read_uint("width");
  const std::size_t height = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  if (width == 0 || height == 0) throw ParseError("PGM: zero dimension", line, pos);
  if (maxval != static_cast<std::size_t>(kPgmMaxval)) {
    throw ParseError("PGM: only maxval 65535 is supported", line, pos);
  }
  if (pos >= data.size()) throw ParseError("PGM: missing raster", line, pos);
  ++pos;  // single whitespace byte before the raster
  const std::size_t need = 2 * width * height;
  if (data.size() - pos != need) {
    throw ShapeError("PGM: raster holds " + std::to_string(data.size() - pos) +
                     " bytes, header implies " + std::to_string(need));
  }

  double scale = 1.0;
  const fs::path meta_path(path.string() + ".meta");
  if (fs::exists(meta_path)) {
    const std::string meta = slurp(meta_path);
    const auto eq = meta.find('=');
    if (eq == std::string::npos) throw ParseError("PGM meta: expected 'scale = <real>'", 1, 0);
    std::size_t b = eq + 1;
    while (b < meta.size() && meta[b] == ' ') ++b;
    std::size_t e = b;
    while (e < meta.size() && !std::isspace(static_cast<unsigned char>(meta[e]))) ++e;
    auto [p, ec] = std::from_chars(meta.data() + b, meta.data() + e, scale);
    if (b == e || ec != std::errc{} || p != meta.data() + e || !(scale > 0.0)) {
      throw ParseError("PGM meta: invalid scale", 1, b);
    }
  }

  std::vector<double> values(width * height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto hi = static_cast<unsigned char>(data[pos + 2 * i]);
    const auto lo = static_cast<unsigned char>(data[pos + 2 * i + 1]);
    const unsigned q = (hi << 8) | lo;
    values[i] = q == static_cast<unsigned>(kPgmMaxval) ? scale : q * scale / kPgmMaxval;
  }
  return Image(height, width, std::move(values));
}

Image read_image(const fs::path& path) {
  return path.extension() == ".pgm" ? read_pgm(path) : read_csv(path);
}

void write_image(const fs::path& path, const Image& img) {
  if (path.extension() == ".pgm") {
    write_pgm(path, img);
  } else {
    write_csv(path, img);
  }
}

}  // namespace nbtv
