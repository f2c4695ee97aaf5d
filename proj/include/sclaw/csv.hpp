#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sclaw {

// Shortest decimal representation that round-trips the exact double.  Keeps
// CSV output compact and makes reruns byte-comparable.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {
inline std::string to_cell(double v) { return format_double(v); }
inline std::string to_cell(int v) { return std::to_string(v); }
inline std::string to_cell(long v) { return std::to_string(v); }
inline std::string to_cell(std::uint64_t v) { return std::to_string(v); }
inline std::string to_cell(const std::string& v) { return v; }
inline std::string to_cell(const char* v) { return v; }
}  // namespace detail

// Minimal CSV emitter: header row on construction, then one row() call per
// record.  No quoting support -- all producers in this project write plain
// numeric or identifier cells.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) {
        out_.open(path);
        if (!out_)
            throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
        out_ << header << '\n';
    }

    template <class... Ts>
    void row(const Ts&... cells) {
        std::string line;
        bool first = true;
        // fold over the cells, comma-separating
        auto append = [&](const std::string& s) {
            if (!first) line += ',';
            first = false;
            line += s;
        };
        (append(detail::to_cell(cells)), ...);
        out_ << line << '\n';
    }

    void raw_row(const std::string& line) { out_ << line << '\n'; }

    void close() { out_.close(); }

  private:
    std::ofstream out_;
};

}  // namespace sclaw
