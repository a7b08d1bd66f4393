#pragma once

// Plain-text profile files:
//     <dim> <N>
//     theta_0 value_0
//     ...
//     theta_N value_N
// Surfaces store (n, r), conformal factors store (m, w). Numbers are written
// with 17 significant digits so a write/read cycle is bit-exact.

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hypaf/error.hpp"
#include "hypaf/hypersurface.hpp"

namespace hypaf::io {

/// "%.17g" formatting of a double.
[[nodiscard]] inline std::string format_double(double x)
{
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(len));
}

struct Profile {
    int dim = 0;
    std::vector<double> theta;
    std::vector<double> values;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line_no)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(token) + "'");
    return value;
}

} // namespace detail

[[nodiscard]] inline Profile parse_profile(std::string_view text)
{
    Profile p;
    std::size_t line_no = 0;
    bool header = false;
    int expected = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        if (tokens.size() != 2)
            throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                             std::to_string(tokens.size()));
        if (!header) {
            p.dim = detail::parse_number<int>(tokens[0], line_no);
            expected = detail::parse_number<int>(tokens[1], line_no);
            if (expected < 1) throw ParseError("header: N must be positive");
            header = true;
        } else {
            p.theta.push_back(detail::parse_number<double>(tokens[0], line_no));
            p.values.push_back(detail::parse_number<double>(tokens[1], line_no));
        }
        if (end == text.size()) break;
    }
    if (!header) throw ParseError("empty profile file");
    if (static_cast<int>(p.theta.size()) != expected + 1)
        throw ParseError("expected " + std::to_string(expected + 1) + " data rows, got " + std::to_string(p.theta.size()));
    return p;
}

[[nodiscard]] inline std::string format_profile(const Profile& p)
{
    std::string out = std::to_string(p.dim) + " " + std::to_string(static_cast<int>(p.theta.size()) - 1) + "\n";
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
        out += format_double(p.theta[i]);
        out += ' ';
        out += format_double(p.values[i]);
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never see a partial file.
inline void write_text_atomic(const std::filesystem::path& path, std::string_view content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

[[nodiscard]] inline geom::AxisymmetricHypersurface surface_from_profile(Profile p)
{
    return {p.dim, std::move(p.theta), std::move(p.values)};
}

[[nodiscard]] inline Profile profile_from_surface(const geom::AxisymmetricHypersurface& s)
{
    return {s.n(), {s.theta().begin(), s.theta().end()}, {s.r().begin(), s.r().end()}};
}

[[nodiscard]] inline geom::AxisymmetricHypersurface read_surface(const std::filesystem::path& path)
{
    return surface_from_profile(parse_profile(read_text(path)));
}

inline void write_surface(const std::filesystem::path& path, const geom::AxisymmetricHypersurface& s)
{
    write_text_atomic(path, format_profile(profile_from_surface(s)));
}

} // namespace hypaf::io
