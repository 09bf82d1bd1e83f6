// constants.hpp - fixed physical constants and the key/value constants-file reader
#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mwmix {

using cplx = std::complex<double>;

/// Fixed CODATA values, SI units. Immutable by construction.
struct PhysicalConstants {
    static constexpr double c = 299792458.0;            // m/s
    static constexpr double eps0 = 8.8541878128e-12;    // F/m
    static constexpr double hbar = 1.054571817e-34;     // J s
    static constexpr double k_boltzmann = 1.380649e-23; // J/K
    static constexpr double amu = 1.66053906660e-27;    // kg
};

namespace constants {
inline constexpr double c = PhysicalConstants::c;
inline constexpr double eps0 = PhysicalConstants::eps0;
inline constexpr double hbar = PhysicalConstants::hbar;
inline constexpr double k_boltzmann = PhysicalConstants::k_boltzmann;
inline constexpr double amu = PhysicalConstants::amu;
} // namespace constants

namespace detail {
/// Locale-independent shortest-roundtrip double formatting.
inline std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}
} // namespace detail

/// Flat "key = value" text file with '#' comments. Shared by the run-config
/// loader and the optional atomic-data table.
class KeyValueFile {
  public:
    KeyValueFile() = default;

    static KeyValueFile parse_stream(std::istream& in) {
        KeyValueFile f;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto strip = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r\n");
                if (b == std::string::npos) return std::string{};
                auto e = s.find_last_not_of(" \t\r\n");
                return s.substr(b, e - b + 1);
            };
            std::string t = strip(line);
            if (t.empty()) continue;
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": expected 'key = value', got '" + t + "'");
            std::string key = strip(t.substr(0, eq));
            std::string val = strip(t.substr(eq + 1));
            if (key.empty() || val.empty())
                throw std::runtime_error("line " + std::to_string(lineno) + ": empty key or value");
            if (f.entries_.count(key))
                throw std::runtime_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            f.entries_[key] = val;
        }
        return f;
    }

    static KeyValueFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        try {
            return parse_stream(in);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::string& raw(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw std::runtime_error("missing key '" + key + "'");
        return it->second;
    }

    double number(const std::string& key) const {
        const std::string& s = raw(key);
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (...) {
            throw std::runtime_error("key '" + key + "': not a number: '" + s + "'");
        }
        if (pos != s.size())
            throw std::runtime_error("key '" + key + "': trailing junk in '" + s + "'");
        return v;
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

} // namespace mwmix
