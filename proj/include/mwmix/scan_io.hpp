// scan_io.hpp - locale-independent CSV emission for scan rows and the derived
// JSON summary. Every number in the summary is recomputed from the rows.
#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mwmix/propagation.hpp"

namespace mwmix {

namespace detail {
inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}
} // namespace detail

inline const char* spectrum_csv_header() {
    return "omega0_rad_s,gain_slot1_db,gain_slot2_db,gain_slot3_db,gain_slot4_db,sigma_min,"
           "oscillating,error";
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumPoint>& rows) {
    os << spectrum_csv_header() << "\n";
    for (const auto& r : rows) {
        os << detail::format_double(r.omega0);
        for (int m = 0; m < 4; ++m) os << "," << detail::format_double(r.gain_db[m]);
        os << "," << detail::format_double(r.sigma_min);
        os << "," << (r.oscillating ? 1 : 0);
        os << "," << detail::csv_quote(r.error);
        os << "\n";
    }
}

/// Summary derived purely from the rows: peak gains per slot, oscillating
/// points, and the sigma_min minimum.
inline nlohmann::json spectrum_summary(const std::vector<SpectrumPoint>& rows) {
    nlohmann::json j;
    j["points"] = rows.size();
    int failures = 0;
    for (const auto& r : rows) failures += r.error.empty() ? 0 : 1;
    j["failed_points"] = failures;

    nlohmann::json peaks = nlohmann::json::array();
    for (int m = 0; m < 4; ++m) {
        const SpectrumPoint* best = nullptr;
        for (const auto& r : rows)
            if (r.error.empty() && (!best || r.gain_db[m] > best->gain_db[m])) best = &r;
        nlohmann::json p;
        p["slot"] = m + 1;
        if (best) {
            p["peak_gain_db"] = best->gain_db[m];
            p["omega0_rad_s"] = best->omega0;
        }
        peaks.push_back(p);
    }
    j["peak_gains"] = peaks;

    const SpectrumPoint* dip = nullptr;
    nlohmann::json osc = nlohmann::json::array();
    for (const auto& r : rows) {
        if (!r.error.empty()) continue;
        if (!dip || r.sigma_min < dip->sigma_min) dip = &r;
        if (r.oscillating) osc.push_back(r.omega0);
    }
    if (dip) {
        j["sigma_min_minimum"] = dip->sigma_min;
        j["sigma_min_minimum_omega0_rad_s"] = dip->omega0;
    }
    j["oscillating_omega0_rad_s"] = osc;
    j["threshold_crossings"] = osc.size();
    return j;
}

} // namespace mwmix
