// level_scheme.hpp - which field couples which transition of the double-Lambda
// system, with relative dipole weights. Levels: b, c (ground pair) and a, a'
// (excited). The six field slots are the two drives plus the four sidebands.
#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mwmix/types.hpp"

namespace mwmix {

enum FieldSlot : int {
    SLOT_DRIVE_F = 0,
    SLOT_DRIVE_B = 1,
    SLOT_S1 = 2, // forward anti-Stokes
    SLOT_S2 = 3, // backward anti-Stokes
    SLOT_S3 = 4, // forward Stokes
    SLOT_S4 = 5, // backward Stokes
};

struct SchemeCoupling {
    int slot;       // FieldSlot
    int transition; // Transition
    double weight;  // relative dipole weight, >= 0
};

/// Reference transition of each slot: sets the slot's dipole scale and the
/// eta used for it (slot 1 -> b-a, slot 4 -> c-a', drives on their primary
/// legs).
inline constexpr std::array<int, 6> slot_reference_transition = {TR_CA, TR_BAP, TR_BA,
                                                                 TR_BAP, TR_CA, TR_CAP};

struct LevelScheme {
    std::vector<SchemeCoupling> couplings;
    bool degenerate_excited = false;     // alias a' onto a; weights add
    bool drives_couple_both_grounds = true;

    /// The Fig.-2-style configuration: forward drive near c->a (D1 line),
    /// backward drive near b->a' (D2), each sideband on both ground legs of
    /// its native excited level.
    static LevelScheme standard(bool both_grounds = true) {
        LevelScheme s;
        s.drives_couple_both_grounds = both_grounds;
        s.couplings = {
            {SLOT_DRIVE_F, TR_CA, 1.0},
            {SLOT_DRIVE_B, TR_BAP, 1.0},
            {SLOT_S1, TR_BA, 1.0},
            {SLOT_S2, TR_BAP, 1.0},
            {SLOT_S3, TR_CA, 1.0},
            {SLOT_S4, TR_CAP, 1.0},
        };
        if (both_grounds) {
            s.couplings.push_back({SLOT_DRIVE_F, TR_BA, 1.0});
            s.couplings.push_back({SLOT_DRIVE_B, TR_CAP, 1.0});
            s.couplings.push_back({SLOT_S1, TR_CA, 1.0});
            s.couplings.push_back({SLOT_S2, TR_CAP, 1.0});
            s.couplings.push_back({SLOT_S3, TR_BA, 1.0});
            s.couplings.push_back({SLOT_S4, TR_BAP, 1.0});
        }
        return s;
    }

    /// Single-leg truncation: each field on exactly one transition. This is
    /// the configuration of the closed-form two-field analysis.
    static LevelScheme reduced_pair() { return standard(false); }

    std::vector<SchemeCoupling> slot_couplings(int slot) const {
        std::vector<SchemeCoupling> out;
        for (const auto& c : couplings)
            if (c.slot == slot && c.weight != 0) out.push_back(c);
        return out;
    }

    void validate() const {
        for (const auto& c : couplings) {
            detail::require(c.slot >= 0 && c.slot < 6, "coupling slot out of range");
            detail::require(c.transition >= 0 && c.transition < 4,
                            "coupling transition out of range");
            detail::require(std::isfinite(c.weight) && c.weight >= 0,
                            "coupling weight must be finite and >= 0");
        }
        for (int slot : {SLOT_S1, SLOT_S2, SLOT_S3, SLOT_S4})
            detail::require(!slot_couplings(slot).empty(),
                            "sideband slot " + std::to_string(slot - SLOT_S1 + 1) +
                                " must couple at least one transition");
        if (drives_couple_both_grounds) {
            for (int slot : {SLOT_DRIVE_F, SLOT_DRIVE_B}) {
                bool from_b = false, from_c = false;
                for (const auto& c : slot_couplings(slot)) {
                    if (transition_lower(c.transition) == 0) from_b = true;
                    if (transition_lower(c.transition) == 1) from_c = true;
                }
                detail::require(from_b && from_c,
                                "both-grounds mode: each drive must couple both ground states");
            }
        }
    }

    std::string serialize() const {
        static const char* slot_name[6] = {"drive_f", "drive_b", "s1", "s2", "s3", "s4"};
        static const char* tr_name[4] = {"ba", "ca", "bap", "cap"};
        std::ostringstream os;
        os << "# mwmix level scheme\n";
        os << "degenerate_excited = " << (degenerate_excited ? "true" : "false") << "\n";
        os << "drives_couple_both_grounds = " << (drives_couple_both_grounds ? "true" : "false")
           << "\n";
        for (const auto& c : couplings)
            os << "couple " << slot_name[c.slot] << " " << tr_name[c.transition] << " "
               << c.weight << "\n";
        return os.str();
    }

    static LevelScheme parse(std::istream& in) {
        LevelScheme s;
        s.couplings.clear();
        s.drives_couple_both_grounds = false;
        std::string line;
        int lineno = 0;
        auto fail = [&](const std::string& msg) {
            throw std::runtime_error("level scheme line " + std::to_string(lineno) + ": " + msg);
        };
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream is(line);
            std::string tok;
            if (!(is >> tok)) continue;
            if (tok == "couple") {
                std::string slot, tr;
                double w;
                if (!(is >> slot >> tr >> w)) fail("expected 'couple <slot> <transition> <weight>'");
                int si = slot == "drive_f"  ? SLOT_DRIVE_F
                         : slot == "drive_b" ? SLOT_DRIVE_B
                         : slot == "s1"      ? SLOT_S1
                         : slot == "s2"      ? SLOT_S2
                         : slot == "s3"      ? SLOT_S3
                         : slot == "s4"      ? SLOT_S4
                                             : -1;
                if (si < 0) fail("unknown slot '" + slot + "'");
                int ti = tr == "ba" ? TR_BA : tr == "ca" ? TR_CA : tr == "bap" ? TR_BAP
                         : tr == "cap" ? TR_CAP : -1;
                if (ti < 0) fail("unknown transition '" + tr + "'");
                s.couplings.push_back({si, ti, w});
            } else if (tok == "degenerate_excited" || tok == "drives_couple_both_grounds") {
                std::string eq, val;
                if (!(is >> eq >> val) || eq != "=") fail("expected '" + tok + " = <bool>'");
                bool b = (val == "true" || val == "1");
                if (!b && val != "false" && val != "0") fail("expected boolean, got '" + val + "'");
                (tok == "degenerate_excited" ? s.degenerate_excited
                                             : s.drives_couple_both_grounds) = b;
            } else {
                fail("unknown directive '" + tok + "'");
            }
        }
        s.validate();
        return s;
    }

    static LevelScheme load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open level scheme file '" + path + "'");
        return parse(in);
    }
};

} // namespace mwmix
