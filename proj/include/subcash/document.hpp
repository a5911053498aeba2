#pragma once

// Plain-text scenario documents:
//
//   # comment
//   [atoms]
//   up = 0.5
//   down = 0.5
//   [positions]
//   X = [-10, 20]
//   [measures]
//   linP = linear                 # base = atom probabilities
//   ent = entropic 2.0 [0.3, 0.7]
//   rob = robust [0.5, 0.5] 0 ; [0.2, 0.8] 1.5
//   [envelopes]
//   e = 0.9 1.0                   # or [lo, ...] [hi, ...]
//   [bonds]
//   B = 0.9
//   [discounts]
//   D = [0.9, 0.9]
//   [convex]
//   V = breakpoints [0] slopes [-1, -0.9]
//   W = envelope e

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "subcash/cash_additive.hpp"
#include "subcash/spot_forward.hpp"
#include "subcash/subadditive.hpp"

namespace subcash {

/// Atom probabilities may be off by this much; they are then renormalized.
inline constexpr double kDocumentProbabilityTol = 1e-9;

struct ScenarioDocument {
    std::string source;
    ScenarioSpace atoms;
    ProbabilityWeights baseline;
    std::map<std::string, Position> positions;
    std::map<std::string, RiskMeasureSpec> measures;
    std::map<std::string, DiscountEnvelope> envelopes;
    std::map<std::string, BondQuote> bonds;
    std::map<std::string, DiscountFactor> discounts;
    std::map<std::string, ConvexDiscountFunction> convex;

    std::size_t size() const noexcept { return atoms.size(); }

    // Lookups throw ValidationError naming the missing entry.
    const Position& position(const std::string& name) const;
    const RiskMeasureSpec& measure(const std::string& name) const;
    const DiscountEnvelope& envelope(const std::string& name) const;
    const BondQuote& bond(const std::string& name) const;
    const DiscountFactor& discount(const std::string& name) const;
    const ConvexDiscountFunction& convex_function(const std::string& name) const;
};

/// Throws ParseError for malformed text and ValidationError for violated
/// invariants; both messages start with "<source>:<line>:".
ScenarioDocument parse_scenario(std::string_view text, const std::string& source = "<memory>");

/// Reads and parses a file; an unreadable file is a ParseError.
ScenarioDocument load_scenario(const std::string& path);

/// 64-bit FNV-1a, used for report digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace subcash
