#include "subcash/document.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "subcash/errors.hpp"

namespace subcash {

namespace {

struct RawEntry {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool valid_name(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    }
    return true;
}

const std::set<std::string> kSections{"atoms", "positions", "measures", "envelopes", "bonds", "discounts", "convex"};

// Token stream over a value: words, numbers, bracketed vectors and ';'.
class Tokens {
public:
    Tokens(const std::string& text, std::string where) : where_(std::move(where)) {
        std::size_t i = 0;
        while (i < text.size()) {
            const char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (c == '[') {
                const std::size_t close = text.find(']', i);
                if (close == std::string::npos) fail("unterminated '['");
                items_.push_back(text.substr(i, close - i + 1));
                i = close + 1;
            } else if (c == ';') {
                items_.emplace_back(";");
                ++i;
            } else {
                std::size_t j = i;
                while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '[' &&
                       text[j] != ';')
                    ++j;
                items_.push_back(text.substr(i, j - i));
                i = j;
            }
        }
    }

    bool done() const { return pos_ >= items_.size(); }
    const std::string& peek() const {
        if (done()) fail("unexpected end of value");
        return items_[pos_];
    }
    std::string next() {
        std::string s = peek();
        ++pos_;
        return s;
    }
    bool peek_is_vector() const { return !done() && items_[pos_].front() == '['; }

    double number() { return parse_number(next()); }

    Vector vector() {
        const std::string raw = next();
        if (raw.front() != '[') fail("expected a '[...]' vector, got '" + raw + "'");
        Vector out;
        const std::string body = raw.substr(1, raw.size() - 2);
        if (trim(body).empty()) return out;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item)));
        return out;
    }

    void expect_end() const {
        if (!done()) fail("unexpected trailing token '" + items_[pos_] + "'");
    }
    void expect_word(const std::string& word) {
        const std::string got = next();
        if (got != word) fail("expected '" + word + "', got '" + got + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(where_ + " " + msg); }

private:
    double parse_number(const std::string& s) const {
        double v = 0.0;
        const char* first = s.data();
        const char* last = s.data() + s.size();
        if (!s.empty() && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (s.empty() || ec != std::errc() || ptr != last) fail("malformed number '" + s + "'");
        if (!std::isfinite(v)) fail("non-finite number '" + s + "'");
        return v;
    }

    std::vector<std::string> items_;
    std::size_t pos_ = 0;
    std::string where_;
};

std::vector<RawEntry> split_entries(std::string_view text, const std::string& source) {
    std::vector<RawEntry> out;
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string where = source + ":" + std::to_string(number) + ":";
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError(where + " malformed section header");
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            if (!kSections.count(section)) throw ParseError(where + " unknown section '" + section + "'");
            continue;
        }
        if (section.empty()) throw ParseError(where + " entry outside any section");
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(where + " expected 'key = value'");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!valid_name(key)) throw ParseError(where + " invalid name '" + key + "'");
        if (value.empty()) throw ParseError(where + " missing value for '" + key + "'");
        if (!seen.insert({section, key}).second) throw ParseError(where + " duplicate entry '" + key + "'");
        out.push_back({section, std::move(key), std::move(value), number});
    }
    return out;
}

template <class T>
const T& lookup(const std::map<std::string, T>& table, const std::string& name, const char* what) {
    const auto it = table.find(name);
    if (it == table.end()) throw ValidationError(std::string("unknown ") + what + " '" + name + "'");
    return it->second;
}

class Builder {
public:
    Builder(std::vector<RawEntry> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)) {}

    ScenarioDocument build() {
        std::vector<std::string> labels;
        Vector probs;
        for (const RawEntry& e : entries_) {
            if (e.section != "atoms") continue;
            Tokens t(e.value, where(e));
            const double p = t.number();
            t.expect_end();
            if (p < 0.0) invalid(e, "negative probability for atom '" + e.key + "'");
            labels.push_back(e.key);
            probs.push_back(p);
        }
        if (labels.empty()) throw ValidationError(source_ + ":1: document declares no atoms");
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (std::abs(total - 1.0) > kDocumentProbabilityTol) {
            std::ostringstream msg;
            msg.precision(12);
            msg << source_ << ":" << first_line("atoms") << ": atom probabilities sum to " << total
                << ", not 1";
            throw ValidationError(msg.str());
        }
        for (double& p : probs) p /= total;

        ScenarioDocument doc{source_, ScenarioSpace(labels), ProbabilityWeights(probs), {}, {}, {}, {}, {}, {}};
        n_ = labels.size();

        // Envelopes before convex entries, which may refer to them.
        for (const char* section : {"positions", "measures", "envelopes", "bonds", "discounts", "convex"}) {
            for (const RawEntry& e : entries_) {
                if (e.section != section) continue;
                try {
                    add(doc, e);
                } catch (const ParseError&) {
                    throw;
                } catch (const Error& err) {
                    const std::string msg = err.what();
                    if (msg.rfind(source_ + ":", 0) == 0) throw;
                    invalid(e, msg);
                }
            }
        }
        return doc;
    }

private:
    std::string where(const RawEntry& e) const { return source_ + ":" + std::to_string(e.line) + ":"; }
    [[noreturn]] void invalid(const RawEntry& e, const std::string& msg) const {
        throw ValidationError(where(e) + " " + msg);
    }
    int first_line(const std::string& section) const {
        for (const RawEntry& e : entries_) {
            if (e.section == section) return e.line;
        }
        return 1;
    }

    Vector sized(const RawEntry& e, Vector v) const {
        if (v.size() != n_) {
            invalid(e, "'" + e.key + "' has " + std::to_string(v.size()) + " entries, expected " +
                           std::to_string(n_));
        }
        return v;
    }

    ProbabilityWeights measure_base(const RawEntry& e, Tokens& t, const ScenarioDocument& doc) const {
        if (!t.peek_is_vector()) return doc.baseline;
        Vector q = sized(e, t.vector());
        const double total = std::accumulate(q.begin(), q.end(), 0.0);
        if (std::abs(total - 1.0) > kDocumentProbabilityTol) invalid(e, "measure weights do not sum to 1");
        for (double& w : q) w /= total;
        return ProbabilityWeights(std::move(q));
    }

    RiskMeasureSpec parse_measure(const RawEntry& e, Tokens& t, const ScenarioDocument& doc) const {
        const std::string kind = t.next();
        if (kind == "worst_case") return RiskMeasureSpec::worst_case();
        if (kind == "linear") return RiskMeasureSpec::linear(measure_base(e, t, doc));
        if (kind == "entropic") {
            const double gamma = t.number();
            return RiskMeasureSpec::entropic(measure_base(e, t, doc), gamma);
        }
        if (kind == "robust") {
            std::vector<RobustMember> members;
            while (true) {
                ProbabilityWeights q = measure_base(e, t, doc);
                const double penalty = t.number();
                members.push_back({std::move(q), penalty});
                if (t.done()) break;
                t.expect_word(";");
            }
            return RiskMeasureSpec::robust(std::move(members));
        }
        t.fail("unknown measure kind '" + kind + "'");
    }

    void add(ScenarioDocument& doc, const RawEntry& e) const {
        Tokens t(e.value, where(e));
        if (e.section == "positions") {
            Vector v = sized(e, t.vector());
            t.expect_end();
            doc.positions.emplace(e.key, Position(std::move(v)));
        } else if (e.section == "measures") {
            RiskMeasureSpec spec = parse_measure(e, t, doc);
            t.expect_end();
            doc.measures.emplace(e.key, std::move(spec));
        } else if (e.section == "envelopes") {
            Vector lo, hi;
            if (t.peek_is_vector()) {
                lo = sized(e, t.vector());
                hi = sized(e, t.vector());
            } else {
                lo.assign(n_, t.number());
                hi.assign(n_, t.number());
            }
            t.expect_end();
            doc.envelopes.emplace(e.key, DiscountEnvelope(DiscountFactor(std::move(lo)), DiscountFactor(std::move(hi))));
        } else if (e.section == "bonds") {
            const double price = t.number();
            t.expect_end();
            doc.bonds.emplace(e.key, BondQuote(price));
        } else if (e.section == "discounts") {
            Vector d = t.peek_is_vector() ? sized(e, t.vector()) : Vector(n_, t.number());
            t.expect_end();
            doc.discounts.emplace(e.key, DiscountFactor(std::move(d)));
        } else if (e.section == "convex") {
            const std::string form = t.next();
            if (form == "envelope") {
                const std::string ref = t.next();
                t.expect_end();
                doc.convex.emplace(e.key, ConvexDiscountFunction::from_envelope(doc.envelope(ref)));
            } else if (form == "breakpoints") {
                Vector breaks = t.vector();
                t.expect_word("slopes");
                Vector slopes = t.vector();
                t.expect_end();
                doc.convex.emplace(e.key, ConvexDiscountFunction::uniform(
                                              n_, PiecewiseConvex(std::move(breaks), std::move(slopes))));
            } else {
                t.fail("unknown convex form '" + form + "'");
            }
        }
    }

    std::vector<RawEntry> entries_;
    std::string source_;
    std::size_t n_ = 0;
};

}  // namespace

const Position& ScenarioDocument::position(const std::string& name) const {
    return lookup(positions, name, "position");
}
const RiskMeasureSpec& ScenarioDocument::measure(const std::string& name) const {
    return lookup(measures, name, "measure");
}
const DiscountEnvelope& ScenarioDocument::envelope(const std::string& name) const {
    return lookup(envelopes, name, "envelope");
}
const BondQuote& ScenarioDocument::bond(const std::string& name) const { return lookup(bonds, name, "bond"); }
const DiscountFactor& ScenarioDocument::discount(const std::string& name) const {
    return lookup(discounts, name, "discount factor");
}
const ConvexDiscountFunction& ScenarioDocument::convex_function(const std::string& name) const {
    return lookup(convex, name, "convex discount function");
}

ScenarioDocument parse_scenario(std::string_view text, const std::string& source) {
    return Builder(split_entries(text, source), source).build();
}

ScenarioDocument load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace subcash
