#pragma once

// Line-oriented spec files:
//
//   [manifold]
//   name = kaehler_r4
//   dim = 4
//   mu = +1
//   domain = [-1,1] [-1,1] [-1,1] [-1,1]
//   metric = row("1","0","0","0") ...
//   affinor = row("0","-1","0","0") ...     # rows are F^i_.
//
//   [submanifold]
//   name = flat_cr
//   dim = 3
//   domain = [-1,1] [-1,1] [-1,1]
//   embedding = "u1" "u2" "u3" "0"
//   frame_D = row("1","0","0") row("0","1","0")   # optional
//
// Ambient expressions use x1..xm, submanifold expressions u1..un.

#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "affinor/submanifold.hpp"

namespace affinor {

/// Format error in a spec file; carries the 1-based line number (0 if none).
class SpecError : public std::runtime_error {
public:
    SpecError(std::size_t line, const std::string& message)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct SpecDocument {
    std::shared_ptr<const ManifoldSpec> manifold;  // null if the file has no [manifold] section
    std::optional<SubmanifoldSpec> submanifold;
};

namespace detail {

struct RawValue {
    std::string text;
    std::size_t line = 0;
};

using RawSection = std::map<std::string, RawValue>;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

/// Cursor over one value string.
class ValueReader {
public:
    ValueReader(const RawValue& v) : s_(v.text), line_(v.line) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= s_.size();
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    bool accept_word(std::string_view w) {
        skip_ws();
        if (s_.compare(pos_, w.size(), w) == 0) {
            pos_ += w.size();
            return true;
        }
        return false;
    }
    std::string quoted() {
        expect('"');
        const auto end = s_.find('"', pos_);
        if (end == std::string::npos) fail("unterminated string");
        std::string out = s_.substr(pos_, end - pos_);
        pos_ = end + 1;
        return out;
    }
    std::string until_any(std::string_view stops) {
        skip_ws();
        const auto end = s_.find_first_of(stops, pos_);
        if (end == std::string::npos) fail("unexpected end of value");
        std::string out = trim(std::string_view(s_).substr(pos_, end - pos_));
        pos_ = end;
        return out;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw SpecError(line_, what + " at column " + std::to_string(pos_ + 1));
    }
    std::size_t line() const { return line_; }

private:
    std::string s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

inline Expression parse_at(const std::string& src, std::size_t arity, char var, std::size_t line) {
    try {
        return parse(src, arity, var);
    } catch (const ParseError& e) {
        throw SpecError(line, "in expression \"" + src + "\": " + e.what());
    }
}

inline int parse_int(const RawValue& v, const std::string& key) {
    std::string t = v.text;
    if (!t.empty() && t[0] == '+') t.erase(0, 1);
    int out = 0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{} || end != t.data() + t.size()) throw SpecError(v.line, key + " must be an integer");
    return out;
}

inline double parse_bound(const std::string& src, std::size_t line) {
    Expression e = parse_at(src, 0, 'x', line);
    try {
        return evaluate(e, Vec());
    } catch (const std::exception& ex) {
        throw SpecError(line, "domain bound \"" + src + "\": " + ex.what());
    }
}

inline Domain parse_domain(const RawValue& v) {
    ValueReader r(v);
    Domain d;
    while (!r.done()) {
        r.expect('[');
        const std::string lo = r.until_any(",");
        r.expect(',');
        const std::string hi = r.until_any("]");
        r.expect(']');
        d.push_back({parse_bound(lo, v.line), parse_bound(hi, v.line)});
        if (!(d.back().hi > d.back().lo)) throw SpecError(v.line, "domain intervals must have positive length");
    }
    return d;
}

inline std::vector<std::vector<std::string>> parse_rows(const RawValue& v) {
    ValueReader r(v);
    std::vector<std::vector<std::string>> rows;
    while (!r.done()) {
        if (!r.accept_word("row")) r.fail("expected row(...)");
        r.expect('(');
        std::vector<std::string> row;
        if (!r.peek(')')) {
            row.push_back(r.quoted());
            while (r.peek(',')) {
                r.expect(',');
                row.push_back(r.quoted());
            }
        }
        r.expect(')');
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<std::string> parse_strings(const RawValue& v) {
    ValueReader r(v);
    std::vector<std::string> out;
    while (!r.done()) out.push_back(r.quoted());
    return out;
}

inline const RawValue& require_key(const RawSection& s, const std::string& key, const std::string& section,
                                   std::size_t header_line) {
    auto it = s.find(key);
    if (it == s.end()) throw SpecError(header_line, "[" + section + "] is missing '" + key + "'");
    return it->second;
}

inline std::vector<Expression> square_matrix(const RawValue& v, int dim, const std::string& key) {
    const auto rows = parse_rows(v);
    if (rows.size() != static_cast<std::size_t>(dim))
        throw SpecError(v.line, key + " must have " + std::to_string(dim) + " rows");
    std::vector<Expression> out;
    for (const auto& row : rows) {
        if (row.size() != static_cast<std::size_t>(dim))
            throw SpecError(v.line, key + " rows must have " + std::to_string(dim) + " entries");
        for (const auto& e : row) out.push_back(parse_at(e, static_cast<std::size_t>(dim), 'x', v.line));
    }
    return out;
}

inline void check_keys(const RawSection& s, std::initializer_list<std::string_view> allowed, const std::string& section) {
    for (const auto& [k, v] : s) {
        bool ok = false;
        for (auto a : allowed) ok = ok || a == k;
        if (!ok) throw SpecError(v.line, "unknown key '" + k + "' in [" + section + "]");
    }
}

}  // namespace detail

/// Parse spec text. A [submanifold] section attaches to the [manifold] in the
/// same text, or to `ambient` when the text has none.
inline SpecDocument parse_spec(const std::string& text, std::shared_ptr<const ManifoldSpec> ambient = nullptr,
                               int probes = 10) {
    std::map<std::string, std::pair<detail::RawSection, std::size_t>> sections;
    std::string current;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw SpecError(line_no, "malformed section header");
            current = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (current != "manifold" && current != "submanifold")
                throw SpecError(line_no, "unknown section [" + current + "]");
            if (sections.count(current)) throw SpecError(line_no, "duplicate section [" + current + "]");
            sections[current].second = line_no;
            continue;
        }
        if (current.empty()) throw SpecError(line_no, "key outside of a section");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SpecError(line_no, "expected 'key = value'");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        auto& sec = sections[current].first;
        if (sec.count(key)) throw SpecError(line_no, "duplicate key '" + key + "'");
        sec[key] = {detail::trim(std::string_view(line).substr(eq + 1)), line_no};
    }
    if (sections.empty()) throw SpecError(0, "spec has no [manifold] or [submanifold] section");

    SpecDocument doc;
    if (auto it = sections.find("manifold"); it != sections.end()) {
        const auto& [s, header] = it->second;
        detail::check_keys(s, {"name", "dim", "mu", "domain", "metric", "affinor"}, "manifold");
        auto M = std::make_shared<ManifoldSpec>();
        M->name = s.count("name") ? s.at("name").text : "";
        const auto& dim_v = detail::require_key(s, "dim", "manifold", header);
        M->dim = detail::parse_int(dim_v, "dim");
        if (M->dim <= 0) throw SpecError(dim_v.line, "dim must be positive");
        const auto& mu_v = detail::require_key(s, "mu", "manifold", header);
        M->mu = detail::parse_int(mu_v, "mu");
        if (M->mu != 1 && M->mu != -1) throw SpecError(mu_v.line, "mu must be -1 or +1");
        M->domain = detail::parse_domain(detail::require_key(s, "domain", "manifold", header));
        M->metric = detail::square_matrix(detail::require_key(s, "metric", "manifold", header), M->dim, "metric");
        M->affinor = detail::square_matrix(detail::require_key(s, "affinor", "manifold", header), M->dim, "affinor");
        validate_manifold(*M, probes);
        doc.manifold = M;
        ambient = M;
    }
    if (auto it = sections.find("submanifold"); it != sections.end()) {
        const auto& [s, header] = it->second;
        detail::check_keys(s, {"name", "dim", "domain", "embedding", "frame_D"}, "submanifold");
        if (!ambient) throw SpecError(header, "[submanifold] needs an ambient [manifold]");
        SubmanifoldSpec S;
        S.name = s.count("name") ? s.at("name").text : "";
        S.ambient = ambient;
        const auto& dim_v = detail::require_key(s, "dim", "submanifold", header);
        S.dim = detail::parse_int(dim_v, "dim");
        if (S.dim <= 0 || S.dim >= ambient->dim) throw SpecError(dim_v.line, "submanifold dim must satisfy 0 < n < m");
        const auto n = static_cast<std::size_t>(S.dim);
        S.domain = detail::parse_domain(detail::require_key(s, "domain", "submanifold", header));
        const auto& emb = detail::require_key(s, "embedding", "submanifold", header);
        for (const auto& e : detail::parse_strings(emb)) S.embedding.push_back(detail::parse_at(e, n, 'u', emb.line));
        if (S.embedding.size() != static_cast<std::size_t>(ambient->dim))
            throw SpecError(emb.line, "embedding must have " + std::to_string(ambient->dim) + " components");
        if (auto f = s.find("frame_D"); f != s.end()) {
            for (const auto& row : detail::parse_rows(f->second)) {
                if (row.size() != n) throw SpecError(f->second.line, "frame_D rows must have " + std::to_string(n) + " entries");
                std::vector<Expression> r;
                for (const auto& e : row) r.push_back(detail::parse_at(e, n, 'u', f->second.line));
                S.frame_D.push_back(std::move(r));
            }
        }
        validate_submanifold(S, probes);
        doc.submanifold = std::move(S);
    }
    return doc;
}

inline SpecDocument load_spec(const std::string& path, std::shared_ptr<const ManifoldSpec> ambient = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError(0, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str(), std::move(ambient));
}

namespace detail {

inline std::string domain_text(const Domain& d) {
    std::string out;
    for (const auto& iv : d) out += (out.empty() ? "" : " ") + ("[" + format_real(iv.lo) + "," + format_real(iv.hi) + "]");
    return out;
}

inline std::string rows_text(const std::vector<Expression>& flat, std::size_t cols) {
    std::string out;
    for (std::size_t i = 0; i < flat.size(); i += cols) {
        out += out.empty() ? "row(" : " row(";
        for (std::size_t j = 0; j < cols; ++j) out += (j ? ",\"" : "\"") + flat[i + j].to_string() + "\"";
        out += ")";
    }
    return out;
}

}  // namespace detail

inline std::string format_manifold(const ManifoldSpec& M) {
    const auto m = static_cast<std::size_t>(M.dim);
    std::string out = "[manifold]\n";
    out += "name = " + M.name + "\n";
    out += "dim = " + std::to_string(M.dim) + "\n";
    out += std::string("mu = ") + (M.mu > 0 ? "+1" : "-1") + "\n";
    out += "domain = " + detail::domain_text(M.domain) + "\n";
    out += "metric = " + detail::rows_text(M.metric, m) + "\n";
    out += "affinor = " + detail::rows_text(M.affinor, m) + "\n";
    return out;
}

inline std::string format_submanifold(const SubmanifoldSpec& S) {
    std::string out = "[submanifold]\n";
    out += "name = " + S.name + "\n";
    out += "dim = " + std::to_string(S.dim) + "\n";
    out += "domain = " + detail::domain_text(S.domain) + "\n";
    out += "embedding =";
    for (const auto& e : S.embedding) out += " \"" + e.to_string() + "\"";
    out += "\n";
    if (!S.frame_D.empty()) {
        std::vector<Expression> flat;
        for (const auto& r : S.frame_D) flat.insert(flat.end(), r.begin(), r.end());
        out += "frame_D = " + detail::rows_text(flat, static_cast<std::size_t>(S.dim)) + "\n";
    }
    return out;
}

inline std::string format_spec(const ManifoldSpec& M, const SubmanifoldSpec* S = nullptr) {
    std::string out = format_manifold(M);
    if (S) out += "\n" + format_submanifold(*S);
    return out;
}

inline void save_spec(const std::string& path, const ManifoldSpec& M, const SubmanifoldSpec* S = nullptr) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError(0, "cannot write '" + path + "'");
    out << format_spec(M, S);
    if (!out) throw SpecError(0, "write to '" + path + "' failed");
}

/// Structural equality: same names, sizes, domains and printed expressions.
inline bool same_spec(const ManifoldSpec& a, const ManifoldSpec& b) { return format_manifold(a) == format_manifold(b); }
inline bool same_spec(const SubmanifoldSpec& a, const SubmanifoldSpec& b) {
    return format_submanifold(a) == format_submanifold(b) && same_spec(a.M(), b.M());
}

}  // namespace affinor
