// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace annot {

inline constexpr std::string_view kSubClassOf = "rdfs:subClassOf";
inline constexpr std::string_view kRdfType = "rdf:type";

// Namespace holding the predicates materialized by substitution-block rules.
inline constexpr std::string_view kDerivedNamespace = "&SANS;";

inline bool is_reserved_predicate(std::string_view p) { return p == kSubClassOf || p == kRdfType; }

// A name of the form "&NS;Local".
struct QName {
    std::string prefix;  // "&NS;"
    std::string local;

    std::string str() const { return prefix + local; }
};

inline std::optional<QName> split_qname(std::string_view name) {
    if (name.size() < 3 || name.front() != '&') return std::nullopt;
    auto semi = name.find(';');
    if (semi == std::string_view::npos || semi < 2 || semi + 1 >= name.size()) return std::nullopt;
    return QName{std::string(name.substr(0, semi + 1)), std::string(name.substr(semi + 1))};
}

inline bool is_qualified(std::string_view name) { return split_qname(name).has_value(); }

// "AIPL" -> "&AIPL;"; already-wrapped prefixes pass through.
inline std::string make_prefix(std::string_view ns) {
    if (ns.size() >= 2 && ns.front() == '&' && ns.back() == ';') return std::string(ns);
    return "&" + std::string(ns) + ";";
}

inline std::string local_name(std::string_view name) {
    if (auto q = split_qname(name)) return q->local;
    return std::string(name);
}

inline std::string prefix_of(std::string_view name) {
    if (auto q = split_qname(name)) return q->prefix;
    return {};
}

// Orders embedded digit runs numerically so that "e2" < "e10".
inline bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            auto ra = a.substr(i, ie - i), rb = b.substr(j, je - j);
            while (ra.size() > 1 && ra.front() == '0') ra.remove_prefix(1);
            while (rb.size() > 1 && rb.front() == '0') rb.remove_prefix(1);
            if (ra.size() != rb.size()) return ra.size() < rb.size();
            if (ra != rb) return ra < rb;
            i = ie;
            j = je;
            continue;
        }
        if (a[i] != b[j]) return a[i] < b[j];
        ++i;
        ++j;
    }
    if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
    return a < b;
}

struct NaturalLess {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const { return natural_less(a, b); }
};

}  // namespace annot
