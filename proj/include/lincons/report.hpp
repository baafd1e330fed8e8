#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace lincons {

/// Clause-by-clause result of a structural check. Checks of this kind never
/// throw on a failed clause; they record it and let the caller decide.
struct CheckReport {
    struct Clause {
        std::string name;
        bool pass = false;
        std::string detail;
    };

    std::vector<Clause> clauses;

    void add(std::string name, bool pass, std::string detail = "") {
        clauses.push_back({std::move(name), pass, std::move(detail)});
    }

    [[nodiscard]] bool pass() const {
        return std::all_of(clauses.begin(), clauses.end(),
                           [](const Clause& c) { return c.pass; });
    }

    [[nodiscard]] const Clause* first_failure() const {
        for (const auto& c : clauses)
            if (!c.pass) return &c;
        return nullptr;
    }

    /// One line per clause, "[ok]/[FAIL] name: detail".
    [[nodiscard]] std::string summary() const {
        std::ostringstream out;
        for (const auto& c : clauses) {
            out << (c.pass ? "[ok]   " : "[FAIL] ") << c.name;
            if (!c.detail.empty()) out << ": " << c.detail;
            out << '\n';
        }
        return out.str();
    }
};

}  // namespace lincons
