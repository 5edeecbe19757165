#pragma once

#include <stdexcept>
#include <string>

namespace silicon {

// Bad or missing configuration: unknown encoding ids, absent RAI weights,
// unreadable resource files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural misuse of an operation: mismatched respondent sets, an
// unbalanced ANOVA design, a corrupt run store.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace silicon
