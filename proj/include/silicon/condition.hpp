#pragma once
// One cell of the chatbot x prompt-variant x temperature factorial.

#include <compare>
#include <cstdio>
#include <string>

#include "silicon/prompt.hpp"

namespace silicon {

// Canonical temperature text used in keys and CSV cells ("0", "0.5").
inline std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

struct Condition {
    std::string chatbot;
    VariantId variant = VariantId::P_BR;
    double temperature = 0.0;

    std::string key() const {
        return chatbot + "|" + to_string(variant) + "|" +
               format_temperature(temperature);
    }

    friend bool operator==(const Condition&, const Condition&) = default;
};

}  // namespace silicon
