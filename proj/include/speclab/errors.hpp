#pragma once

#include <stdexcept>
#include <string>

namespace speclab {

// Input or contract violation; the CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to reach its required accuracy; CLI exit code 3.
class accuracy_error : public std::runtime_error {
public:
    explicit accuracy_error(const std::string& what) : std::runtime_error(what) {}
};

// Signal, not failure: the queried point sits on the symbol curve, so a
// winding number is undefined there. spectrum_classify turns this into OnCurve.
class on_curve_error : public std::runtime_error {
public:
    explicit on_curve_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace speclab
