#pragma once

#include <stdexcept>
#include <string>

namespace rpcsde {

// Configuration / input validation problems (CLI exit code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct dimension_error : config_error {
    explicit dimension_error(const std::string& what) : config_error(what) {}
};

struct degree_error : config_error {
    explicit degree_error(const std::string& what) : config_error(what) {}
};

// Numerical failures during a run (CLI exit code 3).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Hankel / inner-product matrix lost positive definiteness.
struct singular_hankel_error : numeric_error {
    singular_hankel_error(std::size_t pivot_index_, double pivot_value_, const std::string& what)
        : numeric_error(what), pivot_index(pivot_index_), pivot_value(pivot_value_) {}
    std::size_t pivot_index;
    double pivot_value;
};

// A triple-product lookup escaped the restricted index set.
struct closure_error : std::logic_error {
    explicit closure_error(const std::string& what) : std::logic_error(what) {}
};

struct diverged_path_error : numeric_error {
    diverged_path_error(std::size_t path_, double time_, const std::string& what)
        : numeric_error(what), path(path_), time(time_) {}
    std::size_t path;
    double time;
};

}  // namespace rpcsde
