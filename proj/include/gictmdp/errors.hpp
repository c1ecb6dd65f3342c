#pragma once

#include <stdexcept>
#include <string>

namespace gictmdp {

/// Input failed model/policy validation. `report()` in model.hpp gives details.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class NotFoundError : public std::runtime_error {
public:
    explicit NotFoundError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver hit its iteration budget. Callers may retrieve the
/// partial result from the owning operation's exception subclass.
class UnconvergedError : public std::runtime_error {
public:
    UnconvergedError(const std::string& what, int iterations)
        : std::runtime_error(what), iterations(iterations) {}
    int iterations;
};

/// Kernel series failed to contract (all mass stuck on zero-rate gradual actions).
class DivergesError : public std::runtime_error {
public:
    DivergesError(const std::string& what, int state) : std::runtime_error(what), state(state) {}
    int state;
};

class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Closed cycle of zero-time impulses with positive cost: the total cost is
/// infinite while time does not advance.
class ZenoDetected : public std::runtime_error {
public:
    explicit ZenoDetected(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gictmdp
