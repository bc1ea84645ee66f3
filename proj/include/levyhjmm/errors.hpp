#pragma once

#include <stdexcept>
#include <string>

namespace levyhjmm {

/// Argument left the domain of the cumulant generating function.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// A required moment of the jump measure is not finite (or overflowed).
class MomentError : public std::runtime_error {
public:
    explicit MomentError(const std::string& what) : std::runtime_error(what) {}
};

/// Projection basis is numerically rank-deficient.
class DegenerateBasis : public std::runtime_error {
public:
    explicit DegenerateBasis(const std::string& what) : std::runtime_error(what) {}
};

/// Basis is not invariant under d/dx within tolerance.
class NotInvariant : public std::runtime_error {
public:
    explicit NotInvariant(const std::string& what) : std::runtime_error(what) {}
};

/// Reduced simulation requested but no affine realization exists.
class NoRealization : public std::runtime_error {
public:
    explicit NoRealization(const std::string& what) : std::runtime_error(what) {}
};

/// A simulated curve exceeded the overflow guard.
class NumericsError : public std::runtime_error {
public:
    explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the representable range (e.g. maturity beyond the grid).
class RangeError : public std::runtime_error {
public:
    explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

/// Truncation radius violates the witness-point hypothesis.
class RadiusError : public std::runtime_error {
public:
    explicit RadiusError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace levyhjmm
