#pragma once

#include <stdexcept>
#include <string>

namespace dcg {

// Base class for all library errors so callers can catch dcg::Error
// when they do not care about the specific failure.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- linear algebra ----

struct SingularMatrix final : Error {
    using Error::Error;
};

struct ZeroDiagonal final : Error {
    using Error::Error;
};

// Power iteration ran out of iterations. Carries the best estimate seen,
// e.g. for spectra with an equal-magnitude complex pair.
struct NoConvergence final : Error {
    double best_estimate;
    NoConvergence(const std::string& msg, double best)
        : Error(msg), best_estimate(best) {}
};

struct OutOfDomain final : Error {
    using Error::Error;
};

struct NotSymmetric final : Error {
    using Error::Error;
};

struct NotPositiveDefinite final : Error {
    using Error::Error;
};

// ---- network ----

struct Disconnected final : Error {
    using Error::Error;
};

// ---- simulator ----

struct NonNeighborSend final : Error {
    using Error::Error;
};

// ---- solver protocol ----

struct InconsistentShare final : Error {
    using Error::Error;
};

struct Incomplete final : Error {
    using Error::Error;
};

struct MissingNeighborState final : Error {
    using Error::Error;
};

struct ZeroPrevResidual final : Error {
    using Error::Error;
};

struct ZeroCurvature final : Error {
    using Error::Error;
};

struct DivergenceDetected final : Error {
    using Error::Error;
};

// ---- applications ----

struct SparsityViolation final : Error {
    using Error::Error;
};

struct DegenerateGeometry final : Error {
    using Error::Error;
};

struct InsufficientNeighbors final : Error {
    using Error::Error;
};

// ---- experiment harness ----

struct IoError final : Error {
    using Error::Error;
};

struct DisconnectedNetwork final : Error {
    using Error::Error;
};

}  // namespace dcg
