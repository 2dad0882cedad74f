#pragma once

#include <stdexcept>
#include <string>

namespace bz {

// Root of the library's exception hierarchy. Everything thrown on a
// contract violation or an analytic failure derives from Error, so
// callers can catch categories or the whole family.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- specification front-end -------------------------------------------

struct SyntaxError : Error {
    int line = 0, col = 0;
    SyntaxError(const std::string& msg, int l, int c)
        : Error(msg + " (line " + std::to_string(l) + ", col " + std::to_string(c) + ")"),
          line(l), col(c) {}
    explicit SyntaxError(const std::string& msg) : Error(msg) {}
};

struct UnknownName : Error {
    std::string name;
    explicit UnknownName(const std::string& n)
        : Error("unknown class name: " + n), name(n) {}
};

struct IllFounded : Error {
    std::string class_name;
    IllFounded(const std::string& cls, const std::string& reason)
        : Error("ill-founded class " + cls + ": " + reason), class_name(cls) {}
};

// --- generating-function oracle ------------------------------------------

// x at or above the EGF singularity: series/fixed-point evaluation failed.
struct EgfDivergent : Error {
    using Error::Error;
};

// OGF sum does not exist at the requested parameter.
struct DivergentOgf : Error {
    using Error::Error;
};

struct InconclusiveGrowth : Error {
    using Error::Error;
};

struct ToleranceNotReached : Error {
    using Error::Error;
};

// --- samplers -------------------------------------------------------------

struct TailTooHeavy : Error {
    using Error::Error;
};

struct SizeCeilingExceeded : Error {
    using Error::Error;
};

// A drawn parameter fell outside the EGF evaluator's verified range more
// than the retry budget allows; the oracle and growth verdicts disagree.
struct InconsistentOracle : Error {
    using Error::Error;
};

// --- words ----------------------------------------------------------------

struct SingularSystem : Error {
    using Error::Error;
};

struct EmptyLanguage : Error {
    using Error::Error;
};

// --- stats / cli ------------------------------------------------------------

struct TooLarge : Error {
    using Error::Error;
};

struct DegenerateLaw : Error {
    using Error::Error;
};

struct Unachievable : Error {
    using Error::Error;
};

} // namespace bz
