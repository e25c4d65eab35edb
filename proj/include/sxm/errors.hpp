#pragma once

#include <stdexcept>
#include <string>

namespace sxm {

// Base class for every recoverable error raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A vector with (near-)zero norm was asked to be normalized.
struct ZeroVector : Error {
    using Error::Error;
};

// Two vectors or point sets of different dimension were combined.
struct DimensionMismatch : Error {
    using Error::Error;
};

// An operation over a subset of points received an empty subset.
struct EmptySelection : Error {
    using Error::Error;
};

// The resultant of a point subset is too short to define a direction.
struct DegenerateResultant : Error {
    using Error::Error;
};

// A series evaluation failed to converge within its term budget.
struct NonConvergence : Error {
    using Error::Error;
};

// Fewer points than clusters (or than required by the algorithm).
struct TooFewPoints : Error {
    using Error::Error;
};

// A cluster is too small to be considered for a 2-way split.
struct TooSmallToSplit : Error {
    using Error::Error;
};

// A 2-way split produced an empty side; the split cannot be scored.
struct EmptySubcluster : Error {
    using Error::Error;
};

// CSV input could not be parsed; message carries row/column context.
struct ParseError : Error {
    using Error::Error;
};

// Every input row degenerated to a zero vector during preprocessing.
struct AllRowsDegenerate : Error {
    using Error::Error;
};

}  // namespace sxm
