#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace marknav {

/// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerically invalid input: non-finite values, negative lengths,
/// degenerate sides, self-edges.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Three side lengths that cannot close into a triangle (law-of-cosines
/// argument outside [-1, 1] beyond the clamping tolerance).
class InconsistentTriangleError : public Error {
public:
    using Error::Error;
};

/// Corner pixels whose apparent side exceeds the reference side beyond
/// tolerance; the detection contradicts the planar-marker assumption.
class InconsistentCornersError : public Error {
public:
    using Error::Error;
};

/// Observation taken with the marker too far from the image center.
class MisalignmentError : public Error {
public:
    using Error::Error;
};

/// Link or composition whose endpoints coincide (zero-length edge).
class DegenerateLinkError : public Error {
public:
    using Error::Error;
};

/// Marker id unknown to the graph or the world.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// No chain of stored edges connects the requested pair.
class NoPathError : public Error {
public:
    using Error::Error;
};

/// A full search sweep completed without detecting the requested marker.
class MarkerNotFoundError : public Error {
public:
    using Error::Error;
};

/// The marker left the field of view while aligning to it.
class SearchRequiredError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; the message carries line/field context.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid file whose contents violate an invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Failure inside a multi-phase mission, tagged with the phase it hit.
class MissionError : public Error {
public:
    MissionError(std::string phase, const std::string& message)
        : Error(phase + ": " + message), phase_(std::move(phase)) {}

    const std::string& phase() const noexcept { return phase_; }

private:
    std::string phase_;
};

}  // namespace marknav
