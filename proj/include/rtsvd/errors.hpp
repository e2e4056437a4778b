// Exception types thrown across the library.  Every error derives from
// rtsvd::Error so callers can catch one base type at the CLI boundary.

#pragma once

#include <stdexcept>

namespace rtsvd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// operand shapes are incompatible for the requested operation
struct DimensionMismatch : Error { using Error::Error; };

// an oracle-grade dense routine would exceed its configured budget
struct SizeLimit : Error { using Error::Error; };

// a spectrum claimed to be conjugate-symmetric is not, within tolerance
struct SymmetryViolation : Error { using Error::Error; };

// requested truncation rank lies outside [1, min(n1, n2)]
struct RankOutOfRange : Error { using Error::Error; };

// oversampling too small for the requested expectation bound (needs p >= 2)
struct OversamplingTooSmall : Error { using Error::Error; };

// iteration-selection target must lie in (0, 1)
struct InvalidEpsilon : Error { using Error::Error; };

// tail-bound failure probability must lie in (0, 1)
struct InvalidDelta : Error { using Error::Error; };

// per-slice iteration vector has the wrong length or breaks mirror pairing
struct IterationVectorLength : Error { using Error::Error; };

// test sketch has a rank-deficient leading block, the bound is undefined
struct RankDeficientSketch : Error { using Error::Error; };

// dataset too small for the requested fold count
struct TooFewSamples : Error { using Error::Error; };

// images in one dataset do not share a common size
struct MixedImageSizes : Error { using Error::Error; };

// image file missing, truncated, or not a binary PGM
struct UnreadableImage : Error { using Error::Error; };

// tensor container file missing, malformed, or failing its checksum
struct IoError : Error { using Error::Error; };

// a constructed tensor contains NaN or infinity
struct NonFiniteValue : Error { using Error::Error; };

// catch-all for malformed run configuration
struct InvalidArgument : Error { using Error::Error; };

} // namespace rtsvd
