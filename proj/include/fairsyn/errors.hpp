#pragma once

#include <stdexcept>
#include <string>

namespace fairsyn {

// Base class for all toolkit errors. Subtypes exist so callers and tests
// can distinguish failure modes without string matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dataset
struct ParseError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnknownValue : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct MissingColumn : Error { using Error::Error; };

// marginal
struct BadClique : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };

// select
struct NotNormalized : Error { using Error::Error; };
struct Not2Way : Error { using Error::Error; };
struct EmptyDatabase : Error { using Error::Error; };

// privacy
struct NonPositiveBudget : Error { using Error::Error; };
struct NegativeSigma : Error { using Error::Error; };
struct BadAlpha : Error { using Error::Error; };
struct BadDelta : Error { using Error::Error; };

// model
struct MissingMeasurement : Error { using Error::Error; };
struct CalibrationDivergence : Error { using Error::Error; };

// fairness / predictor
struct LengthMismatch : Error { using Error::Error; };
struct BadPredicate : Error { using Error::Error; };
struct DegenerateTarget : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };

// audit
struct AllReplicatesUndefined : Error { using Error::Error; };

// cli / config
struct ConfigError : Error { using Error::Error; };

} // namespace fairsyn
