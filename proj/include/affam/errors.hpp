#pragma once

#include <stdexcept>
#include <string>

namespace affam {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// affine values
struct NormalizationError : Error { using Error::Error; };  // state entries do not sum to 1
struct ColumnSumError : Error { using Error::Error; };      // operator column does not sum to 1
struct DimensionError : Error { using Error::Error; };
struct SingularError : Error { using Error::Error; };

// encoders
struct DigitRangeError : Error { using Error::Error; };

// machine model
struct ModeError : Error { using Error::Error; };
struct MissingReplyError : Error { using Error::Error; };
struct InvalidReplySymbolError : Error { using Error::Error; };
struct SpecError : Error { using Error::Error; };  // malformed VerifierSpec used where validity is required

// interaction engine
struct BranchExplosionError : Error {
    BranchExplosionError(const std::string& what, std::size_t nodes, std::size_t cap)
        : Error(what), nodes(nodes), cap(cap) {}
    std::size_t nodes;
    std::size_t cap;
};
struct DivergenceError : Error { using Error::Error; };

// Turing machines
struct AlphabetError : Error { using Error::Error; };
struct HaltedError : Error { using Error::Error; };
struct FlavorError : Error { using Error::Error; };
struct MachineError : Error { using Error::Error; };  // structural problems found at load

// protocol builders
struct EpsilonRangeError : Error { using Error::Error; };
struct BudgetError : Error { using Error::Error; };
struct MalformedInstanceError : Error { using Error::Error; };
struct OutputConventionError : Error { using Error::Error; };

// cli / config
struct ConfigError : Error { using Error::Error; };

}  // namespace affam
