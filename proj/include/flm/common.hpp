#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace flm {

using complex = std::complex<double>;

// Error hierarchy. Each named error in a module contract maps to one of
// these; the `what()` string carries the diagnostic.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RejectNotComplete : Error { using Error::Error; };
struct RejectDimension : Error { using Error::Error; };
struct BadParam : Error { using Error::Error; };
struct PlanTooSmall : Error { using Error::Error; };
struct StepTooCoarse : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct UnboundedSymbol : Error { using Error::Error; };
struct DivergentConstant : Error { using Error::Error; };
struct AliasRisk : Error { using Error::Error; };
struct SeriesDiverges : Error { using Error::Error; };
struct MissingZeroConstantTerm : Error { using Error::Error; };
struct NotElliptic : Error { using Error::Error; };
struct EmptyProbeSet : Error { using Error::Error; };
struct NotMConic : Error { using Error::Error; };
struct ConstructionFailed : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };
struct PreconditionChainBroken : Error { using Error::Error; };
struct BadStep : Error { using Error::Error; };
struct ConstraintViolated : Error { using Error::Error; };
struct BadK : Error { using Error::Error; };
struct HypothesisViolated : Error { using Error::Error; };
struct CaseMismatch : Error { using Error::Error; };

// Thread cap honoring FLMICRO_THREADS (0 or unset -> hardware concurrency).
unsigned thread_count();

// Deterministic parallel loop over [0, n): chunks are assigned by index, so
// the result of disjoint writes does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace flm
