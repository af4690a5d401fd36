#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace conclab {

using Vec = std::vector<double>;

// ---- error types -----------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NegativeWeight : Error { using Error::Error; };
struct EmptySupport : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct SizeCapExceeded : Error { using Error::Error; };
struct GridTooLarge : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };
struct SupportTooLarge : Error { using Error::Error; };
struct EnumerationCapExceeded : Error { using Error::Error; };
struct EventEmpty : Error { using Error::Error; };
struct DisconnectedGraph : Error { using Error::Error; };
struct NegativeInput : Error { using Error::Error; };

// ---- worker fan-out --------------------------------------------------------

// Worker count: CONC_LAB_THREADS if set, else hardware concurrency.
int worker_count();

// Static partition of [0, count) over workers.  Results must be written to
// disjoint slots; chunk assignment is deterministic so serial and parallel
// runs agree bit-for-bit.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& chunk_fn);

inline double sqr(double x) { return x * x; }

}  // namespace conclab
