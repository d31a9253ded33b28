#pragma once

// Execution policy for the data-parallel kernels. Every kernel has a serial
// reference path; the OpenMP path must produce bit-identical results.

namespace mscs {

enum class Exec { serial, parallel };

/// Applies the MSCS_THREADS environment variable (0 or unset = OpenMP
/// default). Returns the thread count in effect.
int configure_threads_from_env();

/// Threads the parallel path will use.
int max_threads();

}  // namespace mscs
