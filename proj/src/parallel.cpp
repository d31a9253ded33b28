#include "mscs/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

#include "mscs/error.hpp"

namespace mscs {

int configure_threads_from_env() {
  if (const char* env = std::getenv("MSCS_THREADS"); env != nullptr && *env != '\0') {
    int n = 0;
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("MSCS_THREADS must be an integer, got '") + env + "'");
    }
    if (n < 0) throw InvalidArgument("MSCS_THREADS must be >= 0");
    if (n > 0) omp_set_num_threads(n);
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace mscs
