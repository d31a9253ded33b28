#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "mscs/parallel.hpp"

int main(int argc, char** argv) {
  mscs::configure_threads_from_env();
  return doctest::Context(argc, argv).run();
}
