#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "bmhd/fft.hpp"

int main(int argc, char** argv) {
  bmhd::retain_large_allocations();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
