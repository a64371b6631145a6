#include <iostream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cli/cli.hpp"

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees many large matrices per step; keep them in
  // the heap instead of round-tripping through mmap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  std::vector<std::string> args(argv + 1, argv + argc);
  return kgsumm::cli::run(args, std::cout, std::cerr);
}
