#include <cstdio>
#include <cstdlib>

#include "thermo/acceptance.hpp"

int main(int argc, char** argv) {
  thermo::acceptance::Options opt;
  if (argc > 1) {
    char* end = nullptr;
    opt.seed = std::strtoull(argv[1], &end, 10);
    if (*argv[1] == '\0' || *end != '\0') {
      std::fprintf(stderr, "usage: acceptance [seed]\n");
      return 2;
    }
  }
  int failed = 0;
  thermo::acceptance::run_all(opt, [&](const thermo::acceptance::Outcome& r) {
    std::printf("%s\n", thermo::acceptance::format_line(r).c_str());
    std::fflush(stdout);
    if (!r.passed()) ++failed;
  });
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
