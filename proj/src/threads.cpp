#include "dirkwso/threads.hpp"

#include <cstdlib>
#include <thread>

namespace dirkwso {

int default_threads() {
  if (const char* env = std::getenv("DIRKWSO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return int(v);
  }
  return int(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace dirkwso
