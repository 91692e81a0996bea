#include "dseq/threads.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace dseq {

int apply_thread_limit_from_env() {
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) set_thread_limit(static_cast<int>(v));
  }
  return thread_limit();
}

void set_thread_limit(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_limit() { return omp_get_max_threads(); }

}  // namespace dseq
