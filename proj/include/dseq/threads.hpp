#pragma once

namespace dseq {

/// Name of the environment variable that caps internal parallelism.
inline constexpr const char* kThreadsEnvVar = "DOPPLER_SEQ_THREADS";

/// Applies DOPPLER_SEQ_THREADS (a positive integer) to the OpenMP runtime.
/// Returns the resulting thread cap.
int apply_thread_limit_from_env();

void set_thread_limit(int threads);
int thread_limit();

}  // namespace dseq
