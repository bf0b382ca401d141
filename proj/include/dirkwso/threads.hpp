#pragma once

namespace dirkwso {

/// DIRKWSO_THREADS when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
int default_threads();

}  // namespace dirkwso
