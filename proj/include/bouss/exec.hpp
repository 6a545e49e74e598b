#pragma once

namespace bouss {

// Serial drivers are the reference implementation; Parallel drivers run the
// same per-node kernels under OpenMP and must produce bit-identical output.
enum class Exec { Serial, Parallel };

void set_worker_count(int n);
int worker_count();

} // namespace bouss
