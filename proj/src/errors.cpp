#include <bouss/errors.hpp>
#include <bouss/exec.hpp>

#include <omp.h>

#include <atomic>

namespace bouss {

AuditFailure::AuditFailure(std::string module, std::string audit, std::string detail)
    : std::runtime_error("[" + module + "] audit '" + audit + "' failed: " + detail),
      module_(std::move(module)), audit_(std::move(audit)), detail_(std::move(detail)) {}

namespace {
std::atomic<int> g_workers{0};
}

void set_worker_count(int n) {
    g_workers = n;
    if (n > 0) omp_set_num_threads(n);
}

int worker_count() {
    const int n = g_workers.load();
    return n > 0 ? n : omp_get_max_threads();
}

} // namespace bouss
