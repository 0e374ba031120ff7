#include "affreg/threading.hpp"

#include <atomic>

namespace affreg {

namespace {
std::atomic<int> g_max_threads{1};
}

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n); }

int max_threads() { return g_max_threads.load(); }

}  // namespace affreg
