#pragma once

#include <functional>

namespace foliate {

// Worker count for internal loops: FOLIATE_THREADS if set (>= 1), else 1.
int thread_count();
void set_thread_count(int n);

// Splits [0, n) into one contiguous block per worker. Bodies must only write
// to slots owned by their own indices, which keeps results independent of
// the worker count.
void parallel_for(int n, const std::function<void(int begin, int end)>& body);

}  // namespace foliate
