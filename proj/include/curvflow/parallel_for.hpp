#pragma once

#include <cstdint>

namespace curvflow {

// Global switch for the OpenMP kernels; the serial reference path is kept for
// testing and is selected by setting this to false (or building without
// OpenMP).  Per-index work must be independent; both paths produce identical
// output bytes.
bool& parallel_kernels();

namespace detail {
void parallel_for_impl(std::int64_t n, void (*body)(std::int64_t, void*), void* ctx,
                       bool parallel);
}

template <class F>
void parallel_for(std::int64_t n, F&& fn) {
  auto body = [](std::int64_t i, void* ctx) { (*static_cast<F*>(ctx))(i); };
  detail::parallel_for_impl(n, body, &fn, parallel_kernels());
}

template <class F>
void serial_for(std::int64_t n, F&& fn) {
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace curvflow
