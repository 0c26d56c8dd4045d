#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <type_traits>
#include <vector>

namespace ccpj {

/// Applies `fn` to every element, running up to `hardware_concurrency` calls
/// at once. Results keep the input order; the first exception (in input
/// order) is rethrown after all started work has finished.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& inputs, Fn fn)
    -> std::vector<std::invoke_result_t<Fn&, const T&>> {
  using R = std::invoke_result_t<Fn&, const T&>;
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<R> out;
  out.reserve(inputs.size());
  for (std::size_t begin = 0; begin < inputs.size(); begin += width) {
    const std::size_t end = std::min(inputs.size(), begin + width);
    std::vector<std::future<R>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&fn, &inputs, i] { return fn(inputs[i]); }));
    }
    for (auto& f : batch) f.wait();
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

}  // namespace ccpj
