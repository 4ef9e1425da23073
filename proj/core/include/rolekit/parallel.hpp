#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace rolekit {

/// Outcome of one work item: a value or the exception it threw.
template <typename R>
struct Outcome {
  std::optional<R> value;
  std::exception_ptr error;

  bool ok() const noexcept { return value.has_value(); }
};

/// Applies `fn` to every index in [0, n) on at most `workers` threads and
/// returns the outcomes in index order. Exceptions are captured per item.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn&& fn) -> std::vector<Outcome<std::invoke_result_t<Fn&, std::size_t>>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Outcome<R>> out(n);
  auto run = [&](std::size_t i) {
    try {
      out[i].value.emplace(fn(i));
    } catch (...) {
      out[i].error = std::current_exception();
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace rolekit
