#include "bmcd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bmcd {

namespace {

std::atomic<int>& jobs() {
  static std::atomic<int> j{std::max(1, static_cast<int>(std::thread::hardware_concurrency()))};
  return j;
}

}  // namespace

int worker_count() { return jobs().load(); }

void set_worker_count(int n) { jobs().store(std::max(1, n)); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex mu;
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        // Keep the lowest failing index so the reported error is schedule independent.
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t block = (count + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = w * block, e = std::min(count, b + block);
    if (b < e) threads.emplace_back(run, b, e);
  }
  run(0, std::min(count, block));
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bmcd
