#include "util.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace lglmf {

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) raise(ErrorCode::io, "cannot open file for hashing: " + path);
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) {
    h = fnv1a64(std::string_view(buf, got), h);
  }
  bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) raise(ErrorCode::io, "read error while hashing: " + path);
  return h;
}

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    fn(0, count);
    return;
  }
  std::size_t n_chunks = std::min<std::size_t>(threads, count);
  std::size_t chunk = (count + n_chunks - 1) / n_chunks;
  std::vector<std::thread> pool;
  pool.reserve(n_chunks);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    std::size_t begin = c * chunk;
    std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lglmf
