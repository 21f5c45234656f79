#pragma once

// Reference computations used to check the library. None of these call into
// cute; they use different algorithms or plain arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

struct Mva {
  double throughput;
  double response;
};

// Buzen's convolution algorithm. For a cyclic network of single servers with
// visit ratio 1, G(c) = sum over queue-length vectors of prod s_k^{n_k}, and
// X(C) = G(C-1) / G(C). Response follows from Little's law on the cycle.
inline Mva buzen(const std::vector<double> &service, std::uint32_t customers) {
  // Scale by the largest service time so G stays in range.
  const double scale = *std::max_element(service.begin(), service.end());
  std::vector<long double> g(customers + 1, 0.0L);
  g[0] = 1.0L;
  for (double s : service) {
    const long double x = static_cast<long double>(s) / scale;
    for (std::uint32_t c = 1; c <= customers; ++c)
      g[c] += x * g[c - 1];
  }
  const long double x = g[customers - 1] / g[customers] / scale;
  return {static_cast<double>(x),
          static_cast<double>(static_cast<long double>(customers) / x)};
}

// Closed form for N + 1 identical unit servers.
inline Mva identical_closed_form(std::uint32_t n, std::uint32_t c) {
  return {static_cast<double>(c) / (n + c), static_cast<double>(n + c)};
}

// First C in 1..c_max with the largest power, swept with Buzen.
inline std::uint32_t best_population(const std::vector<double> &service,
                                     std::uint32_t c_max) {
  std::uint32_t best = 1;
  double best_power = -1.0;
  for (std::uint32_t c = 1; c <= c_max; ++c) {
    const Mva m = buzen(service, c);
    const double p = m.throughput / m.response;
    if (p > best_power * (1.0 + 1e-12)) {
      best_power = p;
      best = c;
    }
  }
  return best;
}

inline double jain(const std::vector<double> &t) {
  long double sum = 0.0L, sq = 0.0L;
  for (double v : t) {
    sum += v;
    sq += static_cast<long double>(v) * v;
  }
  return static_cast<double>(sum * sum / (t.size() * sq));
}

// Plain restatement of the window rules, for differential testing.
struct RefWindow {
  enum Decrease { Sudden, Gradual, Binary };
  std::uint32_t lo, hi, ws, count = 0;
  std::uint32_t linear_every = 0; // 0 = parabolic
  Decrease dec = Sudden;

  void ack(std::uint32_t n) {
    count += n;
    const std::uint32_t threshold = linear_every ? linear_every : ws;
    if (count >= threshold) {
      count = 0;
      if (ws < hi)
        ++ws;
    }
  }
  void timeout() {
    count = 0;
    switch (dec) {
    case Sudden:
      ws = lo;
      break;
    case Gradual:
      ws = ws > lo ? ws - 1 : lo;
      break;
    case Binary:
      ws = std::max(lo, (ws + 1) / 2);
      break;
    }
  }
};

} // namespace oracle
