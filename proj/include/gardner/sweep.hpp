#pragma once

// Parameter lattices and an order-preserving parallel map over them.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "gardner/exact.hpp"

namespace gardner {

struct SweepLattice {
    std::vector<double> alphas{0.5, 1.0, 2.0};
    std::vector<double> betas{0.5, 1.0, 2.0};
    std::vector<double> mu_fractions{0.1, 0.5, 0.9};  // mu / mu_max
    double x1 = 0.0;
    double x2 = 0.0;
};

struct SweepPoint {
    BreatherParams params;
    double mu_fraction = 0.0;
    bool admissible = true;
    std::string reason;  // why the point was skipped
};

inline std::vector<SweepPoint> lattice_points(const SweepLattice& lat) {
    std::vector<SweepPoint> out;
    for (double a : lat.alphas)
        for (double b : lat.betas)
            for (double f : lat.mu_fractions) {
                SweepPoint sp;
                sp.params = {a, b, 0.0, lat.x1, lat.x2};
                sp.params.mu = f * sp.params.mu_max();
                sp.mu_fraction = f;
                try {
                    sp.params.validate();
                } catch (const ParameterDomainError& e) {
                    sp.admissible = false;
                    sp.reason = e.what();
                }
                out.push_back(sp);
            }
    return out;
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// out[i] = fn(items[i]); work is pulled from a shared counter, results land by index,
// so the output does not depend on scheduling. The first exception is rethrown.
template <class T, class Fn>
auto parallel_map(const std::vector<T>& items, Fn&& fn, unsigned threads = default_threads()) {
    using R = decltype(fn(items.front()));
    std::vector<R> out(items.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size() && !failed; i = next++) {
            try {
                out[i] = fn(items[i]);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(items.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace gardner
