#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string_view>

namespace semiope {

// splitmix64 finalizer; also used as the mixing function for key derivation
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// Counter-based stream: the i-th output depends only on (key, i), so streams
// derived from the same (seed, tag, coordinates) are identical regardless of
// which thread draws from them or in what order streams are created.
class RngStream {
public:
    explicit RngStream(uint64_t key) : key_(key) {}

    static RngStream derive(uint64_t master, std::string_view tag,
                            std::initializer_list<uint64_t> coords = {}) {
        uint64_t k = mix64(master ^ fnv1a64(tag));
        for (uint64_t c : coords) k = mix64(k ^ mix64(c));
        return RngStream(k);
    }

    RngStream derive_child(std::string_view tag,
                           std::initializer_list<uint64_t> coords = {}) const {
        return derive(key_, tag, coords);
    }

    uint64_t key() const { return key_; }

    uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++); }

    // [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; two uniforms per call, no caching so the
    // draw count per event is fixed
    double next_normal() {
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // uniform integer in [0, n)
    int next_int(int n) {
        return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    int sample_discrete(std::span<const double> probs) {
        double u = next_double();
        double c = 0.0;
        int last_positive = -1;
        for (size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) last_positive = static_cast<int>(i);
            c += probs[i];
            if (u < c) return static_cast<int>(i);
        }
        return last_positive;  // guard against cumulative rounding below 1
    }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace semiope
