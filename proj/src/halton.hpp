#pragma once

#include <array>
#include <cstdint>

namespace srd::detail {

/// Radical-inverse low-discrepancy points in up to eight dimensions.
class Halton {
public:
    explicit Halton(std::uint64_t offset = 0) : index_(offset + 1) {}

    double coord(int dim) const { return radical_inverse(index_, kPrimes[dim]); }
    void advance() { ++index_; }

private:
    static constexpr std::array<std::uint64_t, 8> kPrimes{2, 3, 5, 7, 11, 13, 17, 19};

    static double radical_inverse(std::uint64_t i, std::uint64_t base) {
        double inv = 1.0 / static_cast<double>(base);
        double f = inv;
        double r = 0.0;
        while (i > 0) {
            r += f * static_cast<double>(i % base);
            i /= base;
            f *= inv;
        }
        return r;
    }

    std::uint64_t index_;
};

}  // namespace srd::detail
