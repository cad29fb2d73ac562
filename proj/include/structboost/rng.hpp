#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace structboost {

// Deterministic sampling helpers. The standard distributions are
// implementation-defined, so synthetic data goes through these fixed
// mappings to keep seeded outputs byte-identical everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(static_cast<std::mt19937_64::result_type>(seed)) {}

    double uniform() {  // (0, 1)
        return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double gauss() {  // Box-Muller
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace structboost
