#include "fpresheaf/fp.hpp"

namespace fpre::fp {

namespace {
std::atomic<unsigned> g_prime{2};

bool supported(unsigned p) { return p == 2 || p == 3 || p == 5; }
} // namespace

unsigned prime() { return g_prime.load(std::memory_order_relaxed); }

void set_prime(unsigned p) {
    if (!supported(p)) throw UsageError("prime must be one of {2, 3, 5}");
    g_prime.store(p, std::memory_order_relaxed);
}

unsigned inv(unsigned a) {
    unsigned p = prime();
    a %= p;
    if (a == 0) throw UsageError("division by zero in GF(p)");
    // p <= 5: Fermat by brute force
    for (unsigned x = 1; x < p; ++x)
        if ((a * x) % p == 1) return x;
    throw UsageError("no inverse (modulus not prime?)");
}

unsigned neg(unsigned a) {
    unsigned p = prime();
    return (p - (a % p)) % p;
}

unsigned primitive_root() {
    switch (prime()) {
        case 2: return 1;
        case 3: return 2;
        case 5: return 2;
        default: throw UsageError("unsupported prime");
    }
}

std::uint64_t pow_u64(std::uint64_t base, unsigned exp) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (r > (std::uint64_t{1} << 62) / (base ? base : 1))
            throw CapExceeded("p^k exceeds 2^62 in pow_u64");
        r *= base;
    }
    return r;
}

PrimeScope::PrimeScope(unsigned p) : saved_(prime()) { set_prime(p); }
PrimeScope::~PrimeScope() { g_prime.store(saved_, std::memory_order_relaxed); }

} // namespace fpre::fp
