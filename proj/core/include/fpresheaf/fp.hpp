#pragma once

#include <atomic>
#include <cstdint>

#include "fpresheaf/errors.hpp"

namespace fpre::fp {

// The prime is a run-wide configuration: objects carry no per-instance modulus.
// Supported primes: 2, 3, 5. Default 2.
unsigned prime();
void set_prime(unsigned p);

inline unsigned add(unsigned a, unsigned b) { return (a + b) % prime(); }
inline unsigned sub(unsigned a, unsigned b) { unsigned p = prime(); return (a + p - b) % p; }
inline unsigned mul(unsigned a, unsigned b) { return (a * b) % prime(); }
unsigned inv(unsigned a);
unsigned neg(unsigned a);

// Smallest primitive root mod p (used for the GL dilation generator when p > 2).
unsigned primitive_root();

// p^e with overflow check against a 2^63 guard.
std::uint64_t pow_u64(std::uint64_t base, unsigned exp);

// Scoped prime switch, for tests that exercise several primes in one process.
class PrimeScope {
public:
    explicit PrimeScope(unsigned p);
    ~PrimeScope();
    PrimeScope(const PrimeScope&) = delete;
    PrimeScope& operator=(const PrimeScope&) = delete;

private:
    unsigned saved_;
};

} // namespace fpre::fp
