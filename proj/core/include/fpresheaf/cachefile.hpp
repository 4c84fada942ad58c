#pragma once

#include <string>

#include "fpresheaf/presheaf.hpp"

namespace fpre::cache {

// Persisted memo caches under a cache directory, keyed by (p, window) for
// factorizations and additionally by a definition hash for action tables.
// Corrupt or mismatched files are detected by checksum and ignored (the cache
// is then rebuilt silently).

std::uint64_t fnv1a(const std::string& data);
std::string definition_hash(const std::string& expr, unsigned p, int window);

void load_factor_cache(const site::TruncatedSite& s, const std::string& dir);
void save_factor_cache(const site::TruncatedSite& s, const std::string& dir);

void load_act_tables(const presheaf::SetPresheaf& x, const std::string& dir,
                     const std::string& def_hash);
void save_act_tables(const presheaf::SetPresheaf& x, const std::string& dir,
                     const std::string& def_hash);

} // namespace fpre::cache
