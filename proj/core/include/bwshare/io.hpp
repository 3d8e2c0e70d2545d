#ifndef BWSHARE_IO_HPP
#define BWSHARE_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "bwshare/model.hpp"
#include "bwshare/multipath.hpp"

namespace bwshare {

// Network documents are JSON objects with keys
//   "A"      row-major array of rows
//   "C", "nu", "mu", "kappa"  arrays
//   "alpha"  number
// Doubles are written with round-trip precision.
NetworkSpec NetworkSpecFromJson(const std::string& text);
std::string NetworkSpecToJson(const NetworkSpec& spec);
NetworkSpec LoadNetworkSpec(const std::filesystem::path& path);

// Multi-path documents: "H" (I x K), "Abar" (L x K), "Cbar" (L), and
// optionally "nu", "mu", "kappa", "alpha" per source-destination pair.
MultipathSpec MultipathSpecFromJson(const std::string& text);
MultipathSpec LoadMultipathSpec(const std::filesystem::path& path);

// Mixture documents: {"mixtures": [[[fraction, rate], ...], ...]}, one list
// per route.
std::vector<std::vector<MixtureComponent>> MixturesFromJson(const std::string& text);

std::string ReadTextFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents);

}  // namespace bwshare

#endif  // BWSHARE_IO_HPP
