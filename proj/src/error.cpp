#include "apm/error.hpp"


#include "apm/rng.hpp"

namespace apm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::RosterSizeViolation: return "RosterSizeViolation";
    case ErrorCode::PlayerOnBothTeams: return "PlayerOnBothTeams";
    case ErrorCode::DuplicateMapId: return "DuplicateMapId";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::MissingPrior: return "MissingPrior";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NeedTwoChains: return "NeedTwoChains";
    case ErrorCode::Numerical: return "Numerical";
  }
  return "Unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

}  // namespace apm
