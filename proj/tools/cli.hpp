#pragma once

// The exchkit command-line front end, callable in-process.

#include "exchkit/dfpe.hpp"
#include "exchkit/markov.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace exchkit::cli {

/// Process exit codes.
enum Exit : int { kOk = 0, kValidation = 2, kBoundTooSmall = 3 };

/// Law of an independent start state and the m_{a,b} inputs.
struct MeMixedFile {
  int length = 0;
  MixedMomentInput input;
};

/// A parsed distribution file. DFPE laws are validated and carried as
/// weights whatever representation the file used.
using Loaded = std::variant<DfpeDistribution, MeDistribution, MeMixedFile>;

/// Parses one distribution document (see the README for the format).
Loaded parse_distribution(const std::string& text);

/// Single-line JSON documents for each representation.
std::string dfpe_document(const DfpeDistribution& d);
std::string dfpe_document(const MomentVector& mv);
std::string dfpe_document(const CovarianceVector& cv);
std::string me_document(const MeDistribution& d);
std::string me_document(const GammaPoint& g);

/// Runs the CLI on argv-style arguments (args[0] is the program name).
/// "-" paths read from `in` or write to `out`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace exchkit::cli
