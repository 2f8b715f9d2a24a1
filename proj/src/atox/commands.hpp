#pragma once

#include <string>

#include "atox/jsonl.hpp"

namespace atox::commands {

// Executes one named stage with a JSON options document and returns its
// result document. Command names match the CLI subcommands; annotate splits
// into annotate-export / annotate-sample / annotate-ingest. Throws
// ValidationError (bad inputs) or RuntimeError (failed work).
io::json run(const std::string& name, const io::json& options);

}  // namespace atox::commands
