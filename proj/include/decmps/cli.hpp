#pragma once

namespace decmps {

/// Command-line front end. Subcommands: solve, validate, oracle, gen.
/// Returns 0 on success (converged solve), 2 for a solve that hit the trial
/// cap with the gap still open, 1 on any error.
int run_cli(int argc, char** argv);

}  // namespace decmps
