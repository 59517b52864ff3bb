#pragma once

namespace lowrank {

// Full command-line front end: decompose | compare | sensors | report.
// Returns the process exit code: 0 success, 1 usage error, 2 numerical
// failure, 3 I/O error. Honors LOWRANK_LOG in {quiet, info, debug}.
int cli_run(int argc, char** argv);

}  // namespace lowrank
